#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "specbench/graph.hpp"
#include "specbench/models.hpp"
#include "specbench/rng.hpp"
#include "test_util.hpp"

using namespace specbench;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

// Flat view over every trainable scalar, in a stable order shared between a
// parameter container and its gradient container.
std::vector<double*> param_pointers(ModelState& state) {
  std::vector<double*> ptrs;
  for (auto& w : state.weights) {
    for (Eigen::Index i = 0; i < w.size(); ++i) ptrs.push_back(w.data() + i);
  }
  for (auto& b : state.biases) {
    for (Eigen::Index i = 0; i < b.size(); ++i) ptrs.push_back(b.data() + i);
  }
  for (auto& e : state.epsilons) ptrs.push_back(&e);
  return ptrs;
}

// Worst relative error between analytic gradients and central finite
// differences over every parameter of a two-layer model.
double max_rel_grad_error(ModelKind kind, LossKind loss) {
  const Graph g = generate_path(10);
  const Operators ops = build_operators(g, {kind});

  ModelConfig config;
  config.kind = kind;
  config.layers = 2;
  config.hidden = 6;
  config.in_dim = 4;
  config.out_dim = loss == LossKind::cross_entropy ? 3 : 1;
  config.cheb_order = 3;

  const Eigen::MatrixXd x = random_matrix(g.n, config.in_dim, 4242);
  Eigen::VectorXi labels(g.n);
  for (int i = 0; i < g.n; ++i) labels[i] = i % 3;
  const Eigen::VectorXd target = random_matrix(g.n, 1, 77).col(0);
  std::vector<bool> mask(static_cast<std::size_t>(g.n), false);
  for (int i = 0; i < g.n; ++i) mask[static_cast<std::size_t>(i)] = (i % 3 != 0);

  ModelState params = init_params(config, InitScheme::default_uniform, 7);
  const auto loss_of = [&](const ModelState& p) {
    const Eigen::MatrixXd out = forward(config, p, ops, x);
    return loss == LossKind::cross_entropy ? cross_entropy_loss(out, labels, mask)
                                           : mse_loss(out, target, mask);
  };

  ForwardCache cache;
  const Eigen::MatrixXd out = forward(config, params, ops, x, nullptr, &cache);
  const Eigen::MatrixXd gout = loss == LossKind::cross_entropy
                                   ? cross_entropy_gradient(out, labels, mask)
                                   : mse_loss_gradient(out, target, mask);
  ModelState grads = backward(config, params, ops, cache, gout);

  const std::vector<double*> ptrs = param_pointers(params);
  const std::vector<double*> gptrs = param_pointers(grads);
  REQUIRE(ptrs.size() == gptrs.size());
  REQUIRE(ptrs.size() > 0);

  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < ptrs.size(); ++i) {
    const double saved = *ptrs[i];
    *ptrs[i] = saved + h;
    const double up = loss_of(params);
    *ptrs[i] = saved - h;
    const double down = loss_of(params);
    *ptrs[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double analytic = *gptrs[i];
    const double rel =
        std::abs(analytic - fd) / std::max({1e-6, std::abs(analytic), std::abs(fd)});
    worst = std::max(worst, rel);
  }
  return worst;
}

bool states_equal(const ModelState& a, const ModelState& b) {
  if (a.weights.size() != b.weights.size() || a.biases.size() != b.biases.size() ||
      a.epsilons.size() != b.epsilons.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    if (a.weights[i].rows() != b.weights[i].rows() || a.weights[i].cols() != b.weights[i].cols() ||
        !(a.weights[i].array() == b.weights[i].array()).all()) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.biases.size(); ++i) {
    if (a.biases[i].size() != b.biases[i].size() ||
        !(a.biases[i].array() == b.biases[i].array()).all()) {
      return false;
    }
  }
  return a.epsilons == b.epsilons;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("model kind names round trip") {
  REQUIRE(all_model_kinds().size() == 6);
  for (ModelKind kind : all_model_kinds()) {
    CHECK(parse_model_kind(model_kind_name(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_model_kind("transformer"), std::invalid_argument);
  CHECK(parse_init_scheme("he") == InitScheme::he);
  CHECK(parse_scheduler("cosine_restarts") == SchedulerKind::cosine_restarts);
  CHECK_THROWS_AS(parse_init_scheme("xavier"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scheduler("step"), std::invalid_argument);
}

TEST_CASE("model config validation") {
  ModelConfig config;
  config.in_dim = 4;
  config.out_dim = 2;
  CHECK_NOTHROW(validate_model_config(config));
  config.layers = 0;
  CHECK_THROWS_AS(validate_model_config(config), std::invalid_argument);
  config.layers = 2;
  config.in_dim = 0;
  CHECK_THROWS_AS(validate_model_config(config), std::invalid_argument);
}

TEST_CASE("he initialization: zero biases, variance 2/fan_in") {
  ModelConfig config;
  config.kind = ModelKind::mlp;
  config.layers = 2;
  config.hidden = 64;
  config.in_dim = 4;
  config.out_dim = 1563;  // the last weight matrix holds 64 * 1563 ~ 1e5 draws

  const ModelState state = init_params(config, InitScheme::he, 1);
  REQUIRE(state.weights.size() == 2);
  REQUIRE(state.biases.size() == 2);
  for (const auto& b : state.biases) CHECK(b.cwiseAbs().maxCoeff() == 0.0);

  const Eigen::MatrixXd& w = state.weights[1];  // fan_in = 64
  const double mean = w.mean();
  const double var = (w.array() - mean).square().mean();
  CHECK(std::abs(mean) <= 2e-3);
  CHECK(var == doctest::Approx(2.0 / 64.0).epsilon(0.10));
}

TEST_CASE("uniform initialization stays inside +-1/sqrt(fan_in)") {
  ModelConfig config;
  config.kind = ModelKind::mlp;
  config.layers = 2;
  config.hidden = 64;
  config.in_dim = 4;
  config.out_dim = 1563;

  const ModelState state = init_params(config, InitScheme::default_uniform, 1);
  const double limit = 1.0 / 8.0;  // 1/sqrt(64)
  const Eigen::MatrixXd& w = state.weights[1];
  CHECK(w.cwiseAbs().maxCoeff() <= limit);
  CHECK(w.cwiseAbs().maxCoeff() > 0.9 * limit);  // the range is actually used
  // Uniform(-a, a) has variance a^2/3.
  const double var = (w.array() - w.mean()).square().mean();
  CHECK(var == doctest::Approx(limit * limit / 3.0).epsilon(0.10));
  // Biases draw from the same range, so they are almost surely nonzero.
  CHECK(state.biases[1].cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("initialization is deterministic per seed") {
  ModelConfig config;
  config.kind = ModelKind::gin;
  config.layers = 2;
  config.hidden = 8;
  config.in_dim = 5;
  config.out_dim = 3;
  const ModelState a = init_params(config, InitScheme::default_uniform, 42);
  const ModelState b = init_params(config, InitScheme::default_uniform, 42);
  const ModelState c = init_params(config, InitScheme::default_uniform, 43);
  CHECK(states_equal(a, b));
  CHECK_FALSE(states_equal(a, c));
  CHECK(a.epsilons == std::vector<double>{0.0, 0.0});
}

TEST_CASE("gcn forward on a single edge averages both endpoints") {
  const Graph g = generate_path(2);
  const Operators ops = build_operators(g, {ModelKind::gcn});

  ModelConfig config;
  config.kind = ModelKind::gcn;
  config.layers = 1;
  config.in_dim = 2;
  config.out_dim = 2;

  ModelState params;
  params.weights = {Eigen::MatrixXd::Identity(2, 2)};
  params.biases = {Eigen::VectorXd::Zero(2)};

  const Eigen::MatrixXd out =
      forward(config, params, ops, Eigen::MatrixXd::Identity(2, 2));
  Eigen::MatrixXd expected(2, 2);
  expected << 0.5, 0.5, 0.5, 0.5;
  CHECK((out - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("sgc forward is the propagated linear map") {
  const Graph g = generate_path(4);
  const Operators ops = build_operators(g, {ModelKind::sgc});

  ModelConfig config;
  config.kind = ModelKind::sgc;
  config.layers = 2;
  config.in_dim = 3;
  config.out_dim = 2;

  const ModelState params = init_params(config, InitScheme::default_uniform, 3);
  REQUIRE(params.weights.size() == 1);
  REQUIRE(params.biases.empty());

  const Eigen::MatrixXd x = random_matrix(4, 3, 8);
  const Eigen::MatrixXd out = forward(config, params, ops, x);
  const Eigen::MatrixXd expected = ops.norm_adj * ops.norm_adj * x * params.weights[0];
  CHECK((out - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("precomputed layer-0 propagation matches the direct path") {
  const Graph g = generate_path(6);
  const Eigen::MatrixXd x = random_matrix(6, 4, 15);
  for (ModelKind kind : all_model_kinds()) {
    CAPTURE(model_kind_name(kind));
    const Operators ops = build_operators(g, {kind});
    ModelConfig config;
    config.kind = kind;
    config.layers = 2;
    config.hidden = 5;
    config.in_dim = 4;
    config.out_dim = 2;
    const ModelState params = init_params(config, InitScheme::default_uniform, 21);
    const PropagatedFeatures pre = precompute_propagated(config, ops, x);
    const Eigen::MatrixXd direct = forward(config, params, ops, x);
    const Eigen::MatrixXd cached = forward(config, params, ops, x, &pre);
    CHECK((direct - cached).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("mlp ignores the graph") {
  ModelConfig config;
  config.kind = ModelKind::mlp;
  config.layers = 2;
  config.hidden = 5;
  config.in_dim = 3;
  config.out_dim = 2;
  const ModelState params = init_params(config, InitScheme::default_uniform, 2);
  const Eigen::MatrixXd x = random_matrix(4, 3, 9);
  const Eigen::MatrixXd on_path =
      forward(config, params, build_operators(generate_path(4), {ModelKind::mlp}), x);
  const Eigen::MatrixXd on_star =
      forward(config, params, build_operators(generate_star(4), {ModelKind::mlp}), x);
  CHECK((on_path - on_star).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sage forward combines self and neighborhood terms") {
  const Graph g = generate_path(4);
  const Operators ops = build_operators(g, {ModelKind::sage});
  ModelConfig config;
  config.kind = ModelKind::sage;
  config.layers = 1;
  config.in_dim = 3;
  config.out_dim = 2;
  const ModelState params = init_params(config, InitScheme::default_uniform, 5);
  REQUIRE(params.weights.size() == 2);
  const Eigen::MatrixXd x = random_matrix(4, 3, 6);
  const Eigen::MatrixXd expected = x * params.weights[0] + ops.mean_nbr * x * params.weights[1] +
                                   Eigen::VectorXd::Ones(4) * params.biases[0].transpose();
  CHECK((forward(config, params, ops, x) - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gin forward applies its inner two-layer perceptron") {
  const Graph g = generate_path(4);
  const Operators ops = build_operators(g, {ModelKind::gin});
  ModelConfig config;
  config.kind = ModelKind::gin;
  config.layers = 1;
  config.hidden = 5;
  config.in_dim = 3;
  config.out_dim = 2;
  ModelState params = init_params(config, InitScheme::default_uniform, 5);
  params.epsilons[0] = 0.25;
  const Eigen::MatrixXd x = random_matrix(4, 3, 6);

  const Eigen::MatrixXd summed = 1.25 * x + ops.adjacency * x;
  const Eigen::MatrixXd z1 =
      (summed * params.weights[0]).rowwise() + params.biases[0].transpose();
  const Eigen::MatrixXd r = z1.cwiseMax(0.0);
  const Eigen::MatrixXd expected =
      (r * params.weights[1]).rowwise() + params.biases[1].transpose();  // last layer: linear
  CHECK((forward(config, params, ops, x) - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("cheb forward follows the three-term recurrence") {
  const Graph g = generate_path(4);
  const Operators ops = build_operators(g, {ModelKind::cheb});
  ModelConfig config;
  config.kind = ModelKind::cheb;
  config.layers = 1;
  config.in_dim = 3;
  config.out_dim = 2;
  config.cheb_order = 3;
  const ModelState params = init_params(config, InitScheme::default_uniform, 5);
  REQUIRE(params.weights.size() == 3);
  const Eigen::MatrixXd x = random_matrix(4, 3, 6);

  const Eigen::MatrixXd c0 = x;
  const Eigen::MatrixXd c1 = ops.cheb_shift * x;
  const Eigen::MatrixXd c2 = 2.0 * ops.cheb_shift * c1 - c0;
  const Eigen::MatrixXd expected = (c0 * params.weights[0] + c1 * params.weights[1] +
                                    c2 * params.weights[2])
                                       .rowwise() +
                                   params.biases[0].transpose();
  CHECK((forward(config, params, ops, x) - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("hidden layers apply relu, the last layer stays linear") {
  ModelConfig config;
  config.kind = ModelKind::mlp;
  config.layers = 2;
  config.hidden = 3;
  config.in_dim = 3;
  config.out_dim = 3;
  ModelState params;
  params.weights = {Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Identity(3, 3)};
  params.biases = {Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)};
  Eigen::MatrixXd x(2, 3);
  x << -1.0, 0.5, -0.25,
        2.0, -3.0, 0.0;
  const Operators ops = build_operators(generate_path(2), {ModelKind::mlp});
  const Eigen::MatrixXd out = forward(config, params, ops, x);
  CHECK((out - x.cwiseMax(0.0)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("zero parameters produce zero output") {
  ModelConfig config;
  config.kind = ModelKind::gcn;
  config.layers = 2;
  config.hidden = 4;
  config.in_dim = 3;
  config.out_dim = 2;
  ModelState params = init_params(config, InitScheme::he, 1);
  for (auto& w : params.weights) w.setZero();
  for (auto& b : params.biases) b.setZero();
  // A single, isolated node: the self-loop operator still propagates it.
  Graph lonely;
  lonely.n = 1;
  const Operators ops = build_operators(lonely, {ModelKind::gcn});
  const Eigen::MatrixXd out = forward(config, params, ops, random_matrix(1, 3, 2));
  CHECK(out.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forward rejects mismatched feature width") {
  ModelConfig config;
  config.kind = ModelKind::mlp;
  config.layers = 1;
  config.in_dim = 3;
  config.out_dim = 2;
  const ModelState params = init_params(config, InitScheme::he, 1);
  const Operators ops = build_operators(generate_path(4), {ModelKind::mlp});
  CHECK_THROWS_WITH_AS(forward(config, params, ops, random_matrix(4, 5, 1)),
                       doctest::Contains("feature width"), std::invalid_argument);
}

TEST_CASE("cross entropy of uniform logits is log(k)") {
  const Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(6, 5);
  Eigen::VectorXi labels(6);
  labels << 0, 1, 2, 3, 4, 0;
  const std::vector<bool> mask(6, true);
  CHECK(cross_entropy_loss(logits, labels, mask) ==
        doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("cross entropy of confident correct logits is near zero") {
  Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(4, 3);
  Eigen::VectorXi labels(4);
  labels << 0, 2, 1, 1;
  for (int i = 0; i < 4; ++i) logits(i, labels[i]) = 40.0;
  const std::vector<bool> mask(4, true);
  CHECK(cross_entropy_loss(logits, labels, mask) <= 1e-10);
}

TEST_CASE("masked mse averages only the selected rows") {
  Eigen::MatrixXd output(3, 1);
  output << 1.0, 2.0, 100.0;
  Eigen::VectorXd target(3);
  target << 0.0, 0.0, 0.0;
  const std::vector<bool> mask{true, true, false};
  CHECK(mse_loss(output, target, mask) == doctest::Approx(2.5));
  CHECK(mse_loss(output, target, std::vector<bool>(3, true)) ==
        doctest::Approx((1.0 + 4.0 + 10000.0) / 3.0));
}

TEST_CASE("losses validate masks and shapes") {
  const Eigen::MatrixXd output = Eigen::MatrixXd::Zero(3, 1);
  const Eigen::VectorXd target = Eigen::VectorXd::Zero(3);
  Eigen::VectorXi labels = Eigen::VectorXi::Zero(3);
  CHECK_THROWS_WITH_AS(mse_loss(output, target, std::vector<bool>(3, false)),
                       doctest::Contains("empty mask"), std::invalid_argument);
  CHECK_THROWS_AS(mse_loss(Eigen::MatrixXd::Zero(3, 2), target, std::vector<bool>(3, true)),
                  std::invalid_argument);
  labels[1] = 7;
  CHECK_THROWS_AS(cross_entropy_loss(Eigen::MatrixXd::Zero(3, 3), labels,
                                     std::vector<bool>(3, true)),
                  std::invalid_argument);
}

TEST_CASE("analytic gradients match finite differences") {
  struct Combo {
    ModelKind kind;
    LossKind loss;
  };
  // One loss per kind here; the acceptance suite sweeps the full cross
  // product.
  const Combo combos[] = {
      {ModelKind::mlp, LossKind::mse},           {ModelKind::gcn, LossKind::cross_entropy},
      {ModelKind::sgc, LossKind::cross_entropy}, {ModelKind::sage, LossKind::mse},
      {ModelKind::gin, LossKind::cross_entropy}, {ModelKind::cheb, LossKind::mse},
  };
  for (const Combo& combo : combos) {
    CAPTURE(model_kind_name(combo.kind));
    CHECK(max_rel_grad_error(combo.kind, combo.loss) <= 1e-4);
  }
}

TEST_CASE("backward is linear in the output gradient") {
  const Graph g = generate_path(6);
  const Operators ops = build_operators(g, {ModelKind::gcn});
  ModelConfig config;
  config.kind = ModelKind::gcn;
  config.layers = 2;
  config.hidden = 4;
  config.in_dim = 3;
  config.out_dim = 2;
  const ModelState params = init_params(config, InitScheme::default_uniform, 12);
  const Eigen::MatrixXd x = random_matrix(6, 3, 13);

  ForwardCache cache;
  forward(config, params, ops, x, nullptr, &cache);
  const Eigen::MatrixXd gout = random_matrix(6, 2, 14);
  const ModelState g1 = backward(config, params, ops, cache, gout);
  const ModelState g2 = backward(config, params, ops, cache, 2.0 * gout);
  for (std::size_t i = 0; i < g1.weights.size(); ++i) {
    CHECK((g2.weights[i] - 2.0 * g1.weights[i]).cwiseAbs().maxCoeff() <= 1e-12);
  }
  for (std::size_t i = 0; i < g1.biases.size(); ++i) {
    CHECK((g2.biases[i] - 2.0 * g1.biases[i]).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("adam takes a first step of magnitude ~lr and ignores zero gradients") {
  ModelState params;
  params.weights = {Eigen::MatrixXd::Constant(1, 1, 0.5)};
  AdamState adam = init_adam(params);

  ModelState grads;
  grads.weights = {Eigen::MatrixXd::Constant(1, 1, 1.0)};
  adam_step(adam, params, grads, 0.01);
  CHECK(params.weights[0](0, 0) == doctest::Approx(0.49).epsilon(1e-6));
  CHECK(adam.step == 1);

  grads.weights[0](0, 0) = 0.0;
  const double before = params.weights[0](0, 0);
  adam_step(adam, params, grads, 0.01);
  // First moment decays but v stays bounded away from 0 only through m;
  // with a zero gradient history both moments decay geometrically and the
  // parameter still moves by beta-weighted remnants of the first step.
  CHECK(adam.step == 2);
  CHECK(std::isfinite(params.weights[0](0, 0)));
  CHECK(params.weights[0](0, 0) != before);  // momentum carries over

  // A genuinely zero history never moves the parameter.
  ModelState fresh;
  fresh.weights = {Eigen::MatrixXd::Constant(1, 1, 0.5)};
  AdamState fresh_adam = init_adam(fresh);
  ModelState zero;
  zero.weights = {Eigen::MatrixXd::Zero(1, 1)};
  adam_step(fresh_adam, fresh, zero, 0.01);
  CHECK(fresh.weights[0](0, 0) == 0.5);
  CHECK(fresh_adam.step == 1);
}

TEST_CASE("adam refuses non-finite gradients") {
  ModelState params;
  params.weights = {Eigen::MatrixXd::Constant(1, 1, 0.5)};
  AdamState adam = init_adam(params);
  ModelState grads;
  grads.weights = {Eigen::MatrixXd::Constant(1, 1, std::nan(""))};
  CHECK_THROWS_WITH_AS(adam_step(adam, params, grads, 0.01),
                       doctest::Contains("non-finite gradient"), std::runtime_error);
}

TEST_CASE("cosine restart schedule hits its documented points") {
  const double base = 2e-4;
  CHECK(lr_schedule(SchedulerKind::none, 10, 123, base) == base);
  CHECK(lr_schedule(SchedulerKind::cosine_restarts, 10, 0, base) == doctest::Approx(base));
  CHECK(lr_schedule(SchedulerKind::cosine_restarts, 10, 5, base) == doctest::Approx(base / 2.0));
  CHECK(lr_schedule(SchedulerKind::cosine_restarts, 10, 10, base) == doctest::Approx(base));
  CHECK(lr_schedule(SchedulerKind::cosine_restarts, 10, 7, base) ==
        doctest::Approx(base * 0.5 * (1.0 + std::cos(M_PI * 0.7))));
  CHECK_THROWS_AS(lr_schedule(SchedulerKind::cosine_restarts, 0, 1, base),
                  std::invalid_argument);
  CHECK_THROWS_AS(lr_schedule(SchedulerKind::none, 10, -1, base), std::invalid_argument);
}

TEST_CASE("training presets match the protocol table") {
  const TrainConfig main_cfg = main_benchmark_train_config();
  CHECK(main_cfg.epochs == 500);
  CHECK(main_cfg.learning_rate == 1e-3);
  CHECK(main_cfg.scheduler == SchedulerKind::none);
  CHECK(main_cfg.init == InitScheme::default_uniform);

  const TrainConfig prelim = prelim_train_config();
  CHECK(prelim.epochs == 2000);
  CHECK(prelim.learning_rate == 2e-4);
  CHECK(prelim.scheduler == SchedulerKind::cosine_restarts);
  CHECK(prelim.scheduler_t0 == 10);
  CHECK(prelim.init == InitScheme::he);
}

TEST_CASE("training for zero epochs returns the initialization") {
  const Graph g = generate_path(12);
  const Operators ops = build_operators(g, {ModelKind::gcn});
  ModelConfig config;
  config.kind = ModelKind::gcn;
  config.layers = 2;
  config.hidden = 4;
  config.in_dim = 3;
  config.out_dim = 2;
  const Eigen::MatrixXd x = random_matrix(12, 3, 3);
  Eigen::VectorXi labels = Eigen::VectorXi::Zero(12);
  labels[3] = 1;
  std::vector<bool> mask(12, true);

  TrainConfig train = main_benchmark_train_config();
  train.epochs = 0;
  const TrainResult result = train_classifier(config, ops, x, labels, mask, train, 55);
  CHECK(result.loss_trace.empty());
  CHECK(states_equal(result.params, init_params(config, train.init, 55)));
}

TEST_CASE("training is deterministic") {
  const Graph g = generate_path(12);
  const Operators ops = build_operators(g, {ModelKind::gcn});
  ModelConfig config;
  config.kind = ModelKind::gcn;
  config.layers = 2;
  config.hidden = 4;
  config.in_dim = 3;
  config.out_dim = 2;
  const Eigen::MatrixXd x = random_matrix(12, 3, 3);
  Eigen::VectorXi labels(12);
  for (int i = 0; i < 12; ++i) labels[i] = i % 2;
  std::vector<bool> mask(12, true);

  TrainConfig train = main_benchmark_train_config();
  train.epochs = 25;
  const TrainResult a = train_classifier(config, ops, x, labels, mask, train, 55);
  const TrainResult b = train_classifier(config, ops, x, labels, mask, train, 55);
  CHECK(states_equal(a.params, b.params));
  CHECK(a.loss_trace == b.loss_trace);
  CHECK(a.loss_trace.size() == 25);

  const TrainResult c = train_classifier(config, ops, x, labels, mask, train, 56);
  CHECK_FALSE(states_equal(a.params, c.params));
}

TEST_CASE("training rejects protocol violations") {
  const Graph g = generate_path(6);
  const Operators ops = build_operators(g, {ModelKind::mlp});
  ModelConfig config;
  config.kind = ModelKind::mlp;
  config.layers = 1;
  config.in_dim = 2;
  config.out_dim = 2;
  const Eigen::MatrixXd x = random_matrix(6, 2, 1);
  const Eigen::VectorXi labels = Eigen::VectorXi::Zero(6);
  const std::vector<bool> mask(6, true);

  TrainConfig train = main_benchmark_train_config();
  train.dropout = 0.5;
  CHECK_THROWS_WITH_AS(train_classifier(config, ops, x, labels, mask, train, 1),
                       doctest::Contains("dropout"), std::invalid_argument);
  train.dropout = 0.0;
  train.learning_rate = 0.0;
  CHECK_THROWS_AS(train_classifier(config, ops, x, labels, mask, train, 1),
                  std::invalid_argument);
  train.learning_rate = 1e-3;
  train.epochs = -1;
  CHECK_THROWS_AS(train_classifier(config, ops, x, labels, mask, train, 1),
                  std::invalid_argument);
}

TEST_CASE("a linear regressor descends monotonically at a small learning rate") {
  ModelConfig config;
  config.kind = ModelKind::mlp;
  config.layers = 1;
  config.in_dim = 2;
  config.out_dim = 1;
  const Graph g = generate_path(20);
  const Operators ops = build_operators(g, {ModelKind::mlp});
  const Eigen::MatrixXd x = random_matrix(20, 2, 31);
  const Eigen::VectorXd target = x.col(0) * 0.7 - x.col(1) * 0.2;
  const std::vector<bool> mask(20, true);

  TrainConfig train = main_benchmark_train_config();
  train.epochs = 100;
  train.learning_rate = 1e-3;
  const TrainResult result = train_regressor(config, ops, x, target, mask, train, 5);
  REQUIRE(result.loss_trace.size() == 100);
  for (std::size_t i = 10; i + 1 < result.loss_trace.size(); ++i) {
    CHECK(result.loss_trace[i + 1] <= result.loss_trace[i] + 1e-12);
  }
  CHECK(result.loss_trace.back() < result.loss_trace.front());
}

TEST_CASE("an mlp fits a trivially separable task") {
  const int n = 30;
  ModelConfig config;
  config.kind = ModelKind::mlp;
  config.layers = 2;
  config.hidden = 8;
  config.in_dim = 3;
  config.out_dim = 3;
  const Graph g = generate_path(n);
  const Operators ops = build_operators(g, {ModelKind::mlp});
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, 3);
  Eigen::VectorXi labels(n);
  for (int i = 0; i < n; ++i) {
    labels[i] = i % 3;
    x(i, labels[i]) = 1.0;
  }
  const std::vector<bool> mask(n, true);

  TrainConfig train = main_benchmark_train_config();
  train.epochs = 300;
  train.learning_rate = 1e-2;
  const TrainResult result = train_classifier(config, ops, x, labels, mask, train, 4);
  CHECK(evaluate_accuracy(config, result.params, ops, x, labels, mask) == 1.0);
}

TEST_CASE("graph models are permutation equivariant") {
  const Graph g = generate_sbm({{6, 6}, 0.5, 0.2}, 3);
  REQUIRE(g.n == 12);
  Rng rng(5);
  const std::vector<int> sigma = rng.permutation(g.n);

  Graph permuted;
  permuted.n = g.n;
  for (const auto& [a, b] : g.edges) {
    int pa = sigma[static_cast<std::size_t>(a)];
    int pb = sigma[static_cast<std::size_t>(b)];
    if (pa > pb) std::swap(pa, pb);
    permuted.edges.emplace_back(pa, pb);
  }
  std::sort(permuted.edges.begin(), permuted.edges.end());

  const Eigen::MatrixXd x = random_matrix(g.n, 4, 18);
  Eigen::MatrixXd x_perm(g.n, 4);
  for (int i = 0; i < g.n; ++i) x_perm.row(sigma[static_cast<std::size_t>(i)]) = x.row(i);

  for (ModelKind kind : {ModelKind::gcn, ModelKind::sgc, ModelKind::sage, ModelKind::gin,
                         ModelKind::cheb}) {
    CAPTURE(model_kind_name(kind));
    ModelConfig config;
    config.kind = kind;
    config.layers = 2;
    config.hidden = 5;
    config.in_dim = 4;
    config.out_dim = 2;
    const ModelState params = init_params(config, InitScheme::default_uniform, 77);
    const Eigen::MatrixXd out = forward(config, params, build_operators(g, {kind}), x);
    const Eigen::MatrixXd out_perm =
        forward(config, params, build_operators(permuted, {kind}), x_perm);
    for (int i = 0; i < g.n; ++i) {
      CHECK((out_perm.row(sigma[static_cast<std::size_t>(i)]) - out.row(i))
                .cwiseAbs()
                .maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("a one-layer gcn with zero bias coincides with sgc") {
  const Graph g = generate_path(5);
  ModelConfig sgc_config;
  sgc_config.kind = ModelKind::sgc;
  sgc_config.layers = 1;
  sgc_config.in_dim = 3;
  sgc_config.out_dim = 2;
  const ModelState sgc_params = init_params(sgc_config, InitScheme::default_uniform, 9);

  ModelConfig gcn_config = sgc_config;
  gcn_config.kind = ModelKind::gcn;
  ModelState gcn_params = init_params(gcn_config, InitScheme::he, 9);
  gcn_params.weights[0] = sgc_params.weights[0];
  gcn_params.biases[0].setZero();

  const Eigen::MatrixXd x = random_matrix(5, 3, 10);
  const Eigen::MatrixXd a =
      forward(sgc_config, sgc_params, build_operators(g, {ModelKind::sgc}), x);
  const Eigen::MatrixXd b =
      forward(gcn_config, gcn_params, build_operators(g, {ModelKind::gcn}), x);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("accuracy breaks prediction ties toward the lowest class") {
  ModelConfig config;
  config.kind = ModelKind::mlp;
  config.layers = 1;
  config.in_dim = 2;
  config.out_dim = 3;
  ModelState params;
  params.weights = {Eigen::MatrixXd::Zero(2, 3)};
  params.biases = {Eigen::VectorXd::Zero(3)};
  const Operators ops = build_operators(generate_path(4), {ModelKind::mlp});
  const Eigen::MatrixXd x = random_matrix(4, 2, 1);
  Eigen::VectorXi labels(4);
  labels << 0, 1, 0, 2;  // all-zero logits predict class 0 everywhere
  CHECK(evaluate_accuracy(config, params, ops, x, labels, std::vector<bool>(4, true)) ==
        doctest::Approx(0.5));

  // A zero regressor against a unit target has MSE exactly 1.
  ModelConfig reg_config = config;
  reg_config.out_dim = 1;
  ModelState reg_params;
  reg_params.weights = {Eigen::MatrixXd::Zero(2, 1)};
  reg_params.biases = {Eigen::VectorXd::Zero(1)};
  CHECK(evaluate_mse(reg_config, reg_params, ops, x, Eigen::VectorXd::Ones(4),
                     std::vector<bool>(4, true)) == doctest::Approx(1.0));
}

TEST_CASE("checkpoints round trip parameters bit-exactly") {
  ModelConfig config;
  config.kind = ModelKind::gin;
  config.layers = 2;
  config.hidden = 4;
  config.in_dim = 3;
  config.out_dim = 2;
  ModelState params = init_params(config, InitScheme::default_uniform, 123);
  params.epsilons[0] = 0.125;

  const std::string path = testutil::scratch_file("model.ckpt.json");
  save_checkpoint(path, config, params, 0xabcdef0123456789ULL);
  const Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.config.kind == config.kind);
  CHECK(loaded.config.layers == config.layers);
  CHECK(loaded.config.hidden == config.hidden);
  CHECK(loaded.config.in_dim == config.in_dim);
  CHECK(loaded.config.out_dim == config.out_dim);
  CHECK(loaded.train_config_hash == 0xabcdef0123456789ULL);
  CHECK(states_equal(loaded.params, params));
}

TEST_CASE("checkpoints reject foreign files") {
  const std::string path = testutil::scratch_file("bogus.ckpt.json");
  testutil::write_file(path, "{\"format\": \"something\"}");
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("not a supported checkpoint"),
                       std::runtime_error);
  testutil::write_file(path, "{broken");
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("not valid JSON"),
                       std::runtime_error);
  CHECK_THROWS_AS(load_checkpoint(testutil::scratch_file("absent.ckpt.json")),
                  std::runtime_error);
}

}  // TEST_SUITE("models")
