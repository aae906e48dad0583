#include "specbench/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "specbench/hash.hpp"
#include "specbench/rng.hpp"

namespace specbench {
namespace {

[[noreturn]] void fail(const std::string& message) { throw std::runtime_error(message); }

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

// Elementwise ReLU derivative mask; the subgradient at exactly 0 is taken
// as 0.
Eigen::ArrayXXd relu_mask(const Eigen::MatrixXd& z) {
  return (z.array() > 0.0).cast<double>();
}

// Layer input/output widths: d[0] = in_dim, d[layers] = out_dim, hidden
// in between.
std::vector<int> layer_dims(const ModelConfig& config) {
  std::vector<int> dims(static_cast<std::size_t>(config.layers) + 1, config.hidden);
  dims.front() = config.in_dim;
  dims.back() = config.out_dim;
  return dims;
}

// Canonical parameter layout per kind.  init_params, forward, backward and
// the checkpoint format all rely on this one description.
//
//   mlp / gcn : weights[l] = W_l (d_l x d_{l+1}),      biases[l] = b_l
//   sgc       : weights[0] = W  (in x out),            no biases
//   sage      : weights[2l] = W_self_l, weights[2l+1] = W_nbr_l, biases[l]
//   gin       : weights[2l] = W1_l (d_l x hidden), weights[2l+1] = W2_l
//               (hidden x d_{l+1}); biases[2l] = b1_l, biases[2l+1] = b2_l;
//               epsilons[l]
//   cheb      : weights[l*order + o] = W_{l,o} (d_l x d_{l+1}), biases[l]
struct ShapeSpec {
  struct WeightShape {
    int rows = 0;
    int cols = 0;
  };
  struct BiasShape {
    int size = 0;
    int fan_in = 0;  // fan-in of the linear stage this bias belongs to
  };
  std::vector<WeightShape> weights;
  std::vector<BiasShape> biases;
  int epsilons = 0;
};

ShapeSpec shapes_for(const ModelConfig& config) {
  const std::vector<int> dims = layer_dims(config);
  ShapeSpec spec;
  switch (config.kind) {
    case ModelKind::mlp:
    case ModelKind::gcn:
      for (int l = 0; l < config.layers; ++l) {
        spec.weights.push_back({dims[static_cast<std::size_t>(l)], dims[static_cast<std::size_t>(l) + 1]});
        spec.biases.push_back({dims[static_cast<std::size_t>(l) + 1], dims[static_cast<std::size_t>(l)]});
      }
      break;
    case ModelKind::sgc:
      spec.weights.push_back({config.in_dim, config.out_dim});
      break;
    case ModelKind::sage:
      for (int l = 0; l < config.layers; ++l) {
        const int d_in = dims[static_cast<std::size_t>(l)];
        const int d_out = dims[static_cast<std::size_t>(l) + 1];
        spec.weights.push_back({d_in, d_out});  // W_self
        spec.weights.push_back({d_in, d_out});  // W_nbr
        spec.biases.push_back({d_out, d_in});
      }
      break;
    case ModelKind::gin:
      for (int l = 0; l < config.layers; ++l) {
        const int d_in = dims[static_cast<std::size_t>(l)];
        const int d_out = dims[static_cast<std::size_t>(l) + 1];
        spec.weights.push_back({d_in, config.hidden});
        spec.weights.push_back({config.hidden, d_out});
        spec.biases.push_back({config.hidden, d_in});
        spec.biases.push_back({d_out, config.hidden});
      }
      spec.epsilons = config.layers;
      break;
    case ModelKind::cheb:
      for (int l = 0; l < config.layers; ++l) {
        const int d_in = dims[static_cast<std::size_t>(l)];
        const int d_out = dims[static_cast<std::size_t>(l) + 1];
        for (int o = 0; o < config.cheb_order; ++o) spec.weights.push_back({d_in, d_out});
        spec.biases.push_back({d_out, d_in});
      }
      break;
  }
  return spec;
}

void add_bias_rowwise(Eigen::MatrixXd& z, const Eigen::VectorXd& bias) {
  z.rowwise() += bias.transpose();
}

int masked_count(const std::vector<bool>& mask) {
  return static_cast<int>(std::count(mask.begin(), mask.end(), true));
}

void require_mask(const std::vector<bool>& mask, Eigen::Index rows, const char* where) {
  if (static_cast<Eigen::Index>(mask.size()) != rows) {
    throw std::invalid_argument(std::string(where) + ": mask length does not match output rows");
  }
  if (masked_count(mask) == 0) {
    throw std::invalid_argument(std::string(where) + ": empty mask");
  }
}

}  // namespace

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::mlp: return "mlp";
    case ModelKind::gcn: return "gcn";
    case ModelKind::sgc: return "sgc";
    case ModelKind::sage: return "sage";
    case ModelKind::gin: return "gin";
    case ModelKind::cheb: return "cheb";
  }
  throw std::invalid_argument("model_kind_name: bad kind");
}

ModelKind parse_model_kind(const std::string& name) {
  for (ModelKind kind : all_model_kinds()) {
    if (model_kind_name(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown model kind '" + name + "' (expected mlp|gcn|sgc|sage|gin|cheb)");
}

const std::vector<ModelKind>& all_model_kinds() {
  static const std::vector<ModelKind> kinds = {ModelKind::mlp, ModelKind::gcn,  ModelKind::sgc,
                                               ModelKind::sage, ModelKind::gin, ModelKind::cheb};
  return kinds;
}

std::string init_scheme_name(InitScheme scheme) {
  return scheme == InitScheme::he ? "he" : "default_uniform";
}

InitScheme parse_init_scheme(const std::string& name) {
  if (name == "he") return InitScheme::he;
  if (name == "default_uniform") return InitScheme::default_uniform;
  throw std::invalid_argument("unknown init scheme '" + name + "' (expected default_uniform|he)");
}

std::string scheduler_name(SchedulerKind kind) {
  return kind == SchedulerKind::cosine_restarts ? "cosine_restarts" : "none";
}

SchedulerKind parse_scheduler(const std::string& name) {
  if (name == "none") return SchedulerKind::none;
  if (name == "cosine_restarts") return SchedulerKind::cosine_restarts;
  throw std::invalid_argument("unknown scheduler '" + name + "' (expected none|cosine_restarts)");
}

void validate_model_config(const ModelConfig& config) {
  if (config.layers < 1) throw std::invalid_argument("model config: layers must be >= 1");
  if (config.in_dim < 1) throw std::invalid_argument("model config: in_dim must be >= 1");
  if (config.out_dim < 1) throw std::invalid_argument("model config: out_dim must be >= 1");
  const bool needs_hidden = config.layers > 1 || config.kind == ModelKind::gin;
  if (needs_hidden && config.hidden < 1) {
    throw std::invalid_argument("model config: hidden must be >= 1");
  }
  if (config.kind == ModelKind::cheb && config.cheb_order < 1) {
    throw std::invalid_argument("model config: cheb_order must be >= 1");
  }
}

bool ModelState::all_finite() const {
  for (const auto& w : weights) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : biases) {
    if (!b.allFinite()) return false;
  }
  for (double e : epsilons) {
    if (!std::isfinite(e)) return false;
  }
  return true;
}

Operators build_operators(const Graph& graph, const std::vector<ModelKind>& kinds) {
  Operators ops;
  ops.n = graph.n;
  bool need_norm_adj = false, need_adj = false, need_mean = false, need_cheb = false;
  for (ModelKind kind : kinds) {
    switch (kind) {
      case ModelKind::gcn:
      case ModelKind::sgc: need_norm_adj = true; break;
      case ModelKind::gin: need_adj = true; break;
      case ModelKind::sage: need_mean = true; break;
      case ModelKind::cheb: need_cheb = true; break;
      case ModelKind::mlp: break;
    }
  }
  if (need_norm_adj) ops.norm_adj = normalized_adjacency_with_self_loops(graph);
  if (need_adj) ops.adjacency = adjacency_matrix(graph);
  if (need_mean) ops.mean_nbr = mean_neighbor_matrix(graph);
  if (need_cheb) {
    ops.cheb_shift = normalized_laplacian(graph);
    ops.cheb_shift.diagonal().array() -= 1.0;
  }
  return ops;
}

PropagatedFeatures precompute_propagated(const ModelConfig& config, const Operators& ops,
                                         const Eigen::MatrixXd& x) {
  PropagatedFeatures pre;
  switch (config.kind) {
    case ModelKind::mlp:
      break;
    case ModelKind::gcn:
      pre.mats.push_back(ops.norm_adj * x);
      break;
    case ModelKind::sgc: {
      Eigen::MatrixXd propagated = x;
      for (int l = 0; l < config.layers; ++l) propagated = ops.norm_adj * propagated;
      pre.mats.push_back(std::move(propagated));
      break;
    }
    case ModelKind::sage:
      pre.mats.push_back(ops.mean_nbr * x);
      break;
    case ModelKind::gin:
      pre.mats.push_back(ops.adjacency * x);
      break;
    case ModelKind::cheb: {
      // T_1 X .. T_{order-1} X (T_0 X = X needs no precomputation).
      if (config.cheb_order >= 2) {
        Eigen::MatrixXd prev = x;
        Eigen::MatrixXd curr = ops.cheb_shift * x;
        pre.mats.push_back(curr);
        for (int o = 2; o < config.cheb_order; ++o) {
          Eigen::MatrixXd next = 2.0 * (ops.cheb_shift * curr) - prev;
          prev = std::move(curr);
          curr = std::move(next);
          pre.mats.push_back(curr);
        }
      }
      break;
    }
  }
  return pre;
}

Eigen::MatrixXd forward(const ModelConfig& config, const ModelState& params, const Operators& ops,
                        const Eigen::MatrixXd& x, const PropagatedFeatures* pre,
                        ForwardCache* cache) {
  validate_model_config(config);
  if (x.cols() != config.in_dim) {
    throw std::invalid_argument("forward: feature width " + std::to_string(x.cols()) +
                                " does not match in_dim " + std::to_string(config.in_dim));
  }
  if (cache != nullptr) cache->layers.assign(static_cast<std::size_t>(config.layers), {});

  const int layers = config.layers;

  if (config.kind == ModelKind::sgc) {
    Eigen::MatrixXd propagated;
    if (pre != nullptr && !pre->mats.empty()) {
      propagated = pre->mats[0];
    } else {
      propagated = x;
      for (int l = 0; l < layers; ++l) propagated = ops.norm_adj * propagated;
    }
    if (cache != nullptr) {
      cache->layers.assign(1, {});
      cache->layers[0].prop_input = propagated;
    }
    return propagated * params.weights[0];
  }

  Eigen::MatrixXd h = x;
  for (int l = 0; l < layers; ++l) {
    const bool is_last = (l == layers - 1);
    const bool use_pre = (l == 0 && pre != nullptr && !pre->mats.empty());
    LayerCache* lc = cache != nullptr ? &cache->layers[static_cast<std::size_t>(l)] : nullptr;
    if (lc != nullptr) lc->input = h;
    Eigen::MatrixXd z;

    switch (config.kind) {
      case ModelKind::mlp: {
        z = h * params.weights[static_cast<std::size_t>(l)];
        add_bias_rowwise(z, params.biases[static_cast<std::size_t>(l)]);
        break;
      }
      case ModelKind::gcn: {
        Eigen::MatrixXd propagated = use_pre ? pre->mats[0] : Eigen::MatrixXd(ops.norm_adj * h);
        z = propagated * params.weights[static_cast<std::size_t>(l)];
        add_bias_rowwise(z, params.biases[static_cast<std::size_t>(l)]);
        if (lc != nullptr) lc->prop_input = std::move(propagated);
        break;
      }
      case ModelKind::sage: {
        Eigen::MatrixXd neighbor_mean = use_pre ? pre->mats[0] : Eigen::MatrixXd(ops.mean_nbr * h);
        z = h * params.weights[static_cast<std::size_t>(2 * l)] +
            neighbor_mean * params.weights[static_cast<std::size_t>(2 * l) + 1];
        add_bias_rowwise(z, params.biases[static_cast<std::size_t>(l)]);
        if (lc != nullptr) lc->prop_input = std::move(neighbor_mean);
        break;
      }
      case ModelKind::gin: {
        const double eps = params.epsilons[static_cast<std::size_t>(l)];
        Eigen::MatrixXd aggregated = use_pre ? pre->mats[0] : Eigen::MatrixXd(ops.adjacency * h);
        Eigen::MatrixXd s = (1.0 + eps) * h + aggregated;
        Eigen::MatrixXd z1 = s * params.weights[static_cast<std::size_t>(2 * l)];
        add_bias_rowwise(z1, params.biases[static_cast<std::size_t>(2 * l)]);
        Eigen::MatrixXd r = relu(z1);
        z = r * params.weights[static_cast<std::size_t>(2 * l) + 1];
        add_bias_rowwise(z, params.biases[static_cast<std::size_t>(2 * l) + 1]);
        if (lc != nullptr) {
          lc->prop_input = std::move(s);
          lc->gin_z1 = std::move(z1);
          lc->gin_relu1 = std::move(r);
        }
        break;
      }
      case ModelKind::cheb: {
        // C_0 = H, C_1 = (L-I) H, C_o = 2 (L-I) C_{o-1} - C_{o-2}.
        std::vector<Eigen::MatrixXd> terms;
        terms.reserve(static_cast<std::size_t>(config.cheb_order));
        terms.push_back(h);
        for (int o = 1; o < config.cheb_order; ++o) {
          if (use_pre && static_cast<std::size_t>(o - 1) < pre->mats.size()) {
            terms.push_back(pre->mats[static_cast<std::size_t>(o - 1)]);
          } else if (o == 1) {
            terms.push_back(ops.cheb_shift * h);
          } else {
            terms.push_back(2.0 * (ops.cheb_shift * terms[static_cast<std::size_t>(o - 1)]) -
                            terms[static_cast<std::size_t>(o - 2)]);
          }
        }
        z = terms[0] * params.weights[static_cast<std::size_t>(l * config.cheb_order)];
        for (int o = 1; o < config.cheb_order; ++o) {
          z += terms[static_cast<std::size_t>(o)] *
               params.weights[static_cast<std::size_t>(l * config.cheb_order + o)];
        }
        add_bias_rowwise(z, params.biases[static_cast<std::size_t>(l)]);
        if (lc != nullptr) lc->cheb_terms = std::move(terms);
        break;
      }
      case ModelKind::sgc:
        break;  // handled above
    }

    if (lc != nullptr) lc->preact = z;
    h = is_last ? std::move(z) : relu(z);
  }
  return h;
}

double mse_loss(const Eigen::MatrixXd& output, const Eigen::VectorXd& target,
                const std::vector<bool>& mask) {
  if (output.cols() != 1) throw std::invalid_argument("mse_loss: regression output must have 1 column");
  if (output.rows() != target.size()) throw std::invalid_argument("mse_loss: size mismatch");
  require_mask(mask, output.rows(), "mse_loss");
  double sum = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < output.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const double diff = output(i, 0) - target[i];
    sum += diff * diff;
    ++count;
  }
  return sum / count;
}

double cross_entropy_loss(const Eigen::MatrixXd& logits, const Eigen::VectorXi& labels,
                          const std::vector<bool>& mask) {
  if (logits.rows() != labels.size()) throw std::invalid_argument("cross_entropy_loss: size mismatch");
  require_mask(mask, logits.rows(), "cross_entropy_loss");
  const Eigen::Index classes = logits.cols();
  double sum = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const int label = labels[i];
    if (label < 0 || label >= classes) {
      throw std::invalid_argument("cross_entropy_loss: label " + std::to_string(label) +
                                  " out of range at row " + std::to_string(i));
    }
    const double row_max = logits.row(i).maxCoeff();
    const double lse = row_max + std::log((logits.row(i).array() - row_max).exp().sum());
    sum += lse - logits(i, label);
    ++count;
  }
  return sum / count;
}

Eigen::MatrixXd mse_loss_gradient(const Eigen::MatrixXd& output, const Eigen::VectorXd& target,
                                  const std::vector<bool>& mask) {
  if (output.cols() != 1) throw std::invalid_argument("mse_loss_gradient: output must have 1 column");
  require_mask(mask, output.rows(), "mse_loss_gradient");
  const double count = masked_count(mask);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(output.rows(), 1);
  for (Eigen::Index i = 0; i < output.rows(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) grad(i, 0) = 2.0 * (output(i, 0) - target[i]) / count;
  }
  return grad;
}

Eigen::MatrixXd cross_entropy_gradient(const Eigen::MatrixXd& logits, const Eigen::VectorXi& labels,
                                       const std::vector<bool>& mask) {
  require_mask(mask, logits.rows(), "cross_entropy_gradient");
  const double count = masked_count(mask);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const double row_max = logits.row(i).maxCoeff();
    Eigen::RowVectorXd soft = (logits.row(i).array() - row_max).exp();
    soft /= soft.sum();
    grad.row(i) = soft / count;
    grad(i, labels[i]) -= 1.0 / count;
  }
  return grad;
}

ModelState backward(const ModelConfig& config, const ModelState& params, const Operators& ops,
                    const ForwardCache& cache, const Eigen::MatrixXd& output_gradient) {
  validate_model_config(config);
  const ShapeSpec spec = shapes_for(config);
  ModelState grads;
  grads.weights.resize(spec.weights.size());
  grads.biases.resize(spec.biases.size());
  grads.epsilons.assign(static_cast<std::size_t>(spec.epsilons), 0.0);

  if (config.kind == ModelKind::sgc) {
    grads.weights[0] = cache.layers.at(0).prop_input.transpose() * output_gradient;
    return grads;
  }

  Eigen::MatrixXd g = output_gradient;
  for (int l = config.layers - 1; l >= 0; --l) {
    const LayerCache& lc = cache.layers.at(static_cast<std::size_t>(l));
    const bool is_last = (l == config.layers - 1);
    Eigen::MatrixXd gz = is_last ? g : Eigen::MatrixXd((g.array() * relu_mask(lc.preact)).matrix());

    switch (config.kind) {
      case ModelKind::mlp: {
        grads.weights[static_cast<std::size_t>(l)] = lc.input.transpose() * gz;
        grads.biases[static_cast<std::size_t>(l)] = gz.colwise().sum();
        if (l > 0) g = gz * params.weights[static_cast<std::size_t>(l)].transpose();
        break;
      }
      case ModelKind::gcn: {
        grads.weights[static_cast<std::size_t>(l)] = lc.prop_input.transpose() * gz;
        grads.biases[static_cast<std::size_t>(l)] = gz.colwise().sum();
        if (l > 0) {
          // norm_adj is symmetric, so propagating the gradient uses it as is.
          g = ops.norm_adj * (gz * params.weights[static_cast<std::size_t>(l)].transpose());
        }
        break;
      }
      case ModelKind::sage: {
        const auto ws = static_cast<std::size_t>(2 * l);
        grads.weights[ws] = lc.input.transpose() * gz;
        grads.weights[ws + 1] = lc.prop_input.transpose() * gz;
        grads.biases[static_cast<std::size_t>(l)] = gz.colwise().sum();
        if (l > 0) {
          g = gz * params.weights[ws].transpose() +
              ops.mean_nbr.transpose() * (gz * params.weights[ws + 1].transpose());
        }
        break;
      }
      case ModelKind::gin: {
        const auto ws = static_cast<std::size_t>(2 * l);
        // gz is the gradient at Z2 (outer ReLU already unwound above).
        grads.weights[ws + 1] = lc.gin_relu1.transpose() * gz;
        grads.biases[ws + 1] = gz.colwise().sum();
        Eigen::MatrixXd gr = gz * params.weights[ws + 1].transpose();
        Eigen::MatrixXd gz1 = (gr.array() * relu_mask(lc.gin_z1)).matrix();
        grads.weights[ws] = lc.prop_input.transpose() * gz1;
        grads.biases[ws] = gz1.colwise().sum();
        Eigen::MatrixXd gs = gz1 * params.weights[ws].transpose();
        grads.epsilons[static_cast<std::size_t>(l)] = (gs.array() * lc.input.array()).sum();
        if (l > 0) {
          const double eps = params.epsilons[static_cast<std::size_t>(l)];
          // adjacency is symmetric.
          g = (1.0 + eps) * gs + ops.adjacency * gs;
        }
        break;
      }
      case ModelKind::cheb: {
        grads.biases[static_cast<std::size_t>(l)] = gz.colwise().sum();
        for (int o = 0; o < config.cheb_order; ++o) {
          grads.weights[static_cast<std::size_t>(l * config.cheb_order + o)] =
              lc.cheb_terms[static_cast<std::size_t>(o)].transpose() * gz;
        }
        if (l > 0) {
          // d C_o / d H = T_o(L-I) applied on the left; L-I is symmetric, so
          // the adjoint reuses the same Chebyshev recurrence on each
          // gz * W_o^T block.
          g = gz * params.weights[static_cast<std::size_t>(l * config.cheb_order)].transpose();
          for (int o = 1; o < config.cheb_order; ++o) {
            Eigen::MatrixXd block =
                gz * params.weights[static_cast<std::size_t>(l * config.cheb_order + o)].transpose();
            Eigen::MatrixXd prev = block;
            Eigen::MatrixXd curr = ops.cheb_shift * block;
            for (int j = 2; j <= o; ++j) {
              Eigen::MatrixXd next = 2.0 * (ops.cheb_shift * curr) - prev;
              prev = std::move(curr);
              curr = std::move(next);
            }
            g += curr;
          }
        }
        break;
      }
      case ModelKind::sgc:
        break;  // handled above
    }
  }
  return grads;
}

ModelState init_params(const ModelConfig& config, InitScheme scheme, std::uint64_t seed) {
  validate_model_config(config);
  const ShapeSpec spec = shapes_for(config);
  Rng rng(seed);

  ModelState state;
  state.weights.reserve(spec.weights.size());
  for (const auto& shape : spec.weights) {
    Eigen::MatrixXd w(shape.rows, shape.cols);
    if (scheme == InitScheme::he) {
      const double stddev = std::sqrt(2.0 / shape.rows);
      for (int r = 0; r < shape.rows; ++r) {
        for (int c = 0; c < shape.cols; ++c) w(r, c) = rng.normal(0.0, stddev);
      }
    } else {
      const double bound = 1.0 / std::sqrt(static_cast<double>(shape.rows));
      for (int r = 0; r < shape.rows; ++r) {
        for (int c = 0; c < shape.cols; ++c) w(r, c) = rng.uniform(-bound, bound);
      }
    }
    state.weights.push_back(std::move(w));
  }
  state.biases.reserve(spec.biases.size());
  for (const auto& shape : spec.biases) {
    Eigen::VectorXd b(shape.size);
    if (scheme == InitScheme::he) {
      b.setZero();
    } else {
      const double bound = 1.0 / std::sqrt(static_cast<double>(shape.fan_in));
      for (int i = 0; i < shape.size; ++i) b[i] = rng.uniform(-bound, bound);
    }
    state.biases.push_back(std::move(b));
  }
  state.epsilons.assign(static_cast<std::size_t>(spec.epsilons), 0.0);
  return state;
}

AdamState init_adam(const ModelState& params) {
  AdamState state;
  auto zero_like = [](const ModelState& src) {
    ModelState zero;
    zero.weights.reserve(src.weights.size());
    for (const auto& w : src.weights) zero.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    zero.biases.reserve(src.biases.size());
    for (const auto& b : src.biases) zero.biases.push_back(Eigen::VectorXd::Zero(b.size()));
    zero.epsilons.assign(src.epsilons.size(), 0.0);
    return zero;
  };
  state.first_moment = zero_like(params);
  state.second_moment = zero_like(params);
  return state;
}

void adam_step(AdamState& state, ModelState& params, const ModelState& grads, double lr,
               const AdamConfig& config) {
  if (!grads.all_finite()) {
    fail("adam_step: non-finite gradient at step " + std::to_string(state.step + 1));
  }
  state.step += 1;
  const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));

  auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = (config.beta2 * v.array() + (1.0 - config.beta2) * g.array().square()).matrix();
    p -= (lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + config.eps)).matrix();
  };
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    update(params.weights[i], state.first_moment.weights[i], state.second_moment.weights[i],
           grads.weights[i]);
  }
  for (std::size_t i = 0; i < params.biases.size(); ++i) {
    update(params.biases[i], state.first_moment.biases[i], state.second_moment.biases[i],
           grads.biases[i]);
  }
  for (std::size_t i = 0; i < params.epsilons.size(); ++i) {
    double& m = state.first_moment.epsilons[i];
    double& v = state.second_moment.epsilons[i];
    const double g = grads.epsilons[i];
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g * g;
    params.epsilons[i] -= lr * (m / bias1) / (std::sqrt(v / bias2) + config.eps);
  }
}

double lr_schedule(SchedulerKind kind, int t0, int epoch, double base_lr) {
  if (epoch < 0) throw std::invalid_argument("lr_schedule: negative epoch");
  if (kind == SchedulerKind::none) return base_lr;
  if (t0 < 1) throw std::invalid_argument("lr_schedule: cosine_restarts needs t0 >= 1");
  const int t = epoch % t0;
  return 0.5 * base_lr * (1.0 + std::cos(3.14159265358979323846 * static_cast<double>(t) / t0));
}

TrainConfig main_benchmark_train_config() {
  TrainConfig config;
  config.epochs = 500;
  config.learning_rate = 1e-3;
  config.scheduler = SchedulerKind::none;
  config.init = InitScheme::default_uniform;
  return config;
}

TrainConfig prelim_train_config() {
  TrainConfig config;
  config.epochs = 2000;
  config.learning_rate = 2e-4;
  config.scheduler = SchedulerKind::cosine_restarts;
  config.scheduler_t0 = 10;
  config.init = InitScheme::he;
  return config;
}

namespace {

TrainResult train_core(const ModelConfig& config, const Operators& ops, const Eigen::MatrixXd& x,
                       LossKind loss_kind, const Eigen::VectorXi* labels,
                       const Eigen::VectorXd* target, const std::vector<bool>& train_mask,
                       const TrainConfig& train, std::uint64_t seed, const PropagatedFeatures* pre) {
  if (train.epochs < 0) throw std::invalid_argument("train: negative epoch count");
  if (train.dropout != 0.0) {
    throw std::invalid_argument("train: the protocol fixes dropout at 0; other values are not implemented");
  }
  if (!(train.learning_rate > 0.0)) throw std::invalid_argument("train: learning rate must be positive");

  TrainResult result;
  result.params = init_params(config, train.init, seed);
  AdamState adam = init_adam(result.params);
  result.loss_trace.reserve(static_cast<std::size_t>(train.epochs));

  ForwardCache cache;
  for (int epoch = 0; epoch < train.epochs; ++epoch) {
    const Eigen::MatrixXd output = forward(config, result.params, ops, x, pre, &cache);
    double loss = 0.0;
    Eigen::MatrixXd output_grad;
    if (loss_kind == LossKind::cross_entropy) {
      loss = cross_entropy_loss(output, *labels, train_mask);
      output_grad = cross_entropy_gradient(output, *labels, train_mask);
    } else {
      loss = mse_loss(output, *target, train_mask);
      output_grad = mse_loss_gradient(output, *target, train_mask);
    }
    if (!std::isfinite(loss)) {
      fail("train: loss diverged to a non-finite value at epoch " + std::to_string(epoch) +
           " (model " + model_kind_name(config.kind) + ", lr " + std::to_string(train.learning_rate) + ")");
    }
    result.loss_trace.push_back(loss);

    const ModelState grads = backward(config, result.params, ops, cache, output_grad);
    const double lr = lr_schedule(train.scheduler, train.scheduler_t0, epoch, train.learning_rate);
    adam_step(adam, result.params, grads, lr, train.adam);
  }
  return result;
}

}  // namespace

TrainResult train_classifier(const ModelConfig& config, const Operators& ops,
                             const Eigen::MatrixXd& x, const Eigen::VectorXi& labels,
                             const std::vector<bool>& train_mask, const TrainConfig& train,
                             std::uint64_t seed, const PropagatedFeatures* pre) {
  return train_core(config, ops, x, LossKind::cross_entropy, &labels, nullptr, train_mask, train,
                    seed, pre);
}

TrainResult train_regressor(const ModelConfig& config, const Operators& ops,
                            const Eigen::MatrixXd& x, const Eigen::VectorXd& target,
                            const std::vector<bool>& train_mask, const TrainConfig& train,
                            std::uint64_t seed, const PropagatedFeatures* pre) {
  return train_core(config, ops, x, LossKind::mse, nullptr, &target, train_mask, train, seed, pre);
}

double evaluate_accuracy(const ModelConfig& config, const ModelState& params, const Operators& ops,
                         const Eigen::MatrixXd& x, const Eigen::VectorXi& labels,
                         const std::vector<bool>& mask, const PropagatedFeatures* pre) {
  const Eigen::MatrixXd logits = forward(config, params, ops, x, pre);
  require_mask(mask, logits.rows(), "evaluate_accuracy");
  int correct = 0;
  int total = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    // Strict comparison keeps the lowest index on ties.
    int best_class = 0;
    double best_value = logits(i, 0);
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(i, c) > best_value) {
        best_value = logits(i, c);
        best_class = static_cast<int>(c);
      }
    }
    if (best_class == labels[i]) ++correct;
    ++total;
  }
  return static_cast<double>(correct) / total;
}

double evaluate_mse(const ModelConfig& config, const ModelState& params, const Operators& ops,
                    const Eigen::MatrixXd& x, const Eigen::VectorXd& target,
                    const std::vector<bool>& mask, const PropagatedFeatures* pre) {
  const Eigen::MatrixXd output = forward(config, params, ops, x, pre);
  return mse_loss(output, target, mask);
}

void save_checkpoint(const std::string& path, const ModelConfig& config, const ModelState& params,
                     std::uint64_t train_config_hash) {
  nlohmann::json doc;
  doc["format"] = "specbench-checkpoint";
  doc["version"] = 1;
  doc["config"] = {{"kind", model_kind_name(config.kind)}, {"layers", config.layers},
                   {"hidden", config.hidden},             {"in_dim", config.in_dim},
                   {"out_dim", config.out_dim},           {"cheb_order", config.cheb_order}};
  doc["train_config_hash"] = hash_hex(train_config_hash);
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& w : params.weights) {
    weights.push_back({{"rows", w.rows()},
                       {"cols", w.cols()},
                       {"data", std::vector<double>(w.data(), w.data() + w.size())}});
  }
  doc["weights"] = std::move(weights);
  nlohmann::json biases = nlohmann::json::array();
  for (const auto& b : params.biases) {
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  doc["biases"] = std::move(biases);
  doc["epsilons"] = params.epsilons;

  std::ofstream out(path);
  if (!out) fail("cannot write checkpoint '" + path + "'");
  out << doc.dump(2) << "\n";
  if (!out) fail("failed while writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open checkpoint '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
  if (doc.value("format", "") != "specbench-checkpoint" || doc.value("version", -1) != 1) {
    fail("'" + path + "' is not a supported checkpoint file");
  }
  Checkpoint ckpt;
  const auto& cfg = doc.at("config");
  ckpt.config.kind = parse_model_kind(cfg.at("kind").get<std::string>());
  ckpt.config.layers = cfg.at("layers").get<int>();
  ckpt.config.hidden = cfg.at("hidden").get<int>();
  ckpt.config.in_dim = cfg.at("in_dim").get<int>();
  ckpt.config.out_dim = cfg.at("out_dim").get<int>();
  ckpt.config.cheb_order = cfg.at("cheb_order").get<int>();
  ckpt.train_config_hash = std::stoull(doc.at("train_config_hash").get<std::string>(), nullptr, 16);
  for (const auto& w : doc.at("weights")) {
    const auto rows = w.at("rows").get<Eigen::Index>();
    const auto cols = w.at("cols").get<Eigen::Index>();
    const auto data = w.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
      fail("checkpoint '" + path + "' has a malformed weight block");
    }
    Eigen::MatrixXd mat(rows, cols);
    std::copy(data.begin(), data.end(), mat.data());
    ckpt.params.weights.push_back(std::move(mat));
  }
  for (const auto& b : doc.at("biases")) {
    const auto data = b.get<std::vector<double>>();
    ckpt.params.biases.push_back(
        Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<Eigen::Index>(data.size())));
  }
  ckpt.params.epsilons = doc.at("epsilons").get<std::vector<double>>();
  return ckpt;
}

}  // namespace specbench
