#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "specbench/graph.hpp"

namespace specbench {

enum class ModelKind { mlp, gcn, sgc, sage, gin, cheb };

std::string model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);
const std::vector<ModelKind>& all_model_kinds();

enum class InitScheme { default_uniform, he };
enum class SchedulerKind { none, cosine_restarts };
enum class LossKind { mse, cross_entropy };

std::string init_scheme_name(InitScheme scheme);
InitScheme parse_init_scheme(const std::string& name);
std::string scheduler_name(SchedulerKind kind);
SchedulerKind parse_scheduler(const std::string& name);

struct ModelConfig {
  ModelKind kind = ModelKind::gcn;
  int layers = 2;      // number of model layers (weighted stages)
  int hidden = 64;     // width of hidden layers and of GIN's internal MLP
  int in_dim = 0;
  int out_dim = 0;
  int cheb_order = 2;  // Chebyshev polynomial terms per layer
};

void validate_model_config(const ModelConfig& config);

// Flat parameter container.  The per-kind layout (which index holds which
// layer's matrix) is fixed by init_params/forward/backward in models.cpp;
// gradients and Adam moments reuse the same shape.
struct ModelState {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::vector<double> epsilons;  // GIN's per-layer trainable epsilon

  bool all_finite() const;
};

// Dense propagation operators shared read-only by every run on a graph.
// Only the matrices required by `kinds` are materialized (they are n x n
// each, which adds up at the size cap).
struct Operators {
  int n = 0;
  Eigen::MatrixXd norm_adj;    // D_hat^{-1/2} (A+I) D_hat^{-1/2}: gcn, sgc
  Eigen::MatrixXd adjacency;   // A: gin (sum over neighbors)
  Eigen::MatrixXd mean_nbr;    // D^{-1} A: sage
  Eigen::MatrixXd cheb_shift;  // L - I, spectrum shifted into [-1, 1]: cheb
};

Operators build_operators(const Graph& graph, const std::vector<ModelKind>& kinds);

// Layer-0 propagation products P*X.  X never changes during training, so
// these are computed once per (graph, kind, depth) and shared across every
// epoch and run; they dominate the per-epoch cost otherwise.
struct PropagatedFeatures {
  std::vector<Eigen::MatrixXd> mats;
};

PropagatedFeatures precompute_propagated(const ModelConfig& config, const Operators& ops,
                                         const Eigen::MatrixXd& x);

// Intermediates captured by forward for the exact backward pass.
struct LayerCache {
  Eigen::MatrixXd input;       // H_l
  Eigen::MatrixXd prop_input;  // P H_l (gcn/sage/sgc) or (1+eps)H + AH (gin)
  Eigen::MatrixXd preact;      // pre-activation of the layer output
  Eigen::MatrixXd gin_z1;      // GIN inner MLP pre-activation
  Eigen::MatrixXd gin_relu1;   // GIN inner MLP hidden activation
  std::vector<Eigen::MatrixXd> cheb_terms;  // T_o(L-I) H_l per order
};

struct ForwardCache {
  std::vector<LayerCache> layers;
};

// Runs the model; `pre` (optional) supplies the cached layer-0 propagation,
// `cache` (optional) collects intermediates for backward.
Eigen::MatrixXd forward(const ModelConfig& config, const ModelState& params, const Operators& ops,
                        const Eigen::MatrixXd& x, const PropagatedFeatures* pre = nullptr,
                        ForwardCache* cache = nullptr);

// Masked losses (mean over the masked nodes) and their output gradients.
double mse_loss(const Eigen::MatrixXd& output, const Eigen::VectorXd& target,
                const std::vector<bool>& mask);
double cross_entropy_loss(const Eigen::MatrixXd& logits, const Eigen::VectorXi& labels,
                          const std::vector<bool>& mask);
Eigen::MatrixXd mse_loss_gradient(const Eigen::MatrixXd& output, const Eigen::VectorXd& target,
                                  const std::vector<bool>& mask);
Eigen::MatrixXd cross_entropy_gradient(const Eigen::MatrixXd& logits, const Eigen::VectorXi& labels,
                                       const std::vector<bool>& mask);

// Exact gradients of the masked loss w.r.t. every parameter, given the
// forward cache and dLoss/dOutput.  Returns a ModelState-shaped container.
ModelState backward(const ModelConfig& config, const ModelState& params, const Operators& ops,
                    const ForwardCache& cache, const Eigen::MatrixXd& output_gradient);

// he: weights ~ Normal(0, sqrt(2/fan_in)), biases 0.
// default_uniform: weights and biases ~ Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)).
// GIN epsilons start at 0 under both schemes.  Deterministic per seed.
ModelState init_params(const ModelConfig& config, InitScheme scheme, std::uint64_t seed);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  ModelState first_moment;
  ModelState second_moment;
  long long step = 0;
};

AdamState init_adam(const ModelState& params);

// One bias-corrected Adam update, in place.  Throws on non-finite gradients.
void adam_step(AdamState& state, ModelState& params, const ModelState& grads, double lr,
               const AdamConfig& config = {});

// none: constant.  cosine_restarts: half-cosine decay restarting every t0
// epochs, lr = base/2 * (1 + cos(pi * (epoch mod t0) / t0)).
double lr_schedule(SchedulerKind kind, int t0, int epoch, double base_lr);

struct TrainConfig {
  int epochs = 500;
  double learning_rate = 1e-3;
  SchedulerKind scheduler = SchedulerKind::none;
  int scheduler_t0 = 10;
  InitScheme init = InitScheme::default_uniform;
  double dropout = 0.0;  // protocol fixes dropout at 0; only 0 is accepted
  AdamConfig adam;
};

// Benchmark-protocol presets: the per-bin classification sweep and the
// exploratory regression study.
TrainConfig main_benchmark_train_config();  // 500 epochs, lr 1e-3, no scheduler, uniform init
TrainConfig prelim_train_config();          // 2000 epochs, lr 2e-4, cosine restarts, He init

struct TrainResult {
  ModelState params;
  std::vector<double> loss_trace;  // loss at the start of each epoch
};

// Full-batch training on the train mask; no early stopping, final-epoch
// parameters returned.  Deterministic per (config, inputs, seed).
TrainResult train_classifier(const ModelConfig& config, const Operators& ops,
                             const Eigen::MatrixXd& x, const Eigen::VectorXi& labels,
                             const std::vector<bool>& train_mask, const TrainConfig& train,
                             std::uint64_t seed, const PropagatedFeatures* pre = nullptr);
TrainResult train_regressor(const ModelConfig& config, const Operators& ops,
                            const Eigen::MatrixXd& x, const Eigen::VectorXd& target,
                            const std::vector<bool>& train_mask, const TrainConfig& train,
                            std::uint64_t seed, const PropagatedFeatures* pre = nullptr);

// Argmax accuracy (ties to the lowest class index) / MSE over a mask.
double evaluate_accuracy(const ModelConfig& config, const ModelState& params, const Operators& ops,
                         const Eigen::MatrixXd& x, const Eigen::VectorXi& labels,
                         const std::vector<bool>& mask, const PropagatedFeatures* pre = nullptr);
double evaluate_mse(const ModelConfig& config, const ModelState& params, const Operators& ops,
                    const Eigen::MatrixXd& x, const Eigen::VectorXd& target,
                    const std::vector<bool>& mask, const PropagatedFeatures* pre = nullptr);

// Versioned JSON checkpoint of config + parameters + the hash of the train
// config that produced them.
void save_checkpoint(const std::string& path, const ModelConfig& config, const ModelState& params,
                     std::uint64_t train_config_hash);
struct Checkpoint {
  ModelConfig config;
  ModelState params;
  std::uint64_t train_config_hash = 0;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace specbench
