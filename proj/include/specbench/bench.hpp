#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "specbench/graph.hpp"
#include "specbench/models.hpp"
#include "specbench/spectral.hpp"
#include "specbench/tasks.hpp"
#include "specbench/theory.hpp"

namespace specbench {

// A graph ready for the protocol: decomposed and binned once, shared by
// every sweep cell.
struct Dataset {
  std::string name;
  Graph graph;
  SpectralBasis basis;
  SpectralBins bins;
};

Dataset make_dataset(std::string name, Graph graph, double bin_width = 0.1);

// Everything the sweep needs beyond the dataset and model list.  Defaults
// follow the main-benchmark protocol column.
struct ProtocolConfig {
  double bin_width = 0.1;
  int num_classes = 5;
  DiscretizeMode mode = DiscretizeMode::maxabs_rescale;
  int runs = 3;
  std::uint64_t base_seed = 42;
  int layers = 2;
  int hidden = 64;
  int cheb_order = 2;
  TrainConfig train = main_benchmark_train_config();
  int threads = 0;  // 0 = one worker per hardware thread
};

// Hash covering the protocol, the model list, and the datasets (by content
// hash); embedded in every artifact so results can be traced to the exact
// configuration that produced them.
std::uint64_t protocol_config_hash(const ProtocolConfig& protocol,
                                   const std::vector<ModelKind>& models,
                                   const std::vector<Dataset>& datasets);

// One sweep cell.  `test_accuracy` is NaN when the cell was skipped; the
// reason then appears in `flags` (and `error` for training failures).
struct RunRecord {
  std::string dataset;
  std::string model;
  int bin_index = -1;
  double bin_center = 0.0;
  int run = -1;
  std::uint64_t seed = 0;
  double test_accuracy = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> flags;
  std::string error;
  std::uint64_t config_hash = 0;

  bool skipped() const;
};

// Append-only results container, serialized as one JSON object per line with
// a schema-versioned header line in front.
struct ResultsStore {
  std::uint64_t config_hash = 0;
  std::string tool;
  std::vector<RunRecord> records;
};

void write_store(const ResultsStore& store, const std::string& path);
ResultsStore read_store(const std::string& path);

// Full protocol sweep: for every (dataset, model, non-empty bin, run) cell,
// build the bin's classification task, train, and evaluate test accuracy.
// Degenerate bins and training failures produce flagged skip records, so the
// store always holds |datasets| x |models| x |non-empty bins| x runs lines.
ResultsStore run_benchmark(const std::vector<Dataset>& datasets,
                           const std::vector<ModelKind>& models, const ProtocolConfig& protocol);

// Per-bin test-accuracy statistics over runs for one (dataset, model) pair.
// Bins whose every run was skipped are omitted from the points and listed in
// `skipped_bins` (they render as curve gaps).
struct AccuracyCurve {
  std::string dataset;
  std::string model;
  int runs = 0;
  std::vector<int> bin_indices;
  std::vector<double> bin_centers;
  std::vector<double> mean_acc;
  std::vector<double> std_acc;  // population std over runs
  std::vector<int> skipped_bins;
};

AccuracyCurve accuracy_curve(const ResultsStore& store, const std::string& model,
                             const std::string& dataset);

// Normalized area under the accuracy curve: the trapezoidal integral of the
// mean accuracy over the selected bin centers divided by the integral of the
// constant-1 curve over the same centers.
struct AUACScore {
  std::string dataset;
  std::string model;
  RangeTag range = RangeTag::full;
  double value = 0.0;
};

// `range` selects all points (full) or a contiguous third of the curve's
// points (low/mid/high; remainders go to the later thirds).  Needs at least
// two points in the selected range.
AUACScore normalized_auac(const AccuracyCurve& curve, RangeTag range);

// Per-dataset model ranking by descending score (rank 1 = best); tied scores
// share the mean of the positions they occupy.  `models` is ordered by
// ascending average rank (ties broken by name).
struct RankingTable {
  std::vector<std::string> models;
  std::vector<std::string> datasets;
  Eigen::MatrixXd ranks;          // models x datasets
  std::vector<double> avg_rank;
  std::vector<double> std_rank;   // population std across datasets
  RangeTag range = RangeTag::full;
};

// Requires exactly one score per (model, dataset) pair, all with the same
// range tag.
RankingTable rank_models(const std::vector<AUACScore>& scores);

// Number of item pairs ordered oppositely by the two rankings.  Both
// arguments must be permutations of the same item set.
int kendall_tau_distance(const std::vector<std::string>& r1, const std::vector<std::string>& r2);
int kendall_tau_distance(const std::vector<int>& r1, const std::vector<int>& r2);

// Distance divided by the pair count m(m-1)/2 (0 when m < 2).
double normalized_kendall_tau(const std::vector<std::string>& r1,
                              const std::vector<std::string>& r2);

// Exploratory frequency-recovery experiment: train a model to map bin-mean
// signals of one frequency third onto the mean signal of the opposite third,
// then compare where input, target, and (destandardized) output live in the
// spectrum.
enum class RecoveryDirection { low_to_high, high_to_low };

std::string direction_name(RecoveryDirection direction);
RecoveryDirection parse_direction(const std::string& name);

struct RecoveryConfig {
  ModelKind model = ModelKind::gcn;
  RecoveryDirection direction = RecoveryDirection::low_to_high;
  int layers = 3;
  int hidden = 64;
  int cheb_order = 2;
  TrainConfig train = prelim_train_config();
  std::uint64_t seed = 7;
};

struct EnergyComparison {
  std::string dataset;
  std::string model;
  std::string direction;
  std::vector<double> bin_centers;   // every bin, empty ones included
  Eigen::VectorXd input_energy;      // binned energy of the mean input column
  Eigen::VectorXd target_energy;     // binned energy of the raw target
  Eigen::VectorXd output_energy;     // binned energy of the destandardized output
  double final_train_loss = 0.0;
  std::string notes;                 // records which signals the rows describe
};

EnergyComparison run_frequency_recovery(const Dataset& dataset, const RecoveryConfig& config);

// Depth study: the benchmark sweep repeated with the layer count overridden
// per depth; curves grouped for comparison.
struct ParameterStudyResult {
  std::vector<int> depths;
  std::vector<ResultsStore> stores;                 // one per depth
  std::vector<std::vector<AccuracyCurve>> curves;   // [depth][model]
};

ParameterStudyResult run_parameter_study(const Dataset& dataset,
                                         const std::vector<ModelKind>& models,
                                         const std::vector<int>& depths,
                                         const ProtocolConfig& protocol);

// Which frequency third carries most of the energy of the training-node
// label signal.  The signal is the one-hot label matrix with off-train rows
// zeroed; each class column is projected onto the eigenbasis and the squared
// projections are summed across columns into one per-frequency energy vector
// (normalized to sum 1).  Used to place a labeled dataset in the spectrum
// before comparing rankings.
struct LabelRangeReport {
  RangeTag range = RangeTag::low;
  double low_energy = 0.0;
  double mid_energy = 0.0;
  double high_energy = 0.0;
  std::string signal;  // provenance note for the signal definition
};

LabelRangeReport dominant_label_range(const Dataset& dataset, const Eigen::VectorXi& labels,
                                      const std::vector<bool>& train_mask);

// Runs fn(i) for i in [0, total) on `threads` workers (<= 1 runs inline).
// Callers write results into index-addressed slots, so scheduling never
// affects output bytes.
void parallel_for(int total, int threads, const std::function<void(int)>& fn);

}  // namespace specbench
