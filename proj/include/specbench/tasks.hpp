#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "specbench/graph.hpp"
#include "specbench/spectral.hpp"
#include "specbench/theory.hpp"

namespace specbench {

struct SplitFractions {
  double train = 0.0;
  double val = 0.0;
  double test = 0.0;
};

// Benchmark split from the main protocol, and the exploratory-study split.
// The latter preserves the stated 4:1:1 train/val/test ratio.
inline constexpr SplitFractions kMainSplit{0.6, 0.2, 0.2};
inline constexpr SplitFractions kPrelimSplit{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0};

// Transductive node split: three disjoint masks covering all n nodes.
struct SplitMasks {
  std::vector<bool> train;
  std::vector<bool> val;
  std::vector<bool> test;
  std::uint64_t seed = 0;

  int n() const { return static_cast<int>(train.size()); }
};

int mask_count(const std::vector<bool>& mask);

// Shuffles 0..n-1 with the seeded generator, then assigns the first
// floor(train*n) nodes to train, the next floor(val*n) to val, and the rest
// to test.  Errors if any mask comes out empty.
SplitMasks make_splits(int n, SplitFractions fractions, std::uint64_t seed);

// Mean/scale pair recorded with every standardized signal so outputs can be
// mapped back to the original units (needed for energy plots).
struct Standardization {
  double mean = 0.0;
  double scale = 1.0;
};

// Subtracts the mean and divides by the population standard deviation,
// computed over all nodes (transductive setting: features and targets are
// visible everywhere, so no train-only statistics).  Errors on a
// near-constant input.
std::pair<Eigen::VectorXd, Standardization> standardize(const Eigen::VectorXd& x);

Eigen::VectorXd destandardize(const Eigen::VectorXd& x, const Standardization& stats);

// Column-wise standardization.  When `allow_constant_columns` is set,
// near-constant columns are centered but left unscaled (scale 1) instead of
// raising; dataset feature matrices routinely contain constant columns.
std::pair<Eigen::MatrixXd, std::vector<Standardization>> standardize_columns(
    const Eigen::MatrixXd& x, bool allow_constant_columns = false,
    std::vector<std::string>* warnings = nullptr);

// Exploratory regression task: predict the mean eigenvector signal of one
// frequency range from the bin-mean signals of disjoint ranges.
struct RegressionTask {
  Eigen::MatrixXd features;       // standardized, n x B
  Eigen::MatrixXd features_raw;   // bin-mean columns before standardization
  Eigen::VectorXd target;         // standardized
  Eigen::VectorXd target_raw;
  Standardization target_stats;
  std::vector<Standardization> feature_stats;
  std::vector<int> input_bins;    // bin indices feeding feature columns
  std::vector<int> target_bins;
  std::vector<RangeTag> input_range;
  RangeTag target_range = RangeTag::high;
  SplitMasks masks;
};

RegressionTask make_regression_task(const SpectralBins& bins, const FrequencyRanges& ranges,
                                    const std::vector<RangeTag>& input_range, RangeTag target_range,
                                    std::uint64_t seed);

// Per-bin classification task: labels discretize the bin-mean eigenvector of
// one bin; features are the (standardized) dataset features, falling back to
// the identity matrix when the graph ships none.
struct ClassificationTask {
  Eigen::MatrixXd features;       // standardized, n x F
  NCLMatrix labels;
  int bin_index = -1;
  SplitMasks masks;
  bool degenerate = false;        // all nodes in one class
  std::vector<std::string> warnings;
};

ClassificationTask make_classification_task(const Graph& graph, const SpectralBins& bins,
                                            int bin_index, int num_classes, DiscretizeMode mode,
                                            std::uint64_t seed);

// Manifest records for the synth subcommand: enough provenance to rebuild
// or audit a task without rerunning it.
nlohmann::json classification_manifest(const ClassificationTask& task, std::uint64_t graph_hash,
                                       int num_classes, DiscretizeMode mode,
                                       SplitFractions fractions);
nlohmann::json regression_manifest(const RegressionTask& task, std::uint64_t graph_hash,
                                   SplitFractions fractions);

}  // namespace specbench
