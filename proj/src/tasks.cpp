#include "specbench/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "specbench/hash.hpp"
#include "specbench/rng.hpp"

namespace specbench {
namespace {

constexpr double kScaleFloor = 1e-12;

void append_range_bins(const FrequencyRanges& ranges, RangeTag tag, std::vector<int>& out) {
  const std::vector<int>& bins = ranges.of(tag);
  out.insert(out.end(), bins.begin(), bins.end());
}

}  // namespace

int mask_count(const std::vector<bool>& mask) {
  return static_cast<int>(std::count(mask.begin(), mask.end(), true));
}

SplitMasks make_splits(int n, SplitFractions fractions, std::uint64_t seed) {
  if (n < 3) throw std::invalid_argument("make_splits: need at least 3 nodes for 3 masks");
  for (double f : {fractions.train, fractions.val, fractions.test}) {
    if (!(f > 0.0)) throw std::invalid_argument("make_splits: fractions must be positive");
  }
  const double sum = fractions.train + fractions.val + fractions.test;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("make_splits: fractions must sum to 1, got " + std::to_string(sum));
  }

  Rng rng(seed);
  const std::vector<int> perm = rng.permutation(n);

  const int train_size = static_cast<int>(std::floor(fractions.train * n));
  const int val_size = static_cast<int>(std::floor(fractions.val * n));
  const int test_size = n - train_size - val_size;
  if (train_size == 0 || val_size == 0 || test_size <= 0) {
    throw std::invalid_argument("make_splits: a mask is empty at n=" + std::to_string(n));
  }

  SplitMasks masks;
  masks.seed = seed;
  masks.train.assign(static_cast<std::size_t>(n), false);
  masks.val.assign(static_cast<std::size_t>(n), false);
  masks.test.assign(static_cast<std::size_t>(n), false);
  for (int i = 0; i < train_size; ++i) masks.train[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = true;
  for (int i = train_size; i < train_size + val_size; ++i) {
    masks.val[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = true;
  }
  for (int i = train_size + val_size; i < n; ++i) {
    masks.test[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = true;
  }
  return masks;
}

std::pair<Eigen::VectorXd, Standardization> standardize(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n == 0) throw std::invalid_argument("standardize: empty vector");
  Standardization stats;
  stats.mean = x.mean();
  stats.scale = std::sqrt((x.array() - stats.mean).square().sum() / static_cast<double>(n));
  if (!(stats.scale > kScaleFloor)) {
    throw std::invalid_argument("standardize: near-constant input (scale " +
                                std::to_string(stats.scale) + ")");
  }
  return {(x.array() - stats.mean) / stats.scale, stats};
}

Eigen::VectorXd destandardize(const Eigen::VectorXd& x, const Standardization& stats) {
  return (x.array() * stats.scale + stats.mean).matrix();
}

std::pair<Eigen::MatrixXd, std::vector<Standardization>> standardize_columns(
    const Eigen::MatrixXd& x, bool allow_constant_columns, std::vector<std::string>* warnings) {
  const Eigen::Index n = x.rows();
  if (n == 0 || x.cols() == 0) throw std::invalid_argument("standardize_columns: empty matrix");

  Eigen::MatrixXd out(n, x.cols());
  std::vector<Standardization> stats(static_cast<std::size_t>(x.cols()));
  int constant_columns = 0;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    Standardization s;
    s.mean = x.col(c).mean();
    s.scale = std::sqrt((x.col(c).array() - s.mean).square().sum() / static_cast<double>(n));
    if (!(s.scale > kScaleFloor)) {
      if (!allow_constant_columns) {
        throw std::invalid_argument("standardize_columns: column " + std::to_string(c) +
                                    " is near-constant");
      }
      s.scale = 1.0;  // center only
      ++constant_columns;
    }
    out.col(c) = (x.col(c).array() - s.mean) / s.scale;
    stats[static_cast<std::size_t>(c)] = s;
  }
  if (constant_columns > 0 && warnings != nullptr) {
    warnings->push_back(std::to_string(constant_columns) +
                        " near-constant feature column(s) centered but not scaled");
  }
  return {std::move(out), std::move(stats)};
}

RegressionTask make_regression_task(const SpectralBins& bins, const FrequencyRanges& ranges,
                                    const std::vector<RangeTag>& input_range, RangeTag target_range,
                                    std::uint64_t seed) {
  if (input_range.empty()) throw std::invalid_argument("make_regression_task: no input range given");
  if (target_range == RangeTag::full) {
    throw std::invalid_argument("make_regression_task: target range must be low, mid or high");
  }
  std::set<RangeTag> seen;
  for (RangeTag tag : input_range) {
    if (tag == RangeTag::full) {
      throw std::invalid_argument("make_regression_task: input ranges must be low, mid or high");
    }
    if (tag == target_range) {
      throw std::invalid_argument("make_regression_task: input and target ranges must be disjoint");
    }
    if (!seen.insert(tag).second) {
      throw std::invalid_argument("make_regression_task: duplicate input range tag");
    }
  }

  RegressionTask task;
  task.input_range = input_range;
  task.target_range = target_range;
  for (RangeTag tag : input_range) append_range_bins(ranges, tag, task.input_bins);
  std::sort(task.input_bins.begin(), task.input_bins.end());
  task.target_bins = ranges.of(target_range);
  if (task.input_bins.empty() || task.target_bins.empty()) {
    throw std::invalid_argument("make_regression_task: selected range has no non-empty bins");
  }

  const Eigen::Index n = bins.bin_mean[static_cast<std::size_t>(task.target_bins.front())].size();

  // Target: mean of the target range's bin-mean vectors.
  Eigen::VectorXd target_raw = Eigen::VectorXd::Zero(n);
  for (int b : task.target_bins) target_raw += bins.bin_mean[static_cast<std::size_t>(b)];
  target_raw /= static_cast<double>(task.target_bins.size());
  task.target_raw = target_raw;
  std::tie(task.target, task.target_stats) = standardize(target_raw);

  // Features: one column per input bin.
  task.features_raw.resize(n, static_cast<Eigen::Index>(task.input_bins.size()));
  for (std::size_t c = 0; c < task.input_bins.size(); ++c) {
    task.features_raw.col(static_cast<Eigen::Index>(c)) =
        bins.bin_mean[static_cast<std::size_t>(task.input_bins[c])];
  }
  std::tie(task.features, task.feature_stats) = standardize_columns(task.features_raw);

  task.masks = make_splits(static_cast<int>(n), kPrelimSplit, seed);
  return task;
}

ClassificationTask make_classification_task(const Graph& graph, const SpectralBins& bins,
                                            int bin_index, int num_classes, DiscretizeMode mode,
                                            std::uint64_t seed) {
  if (bin_index < 0 || bin_index >= bins.num_bins()) {
    throw std::invalid_argument("make_classification_task: bin index " + std::to_string(bin_index) +
                                " out of range");
  }
  if (bins.is_empty(bin_index)) {
    throw std::invalid_argument("make_classification_task: bin " + std::to_string(bin_index) +
                                " is empty");
  }

  ClassificationTask task;
  task.bin_index = bin_index;
  task.labels = discretize(bins.bin_mean[static_cast<std::size_t>(bin_index)], num_classes, mode);

  const Eigen::MatrixXd raw_features =
      graph.has_features() ? *graph.features : Eigen::MatrixXd(Eigen::MatrixXd::Identity(graph.n, graph.n));
  if (!graph.has_features()) {
    task.warnings.push_back("graph has no features; using identity fallback");
  }
  if (raw_features.rows() != task.labels.labels.size()) {
    throw std::invalid_argument("make_classification_task: feature rows do not match basis dimension");
  }
  std::tie(task.features, std::ignore) =
      standardize_columns(raw_features, /*allow_constant_columns=*/true, &task.warnings);

  const int first_label = task.labels.labels[0];
  task.degenerate = (task.labels.labels.array() == first_label).all();
  if (task.degenerate) {
    task.warnings.push_back("all nodes fall in class " + std::to_string(first_label) +
                            "; accuracy on this bin is vacuous");
  }

  task.masks = make_splits(graph.n, kMainSplit, seed);
  return task;
}

nlohmann::json classification_manifest(const ClassificationTask& task, std::uint64_t graph_hash,
                                       int num_classes, DiscretizeMode mode,
                                       SplitFractions fractions) {
  nlohmann::json doc;
  doc["task"] = "classification";
  doc["graph_hash"] = hash_hex(graph_hash);
  doc["bin_index"] = task.bin_index;
  doc["num_classes"] = num_classes;
  doc["discretize_mode"] = discretize_mode_name(mode);
  doc["seed"] = task.masks.seed;
  doc["fractions"] = {fractions.train, fractions.val, fractions.test};
  doc["mask_sizes"] = {mask_count(task.masks.train), mask_count(task.masks.val),
                       mask_count(task.masks.test)};
  doc["degenerate"] = task.degenerate;
  doc["warnings"] = task.warnings;
  return doc;
}

nlohmann::json regression_manifest(const RegressionTask& task, std::uint64_t graph_hash,
                                   SplitFractions fractions) {
  nlohmann::json doc;
  doc["task"] = "regression";
  doc["graph_hash"] = hash_hex(graph_hash);
  std::vector<std::string> input_tags;
  for (RangeTag tag : task.input_range) input_tags.push_back(range_tag_name(tag));
  doc["input_range"] = input_tags;
  doc["target_range"] = range_tag_name(task.target_range);
  doc["input_bins"] = task.input_bins;
  doc["target_bins"] = task.target_bins;
  doc["seed"] = task.masks.seed;
  doc["fractions"] = {fractions.train, fractions.val, fractions.test};
  doc["mask_sizes"] = {mask_count(task.masks.train), mask_count(task.masks.val),
                       mask_count(task.masks.test)};
  doc["target_standardization"] = {{"mean", task.target_stats.mean}, {"scale", task.target_stats.scale}};
  nlohmann::json feature_stats = nlohmann::json::array();
  for (const Standardization& s : task.feature_stats) {
    feature_stats.push_back({{"mean", s.mean}, {"scale", s.scale}});
  }
  doc["feature_standardization"] = std::move(feature_stats);
  return doc;
}

}  // namespace specbench
