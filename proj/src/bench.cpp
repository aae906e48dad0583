#include "specbench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string_view>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "specbench/hash.hpp"
#include "specbench/version.hpp"

namespace specbench {
namespace {

[[noreturn]] void fail(const std::string& message) { throw std::runtime_error(message); }

std::string tool_string() { return std::string(kToolName) + " " + kToolVersion; }

void validate_protocol(const ProtocolConfig& protocol) {
  if (protocol.runs < 1) fail("protocol: runs must be >= 1");
  if (protocol.num_classes < 2) fail("protocol: num_classes must be >= 2");
  if (protocol.layers < 1) fail("protocol: layers must be >= 1");
  if (protocol.hidden < 1) fail("protocol: hidden must be >= 1");
  if (protocol.cheb_order < 1) fail("protocol: cheb_order must be >= 1");
  if (!(protocol.bin_width > 0.0) || protocol.bin_width > 2.0) {
    fail("protocol: bin_width must lie in (0, 2]");
  }
}

// Independent, reproducible seed per sweep cell.  The task seed is shared by
// every model so that all models face identical splits and labels in a given
// (bin, run) cell; the train seed folds the model kind in.
std::uint64_t cell_seed(std::uint64_t dataset_base, std::string_view tag, int bin, int run) {
  std::uint64_t s = mix_seed(dataset_base, tag);
  s = mix_seed(s, static_cast<std::uint64_t>(bin));
  return mix_seed(s, static_cast<std::uint64_t>(run));
}

double population_std(const std::vector<double>& values, double mean) {
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

// Contiguous third of `count` curve points; remainders go to the later
// thirds, mirroring the bin-range partition.
std::pair<int, int> third_span(int count, RangeTag tag) {
  const int base = count / 3;
  const int rem = count % 3;
  const int size_low = base;
  const int size_mid = base + (rem >= 2 ? 1 : 0);
  const int size_high = base + (rem >= 1 ? 1 : 0);
  switch (tag) {
    case RangeTag::low: return {0, size_low};
    case RangeTag::mid: return {size_low, size_low + size_mid};
    case RangeTag::high: return {size_low + size_mid, size_low + size_mid + size_high};
    case RangeTag::full: return {0, count};
  }
  fail("third_span: bad range tag");
}

// Count inversions between two permutations given r1's items mapped to their
// positions in r2; merge sort keeps this O(m log m).
long long count_inversions(std::vector<int>& seq, std::vector<int>& tmp, int lo, int hi) {
  if (hi - lo <= 1) return 0;
  const int mid = lo + (hi - lo) / 2;
  long long count = count_inversions(seq, tmp, lo, mid) + count_inversions(seq, tmp, mid, hi);
  int i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (seq[static_cast<std::size_t>(i)] <= seq[static_cast<std::size_t>(j)]) {
      tmp[static_cast<std::size_t>(k++)] = seq[static_cast<std::size_t>(i++)];
    } else {
      count += mid - i;
      tmp[static_cast<std::size_t>(k++)] = seq[static_cast<std::size_t>(j++)];
    }
  }
  while (i < mid) tmp[static_cast<std::size_t>(k++)] = seq[static_cast<std::size_t>(i++)];
  while (j < hi) tmp[static_cast<std::size_t>(k++)] = seq[static_cast<std::size_t>(j++)];
  std::copy(tmp.begin() + lo, tmp.begin() + hi, seq.begin() + lo);
  return count;
}

template <typename Item>
int kendall_impl(const std::vector<Item>& r1, const std::vector<Item>& r2) {
  if (r1.size() != r2.size()) fail("kendall_tau_distance: rankings have different lengths");
  std::map<Item, int> pos;
  for (std::size_t i = 0; i < r2.size(); ++i) {
    if (!pos.emplace(r2[i], static_cast<int>(i)).second) {
      fail("kendall_tau_distance: second ranking repeats an item");
    }
  }
  std::vector<int> seq;
  seq.reserve(r1.size());
  std::set<Item> seen;
  for (const Item& item : r1) {
    if (!seen.insert(item).second) fail("kendall_tau_distance: first ranking repeats an item");
    const auto it = pos.find(item);
    if (it == pos.end()) fail("kendall_tau_distance: rankings cover different item sets");
    seq.push_back(it->second);
  }
  std::vector<int> tmp(seq.size());
  const long long inversions = count_inversions(seq, tmp, 0, static_cast<int>(seq.size()));
  return static_cast<int>(inversions);
}

nlohmann::json record_to_json(const RunRecord& record) {
  nlohmann::json doc;
  doc["dataset"] = record.dataset;
  doc["model"] = record.model;
  doc["bin_index"] = record.bin_index;
  doc["bin_center"] = record.bin_center;
  doc["run"] = record.run;
  doc["seed"] = hash_hex(record.seed);
  if (std::isfinite(record.test_accuracy)) {
    doc["test_accuracy"] = record.test_accuracy;
  } else {
    doc["test_accuracy"] = nullptr;
  }
  doc["flags"] = record.flags;
  if (!record.error.empty()) doc["error"] = record.error;
  doc["config_hash"] = hash_hex(record.config_hash);
  return doc;
}

RunRecord record_from_json(const nlohmann::json& doc) {
  RunRecord record;
  record.dataset = doc.at("dataset").get<std::string>();
  record.model = doc.at("model").get<std::string>();
  record.bin_index = doc.at("bin_index").get<int>();
  record.bin_center = doc.at("bin_center").get<double>();
  record.run = doc.at("run").get<int>();
  record.seed = std::stoull(doc.at("seed").get<std::string>(), nullptr, 16);
  if (doc.at("test_accuracy").is_null()) {
    record.test_accuracy = std::numeric_limits<double>::quiet_NaN();
  } else {
    record.test_accuracy = doc.at("test_accuracy").get<double>();
  }
  record.flags = doc.at("flags").get<std::vector<std::string>>();
  if (doc.contains("error")) record.error = doc.at("error").get<std::string>();
  record.config_hash = std::stoull(doc.at("config_hash").get<std::string>(), nullptr, 16);
  return record;
}

}  // namespace

Dataset make_dataset(std::string name, Graph graph, double bin_width) {
  if (name.empty()) fail("dataset name must not be empty");
  Dataset ds;
  ds.name = std::move(name);
  ds.graph = std::move(graph);
  ds.basis = eigendecompose(normalized_laplacian(ds.graph));
  ds.bins = bin_eigenvectors(ds.basis, bin_width);
  return ds;
}

std::uint64_t protocol_config_hash(const ProtocolConfig& protocol,
                                   const std::vector<ModelKind>& models,
                                   const std::vector<Dataset>& datasets) {
  Fnv1a h;
  h.str("specbench-protocol-v1");
  h.f64(protocol.bin_width);
  h.i64(protocol.num_classes);
  h.str(discretize_mode_name(protocol.mode));
  h.i64(protocol.runs);
  h.u64(protocol.base_seed);
  h.i64(protocol.layers);
  h.i64(protocol.hidden);
  h.i64(protocol.cheb_order);
  h.i64(protocol.train.epochs);
  h.f64(protocol.train.learning_rate);
  h.str(scheduler_name(protocol.train.scheduler));
  h.i64(protocol.train.scheduler_t0);
  h.str(init_scheme_name(protocol.train.init));
  h.f64(protocol.train.dropout);
  h.f64(protocol.train.adam.beta1);
  h.f64(protocol.train.adam.beta2);
  h.f64(protocol.train.adam.eps);
  h.u64(models.size());
  for (ModelKind kind : models) h.str(model_kind_name(kind));
  h.u64(datasets.size());
  for (const Dataset& ds : datasets) {
    h.str(ds.name);
    h.u64(graph_hash(ds.graph));
    h.f64(ds.bins.width);
  }
  return h.digest();
}

bool RunRecord::skipped() const { return !std::isfinite(test_accuracy); }

void write_store(const ResultsStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write results store '" + path + "'");
  nlohmann::json header;
  header["format"] = "specbench-store";
  header["schema"] = kStoreSchemaVersion;
  header["tool"] = store.tool.empty() ? tool_string() : store.tool;
  header["config_hash"] = hash_hex(store.config_hash);
  out << header.dump() << "\n";
  for (const RunRecord& record : store.records) out << record_to_json(record).dump() << "\n";
  if (!out) fail("failed while writing results store '" + path + "'");
}

ResultsStore read_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open results store '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) fail("results store '" + path + "' is empty");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail("results store '" + path + "' has a malformed header: " + e.what());
  }
  if (header.value("format", "") != "specbench-store") {
    fail("'" + path + "' is not a results store");
  }
  const int schema = header.value("schema", -1);
  if (schema != kStoreSchemaVersion) {
    fail("results store '" + path + "' uses schema version " + std::to_string(schema) +
         "; this build reads version " + std::to_string(kStoreSchemaVersion));
  }
  ResultsStore store;
  store.tool = header.value("tool", "");
  store.config_hash = std::stoull(header.at("config_hash").get<std::string>(), nullptr, 16);
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      store.records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      fail("results store '" + path + "' line " + std::to_string(line_number) +
           ": malformed record: " + e.what());
    }
  }
  return store;
}

void parallel_for(int total, int threads, const std::function<void(int)>& fn) {
  if (total <= 0) return;
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, total));
  if (threads == 1) {
    for (int i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= total) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

ResultsStore run_benchmark(const std::vector<Dataset>& datasets,
                           const std::vector<ModelKind>& models, const ProtocolConfig& protocol) {
  validate_protocol(protocol);
  if (datasets.empty()) fail("run_benchmark: no datasets");
  if (models.empty()) fail("run_benchmark: no models");
  {
    std::set<std::string> names;
    for (const Dataset& ds : datasets) {
      if (!names.insert(ds.name).second) fail("run_benchmark: duplicate dataset name '" + ds.name + "'");
      if (std::abs(ds.bins.width - protocol.bin_width) > 1e-12) {
        fail("run_benchmark: dataset '" + ds.name + "' was binned at width " +
             std::to_string(ds.bins.width) + " but the protocol asks for " +
             std::to_string(protocol.bin_width));
      }
    }
  }

  ResultsStore store;
  store.tool = tool_string();
  store.config_hash = protocol_config_hash(protocol, models, datasets);

  for (const Dataset& ds : datasets) {
    const std::vector<int> bins = ds.bins.nonempty_bins();
    const std::uint64_t dataset_base = mix_seed(protocol.base_seed, ds.name);
    const Operators ops = build_operators(ds.graph, models);

    // Features are a function of the graph alone, so one probe task supplies
    // the matrix every cell reuses (cells still rebuild labels and splits).
    const ClassificationTask probe = make_classification_task(
        ds.graph, ds.bins, bins.front(), protocol.num_classes, protocol.mode,
        cell_seed(dataset_base, "task", bins.front(), 0));
    const Eigen::MatrixXd& features = probe.features;

    for (ModelKind kind : models) {
      ModelConfig config;
      config.kind = kind;
      config.layers = protocol.layers;
      config.hidden = protocol.hidden;
      config.in_dim = static_cast<int>(features.cols());
      config.out_dim = protocol.num_classes;
      config.cheb_order = protocol.cheb_order;
      validate_model_config(config);
      const PropagatedFeatures pre = precompute_propagated(config, ops, features);

      const int cells = static_cast<int>(bins.size()) * protocol.runs;
      std::vector<RunRecord> block(static_cast<std::size_t>(cells));
      parallel_for(cells, protocol.threads, [&](int cell) {
        const int bin = bins[static_cast<std::size_t>(cell / protocol.runs)];
        const int run = cell % protocol.runs;
        RunRecord record;
        record.dataset = ds.name;
        record.model = model_kind_name(kind);
        record.bin_index = bin;
        record.bin_center = ds.bins.center(bin);
        record.run = run;
        record.seed = cell_seed(dataset_base, model_kind_name(kind), bin, run);
        record.config_hash = store.config_hash;

        const ClassificationTask task = make_classification_task(
            ds.graph, ds.bins, bin, protocol.num_classes, protocol.mode,
            cell_seed(dataset_base, "task", bin, run));
        if (task.degenerate) {
          record.flags = {"degenerate_bin", "skipped"};
        } else {
          try {
            const TrainResult trained =
                train_classifier(config, ops, task.features, task.labels.labels, task.masks.train,
                                 protocol.train, record.seed, &pre);
            record.test_accuracy = evaluate_accuracy(config, trained.params, ops, task.features,
                                                     task.labels.labels, task.masks.test, &pre);
          } catch (const std::exception& e) {
            record.flags = {"train_failure", "skipped"};
            record.error = e.what();
          }
        }
        block[static_cast<std::size_t>(cell)] = std::move(record);
      });
      store.records.insert(store.records.end(), std::make_move_iterator(block.begin()),
                           std::make_move_iterator(block.end()));
    }
  }
  return store;
}

AccuracyCurve accuracy_curve(const ResultsStore& store, const std::string& model,
                             const std::string& dataset) {
  std::map<int, std::pair<double, std::vector<double>>> by_bin;  // center, accuracies
  bool any = false;
  for (const RunRecord& record : store.records) {
    if (record.model != model || record.dataset != dataset) continue;
    any = true;
    auto& slot = by_bin[record.bin_index];
    slot.first = record.bin_center;
    if (!record.skipped()) slot.second.push_back(record.test_accuracy);
  }
  if (!any) {
    fail("no records for model '" + model + "' on dataset '" + dataset + "' in the results store");
  }
  AccuracyCurve curve;
  curve.dataset = dataset;
  curve.model = model;
  for (const auto& [bin, slot] : by_bin) {
    const auto& accs = slot.second;
    if (accs.empty()) {
      curve.skipped_bins.push_back(bin);
      continue;
    }
    double mean = 0.0;
    for (double a : accs) mean += a;
    mean /= static_cast<double>(accs.size());
    if (mean < 0.0 || mean > 1.0) fail("accuracy_curve: accuracy outside [0, 1] in the store");
    curve.bin_indices.push_back(bin);
    curve.bin_centers.push_back(slot.first);
    curve.mean_acc.push_back(mean);
    curve.std_acc.push_back(population_std(accs, mean));
    curve.runs = std::max(curve.runs, static_cast<int>(accs.size()));
  }
  if (curve.bin_indices.empty()) {
    fail("no valid bins for model '" + model + "' on dataset '" + dataset +
         "': every bin was skipped");
  }
  return curve;
}

AUACScore normalized_auac(const AccuracyCurve& curve, RangeTag range) {
  const int count = static_cast<int>(curve.bin_centers.size());
  const auto [begin, end] = third_span(count, range);
  if (end - begin < 2) {
    fail("normalized_auac: the " + range_tag_name(range) + " range holds " +
         std::to_string(end - begin) + " curve point(s); at least 2 are required");
  }
  double area = 0.0;
  double area_unit = 0.0;
  for (int i = begin; i + 1 < end; ++i) {
    const double dx = curve.bin_centers[static_cast<std::size_t>(i) + 1] -
                      curve.bin_centers[static_cast<std::size_t>(i)];
    if (!(dx > 0.0)) fail("normalized_auac: bin centers must strictly increase");
    area += dx * 0.5 *
            (curve.mean_acc[static_cast<std::size_t>(i)] + curve.mean_acc[static_cast<std::size_t>(i) + 1]);
    area_unit += dx;
  }
  AUACScore score;
  score.dataset = curve.dataset;
  score.model = curve.model;
  score.range = range;
  score.value = area / area_unit;
  return score;
}

RankingTable rank_models(const std::vector<AUACScore>& scores) {
  if (scores.empty()) fail("rank_models: no scores");
  const RangeTag range = scores.front().range;
  std::set<std::string> model_set, dataset_set;
  std::map<std::pair<std::string, std::string>, double> value;  // (dataset, model)
  for (const AUACScore& s : scores) {
    if (s.range != range) fail("rank_models: scores mix different frequency ranges");
    model_set.insert(s.model);
    dataset_set.insert(s.dataset);
    if (!value.emplace(std::make_pair(s.dataset, s.model), s.value).second) {
      fail("rank_models: duplicate score for model '" + s.model + "' on dataset '" + s.dataset + "'");
    }
  }
  std::vector<std::string> models(model_set.begin(), model_set.end());
  std::vector<std::string> datasets(dataset_set.begin(), dataset_set.end());
  for (const std::string& ds : datasets) {
    for (const std::string& m : models) {
      if (value.find({ds, m}) == value.end()) {
        fail("rank_models: missing score for model '" + m + "' on dataset '" + ds + "'");
      }
    }
  }

  const int m = static_cast<int>(models.size());
  const int d = static_cast<int>(datasets.size());
  Eigen::MatrixXd ranks(m, d);
  for (int j = 0; j < d; ++j) {
    // Sort model indices by descending score; equal scores share the mean of
    // the positions they occupy.
    std::vector<int> order(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double va = value.at({datasets[static_cast<std::size_t>(j)], models[static_cast<std::size_t>(a)]});
      const double vb = value.at({datasets[static_cast<std::size_t>(j)], models[static_cast<std::size_t>(b)]});
      if (va != vb) return va > vb;
      return a < b;
    });
    int pos = 0;
    while (pos < m) {
      int tie_end = pos + 1;
      const double v = value.at({datasets[static_cast<std::size_t>(j)],
                                 models[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])]});
      while (tie_end < m &&
             value.at({datasets[static_cast<std::size_t>(j)],
                       models[static_cast<std::size_t>(order[static_cast<std::size_t>(tie_end)])]}) == v) {
        ++tie_end;
      }
      const double shared = 0.5 * static_cast<double>((pos + 1) + tie_end);  // mean of 1-based positions
      for (int p = pos; p < tie_end; ++p) {
        ranks(order[static_cast<std::size_t>(p)], j) = shared;
      }
      pos = tie_end;
    }
  }

  RankingTable table;
  table.range = range;
  table.datasets = datasets;
  std::vector<int> order(static_cast<std::size_t>(m));
  std::vector<double> avg(static_cast<std::size_t>(m)), sd(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    avg[static_cast<std::size_t>(i)] = ranks.row(i).mean();
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
      const double diff = ranks(i, j) - avg[static_cast<std::size_t>(i)];
      acc += diff * diff;
    }
    sd[static_cast<std::size_t>(i)] = std::sqrt(acc / d);
    order[static_cast<std::size_t>(i)] = i;
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (avg[static_cast<std::size_t>(a)] != avg[static_cast<std::size_t>(b)]) {
      return avg[static_cast<std::size_t>(a)] < avg[static_cast<std::size_t>(b)];
    }
    return models[static_cast<std::size_t>(a)] < models[static_cast<std::size_t>(b)];
  });
  table.ranks.resize(m, d);
  for (int i = 0; i < m; ++i) {
    const int src = order[static_cast<std::size_t>(i)];
    table.models.push_back(models[static_cast<std::size_t>(src)]);
    table.avg_rank.push_back(avg[static_cast<std::size_t>(src)]);
    table.std_rank.push_back(sd[static_cast<std::size_t>(src)]);
    table.ranks.row(i) = ranks.row(src);
  }
  return table;
}

int kendall_tau_distance(const std::vector<std::string>& r1, const std::vector<std::string>& r2) {
  return kendall_impl(r1, r2);
}

int kendall_tau_distance(const std::vector<int>& r1, const std::vector<int>& r2) {
  return kendall_impl(r1, r2);
}

double normalized_kendall_tau(const std::vector<std::string>& r1,
                              const std::vector<std::string>& r2) {
  const int distance = kendall_tau_distance(r1, r2);
  const auto m = static_cast<long long>(r1.size());
  if (m < 2) return 0.0;
  return static_cast<double>(distance) / (static_cast<double>(m * (m - 1)) / 2.0);
}

std::string direction_name(RecoveryDirection direction) {
  return direction == RecoveryDirection::low_to_high ? "low_to_high" : "high_to_low";
}

RecoveryDirection parse_direction(const std::string& name) {
  if (name == "low_to_high") return RecoveryDirection::low_to_high;
  if (name == "high_to_low") return RecoveryDirection::high_to_low;
  throw std::invalid_argument("unknown direction '" + name + "' (expected low_to_high|high_to_low)");
}

EnergyComparison run_frequency_recovery(const Dataset& dataset, const RecoveryConfig& config) {
  const FrequencyRanges ranges = frequency_thirds(dataset.bins);
  const bool low_to_high = config.direction == RecoveryDirection::low_to_high;
  const RangeTag input_tag = low_to_high ? RangeTag::low : RangeTag::high;
  const RangeTag target_tag = low_to_high ? RangeTag::high : RangeTag::low;

  const std::uint64_t base = mix_seed(mix_seed(config.seed, dataset.name),
                                      std::string("recover-") + direction_name(config.direction));
  const RegressionTask task = make_regression_task(dataset.bins, ranges, {input_tag}, target_tag,
                                                   mix_seed(base, "task"));

  ModelConfig model;
  model.kind = config.model;
  model.layers = config.layers;
  model.hidden = config.hidden;
  model.in_dim = static_cast<int>(task.features.cols());
  model.out_dim = 1;
  model.cheb_order = config.cheb_order;
  validate_model_config(model);

  const Operators ops = build_operators(dataset.graph, {config.model});
  const PropagatedFeatures pre = precompute_propagated(model, ops, task.features);
  const TrainResult trained =
      train_regressor(model, ops, task.features, task.target, task.masks.train, config.train,
                      mix_seed(base, model_kind_name(config.model)), &pre);

  const Eigen::MatrixXd raw_output = forward(model, trained.params, ops, task.features, &pre);
  const Eigen::VectorXd output = destandardize(raw_output.col(0), task.target_stats);
  const Eigen::VectorXd input_signal = task.features_raw.rowwise().mean();

  EnergyComparison cmp;
  cmp.dataset = dataset.name;
  cmp.model = model_kind_name(config.model);
  cmp.direction = direction_name(config.direction);
  cmp.bin_centers.reserve(static_cast<std::size_t>(dataset.bins.num_bins()));
  for (int b = 0; b < dataset.bins.num_bins(); ++b) cmp.bin_centers.push_back(dataset.bins.center(b));
  cmp.input_energy =
      binned_energy(energy_distribution(input_signal, dataset.basis), dataset.basis, dataset.bins);
  cmp.target_energy =
      binned_energy(energy_distribution(task.target_raw, dataset.basis), dataset.basis, dataset.bins);
  cmp.output_energy =
      binned_energy(energy_distribution(output, dataset.basis), dataset.basis, dataset.bins);
  cmp.final_train_loss = trained.loss_trace.empty() ? 0.0 : trained.loss_trace.back();
  cmp.notes =
      "input = mean of the raw bin-mean input columns; target = raw range-mean signal; "
      "output = destandardized model prediction";
  return cmp;
}

ParameterStudyResult run_parameter_study(const Dataset& dataset,
                                         const std::vector<ModelKind>& models,
                                         const std::vector<int>& depths,
                                         const ProtocolConfig& protocol) {
  if (depths.empty()) fail("run_parameter_study: no depths");
  ParameterStudyResult result;
  for (int depth : depths) {
    if (depth < 1) fail("run_parameter_study: depth must be >= 1");
    ProtocolConfig layered = protocol;
    layered.layers = depth;
    ResultsStore store = run_benchmark({dataset}, models, layered);
    std::vector<AccuracyCurve> curves;
    curves.reserve(models.size());
    for (ModelKind kind : models) {
      curves.push_back(accuracy_curve(store, model_kind_name(kind), dataset.name));
    }
    result.depths.push_back(depth);
    result.stores.push_back(std::move(store));
    result.curves.push_back(std::move(curves));
  }
  return result;
}

LabelRangeReport dominant_label_range(const Dataset& dataset, const Eigen::VectorXi& labels,
                                      const std::vector<bool>& train_mask) {
  if (labels.size() != dataset.graph.n) fail("dominant_label_range: label length mismatch");
  if (static_cast<int>(train_mask.size()) != dataset.graph.n) {
    fail("dominant_label_range: mask length mismatch");
  }
  if (mask_count(train_mask) == 0) fail("dominant_label_range: empty training mask");
  int num_classes = 0;
  for (int i = 0; i < dataset.graph.n; ++i) {
    if (labels[i] < 0) fail("dominant_label_range: negative class label");
    num_classes = std::max(num_classes, labels[i] + 1);
  }
  // One-hot label matrix restricted to training rows; sum the squared
  // eigenbasis projections of every class column into a single
  // per-frequency energy vector.
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(dataset.graph.n, num_classes);
  for (int i = 0; i < dataset.graph.n; ++i) {
    if (train_mask[static_cast<std::size_t>(i)]) onehot(i, labels[i]) = 1.0;
  }
  const Eigen::MatrixXd coeffs = dataset.basis.eigenvectors.transpose() * onehot;
  Eigen::VectorXd energy = coeffs.array().square().rowwise().sum();
  const double total = energy.sum();
  if (!(total > 0.0)) fail("dominant_label_range: the training-node label signal is zero");
  energy /= total;
  const Eigen::VectorXd binned = binned_energy(energy, dataset.basis, dataset.bins);
  const FrequencyRanges ranges = frequency_thirds(dataset.bins);

  LabelRangeReport report;
  report.low_energy = energy_in_bins(binned, ranges.low);
  report.mid_energy = energy_in_bins(binned, ranges.mid);
  report.high_energy = energy_in_bins(binned, ranges.high);
  report.range = RangeTag::low;
  double best = report.low_energy;
  if (report.mid_energy > best) {
    best = report.mid_energy;
    report.range = RangeTag::mid;
  }
  if (report.high_energy > best) {
    report.range = RangeTag::high;
  }
  report.signal =
      "sum of squared eigenbasis projections of the one-hot label columns, "
      "training rows only, normalized to unit total";
  return report;
}

}  // namespace specbench
