// specbench command-line driver.
//
// Subcommands:
//   decompose  eigendecompose a graph's normalized Laplacian into a basis cache
//   synth      emit task manifests (per-bin classification + range regression)
//   bench      run the full per-bin benchmark sweep into a results store
//   recover    run the frequency-recovery experiment (energy comparison)
//   theory     verify the discretization theory bounds empirically
//   report     turn a results store into CSV tables and SVG plots
//
// Exit codes: 0 success, 1 usage/config error, 2 runtime failure,
// 3 theory-check failure.  Errors print one machine-parsable line
// ("error: <category>: <message>") to stderr first, then any detail.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "specbench/bench.hpp"
#include "specbench/graph.hpp"
#include "specbench/hash.hpp"
#include "specbench/models.hpp"
#include "specbench/report.hpp"
#include "specbench/rng.hpp"
#include "specbench/spectral.hpp"
#include "specbench/tasks.hpp"
#include "specbench/theory.hpp"
#include "specbench/version.hpp"

namespace {

using nlohmann::json;
using namespace specbench;

// Thrown for problems the user can fix by changing flags or the config file.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string tool_string() { return std::string(kToolName) + " " + kToolVersion; }

std::string single_line(const std::string& text) {
  std::string out = text;
  std::replace(out.begin(), out.end(), '\n', ' ');
  return out;
}

void emit_error(const std::string& category, const std::string& message) {
  std::cerr << "error: " << category << ": " << single_line(message) << "\n";
  if (message.find('\n') != std::string::npos) std::cerr << message << "\n";
}

// ---------------------------------------------------------------------------
// Config parsing helpers

void check_keys(const json& object, const std::set<std::string>& allowed,
                const std::string& context) {
  if (!object.is_object()) throw UsageError(context + " must be a JSON object");
  for (const auto& [key, value] : object.items()) {
    (void)value;
    if (allowed.find(key) == allowed.end()) {
      throw UsageError("unknown key '" + key + "' in " + context);
    }
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  try {
    json doc;
    in >> doc;
    return doc;
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

GeneratorSpec generator_from_json(const json& doc, const std::string& context) {
  check_keys(doc, {"kind", "n", "block_sizes", "p_in", "p_out", "seed"}, context);
  GeneratorSpec spec;
  spec.kind = doc.at("kind").get<std::string>();
  if (spec.kind == "sbm") {
    spec.sbm.block_sizes = doc.at("block_sizes").get<std::vector<int>>();
    spec.sbm.p_in = doc.at("p_in").get<double>();
    spec.sbm.p_out = doc.at("p_out").get<double>();
    spec.seed = doc.value("seed", 0ULL);
  } else {
    spec.n = doc.at("n").get<int>();
  }
  return spec;
}

struct DatasetSpec {
  std::string name;
  std::optional<std::string> edge_list;
  std::optional<std::string> features;
  std::optional<GeneratorSpec> generator;
};

DatasetSpec dataset_from_json(const json& doc, const std::string& context) {
  check_keys(doc, {"name", "edge_list", "features", "generator"}, context);
  DatasetSpec spec;
  spec.name = doc.at("name").get<std::string>();
  if (doc.contains("edge_list")) spec.edge_list = doc.at("edge_list").get<std::string>();
  if (doc.contains("features")) spec.features = doc.at("features").get<std::string>();
  if (doc.contains("generator")) {
    spec.generator = generator_from_json(doc.at("generator"), context + ".generator");
  }
  if (spec.edge_list.has_value() == spec.generator.has_value()) {
    throw UsageError(context + " needs exactly one of 'edge_list' or 'generator'");
  }
  if (spec.features && !spec.edge_list) {
    throw UsageError(context + ": 'features' requires 'edge_list'");
  }
  return spec;
}

Graph build_graph(const DatasetSpec& spec) {
  if (spec.generator) return generate_graph(*spec.generator);
  const LoadReport report = load_edge_list(*spec.edge_list);
  for (const std::string& warning : report.warnings) {
    std::cerr << "warning: " << spec.name << ": " << warning << "\n";
  }
  if (spec.features) return load_features(*spec.features, report);
  return report.graph;
}

struct RunConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<ModelKind> models;
  ProtocolConfig protocol;
  std::string out_dir;
};

TrainConfig train_from_json(const json& doc, const std::string& context) {
  check_keys(doc,
             {"epochs", "learning_rate", "scheduler", "scheduler_t0", "init", "dropout"},
             context);
  TrainConfig train = main_benchmark_train_config();
  if (doc.contains("epochs")) train.epochs = doc.at("epochs").get<int>();
  if (doc.contains("learning_rate")) train.learning_rate = doc.at("learning_rate").get<double>();
  if (doc.contains("scheduler")) train.scheduler = parse_scheduler(doc.at("scheduler").get<std::string>());
  if (doc.contains("scheduler_t0")) train.scheduler_t0 = doc.at("scheduler_t0").get<int>();
  if (doc.contains("init")) train.init = parse_init_scheme(doc.at("init").get<std::string>());
  if (doc.contains("dropout")) train.dropout = doc.at("dropout").get<double>();
  if (train.epochs < 1) throw UsageError(context + ": epochs must be >= 1");
  return train;
}

RunConfig run_config_from_json(const json& doc) {
  check_keys(doc,
             {"datasets", "models", "bin_width", "num_classes", "discretize_mode", "runs",
              "base_seed", "layers", "hidden", "cheb_order", "train", "threads", "out_dir"},
             "config");
  RunConfig config;
  if (!doc.contains("datasets") || !doc.at("datasets").is_array() || doc.at("datasets").empty()) {
    throw UsageError("config: 'datasets' must be a non-empty array");
  }
  int index = 0;
  for (const json& ds : doc.at("datasets")) {
    config.datasets.push_back(dataset_from_json(ds, "datasets[" + std::to_string(index) + "]"));
    ++index;
  }
  if (!doc.contains("models") || !doc.at("models").is_array() || doc.at("models").empty()) {
    throw UsageError("config: 'models' must be a non-empty array");
  }
  for (const json& name : doc.at("models")) {
    config.models.push_back(parse_model_kind(name.get<std::string>()));
  }

  ProtocolConfig& p = config.protocol;
  if (doc.contains("bin_width")) p.bin_width = doc.at("bin_width").get<double>();
  if (doc.contains("num_classes")) p.num_classes = doc.at("num_classes").get<int>();
  if (doc.contains("discretize_mode")) {
    p.mode = parse_discretize_mode(doc.at("discretize_mode").get<std::string>());
  }
  if (doc.contains("runs")) p.runs = doc.at("runs").get<int>();
  if (doc.contains("base_seed")) p.base_seed = doc.at("base_seed").get<std::uint64_t>();
  if (doc.contains("layers")) p.layers = doc.at("layers").get<int>();
  if (doc.contains("hidden")) p.hidden = doc.at("hidden").get<int>();
  if (doc.contains("cheb_order")) p.cheb_order = doc.at("cheb_order").get<int>();
  if (doc.contains("train")) p.train = train_from_json(doc.at("train"), "config.train");
  if (doc.contains("threads")) p.threads = doc.at("threads").get<int>();
  config.out_dir = doc.value("out_dir", "");
  return config;
}

// ---------------------------------------------------------------------------
// Shared CLI options

struct GraphSourceOptions {
  std::string graph_path;
  std::string features_path;
  std::string generate_kind;
  int nodes = 0;
  std::vector<int> blocks;
  double p_in = 0.1;
  double p_out = 0.01;
  std::uint64_t graph_seed = 1;
  std::string name = "graph";
};

void add_graph_source_options(CLI::App* cmd, GraphSourceOptions& options) {
  cmd->add_option("--graph", options.graph_path, "edge-list file to load");
  cmd->add_option("--features", options.features_path, "node-feature CSV (with --graph)");
  cmd->add_option("--generate", options.generate_kind, "generator kind: path|cycle|star|sbm");
  cmd->add_option("--nodes", options.nodes, "node count for path|cycle|star");
  cmd->add_option("--blocks", options.blocks, "SBM block sizes")->delimiter(',');
  cmd->add_option("--p-in", options.p_in, "SBM intra-block edge probability");
  cmd->add_option("--p-out", options.p_out, "SBM inter-block edge probability");
  cmd->add_option("--graph-seed", options.graph_seed, "generator seed");
  cmd->add_option("--name", options.name, "dataset name used in outputs");
}

DatasetSpec to_dataset_spec(const GraphSourceOptions& options) {
  DatasetSpec spec;
  spec.name = options.name;
  const bool have_file = !options.graph_path.empty();
  const bool have_gen = !options.generate_kind.empty();
  if (have_file == have_gen) {
    throw UsageError("give exactly one of --graph or --generate");
  }
  if (have_file) {
    spec.edge_list = options.graph_path;
    if (!options.features_path.empty()) spec.features = options.features_path;
    return spec;
  }
  GeneratorSpec gen;
  gen.kind = options.generate_kind;
  gen.n = options.nodes;
  gen.seed = options.graph_seed;
  gen.sbm.block_sizes = options.blocks;
  gen.sbm.p_in = options.p_in;
  gen.sbm.p_out = options.p_out;
  spec.generator = gen;
  return spec;
}

std::uint64_t graph_source_hash(const DatasetSpec& spec, const Graph& graph) {
  Fnv1a h;
  h.str("specbench-source-v1");
  h.str(spec.name);
  h.u64(graph_hash(graph));
  return h.digest();
}

// flag > environment > config file > current directory
std::string resolve_out_dir(const std::string& flag_value, const std::string& config_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("SPECBENCH_OUT"); env != nullptr && env[0] != '\0') {
    return env;
  }
  if (!config_value.empty()) return config_value;
  return ".";
}

std::filesystem::path prepare_out_dir(const std::string& dir) {
  std::filesystem::path path(dir);
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  return path;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << contents;
  if (!out) throw std::runtime_error("failed while writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Subcommand bodies

int cmd_decompose(const GraphSourceOptions& source, const std::string& out_dir,
                  const std::string& output_name, double bin_width) {
  const DatasetSpec spec = to_dataset_spec(source);
  const Graph graph = build_graph(spec);
  const Dataset ds = make_dataset(spec.name, graph, bin_width);
  const std::uint64_t config_hash = graph_source_hash(spec, graph);

  const auto dir = prepare_out_dir(out_dir);
  const auto basis_path = dir / output_name;
  save_basis(ds.basis, graph_hash(ds.graph), basis_path.string());

  json summary;
  summary["tool"] = tool_string();
  summary["config_hash"] = hash_hex(config_hash);
  summary["dataset"] = ds.name;
  summary["n"] = ds.graph.n;
  summary["edges"] = ds.graph.num_edges();
  summary["graph_hash"] = hash_hex(graph_hash(ds.graph));
  summary["eigenvalue_min"] = ds.basis.eigenvalues.minCoeff();
  summary["eigenvalue_max"] = ds.basis.eigenvalues.maxCoeff();
  summary["bin_width"] = ds.bins.width;
  summary["nonempty_bins"] = ds.bins.nonempty_bins();
  summary["basis_file"] = basis_path.string();
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_synth(const GraphSourceOptions& source, const std::string& out_dir, double bin_width,
              int num_classes, const std::string& mode_name, std::uint64_t seed) {
  const DatasetSpec spec = to_dataset_spec(source);
  const Graph graph = build_graph(spec);
  const DiscretizeMode mode = parse_discretize_mode(mode_name);
  const Dataset ds = make_dataset(spec.name, graph, bin_width);
  const std::uint64_t config_hash =
      Fnv1a().u64(graph_source_hash(spec, graph)).f64(bin_width).i64(num_classes)
          .str(mode_name).u64(seed).digest();

  json manifests = json::array();
  for (int bin : ds.bins.nonempty_bins()) {
    const ClassificationTask task = make_classification_task(
        ds.graph, ds.bins, bin, num_classes, mode,
        mix_seed(mix_seed(seed, "task"), static_cast<std::uint64_t>(bin)));
    manifests.push_back(
        classification_manifest(task, graph_hash(ds.graph), num_classes, mode, kMainSplit));
  }

  json doc;
  doc["tool"] = tool_string();
  doc["config_hash"] = hash_hex(config_hash);
  doc["dataset"] = ds.name;
  doc["classification"] = std::move(manifests);
  if (static_cast<int>(ds.bins.nonempty_bins().size()) >= 3) {
    const FrequencyRanges ranges = frequency_thirds(ds.bins);
    const RegressionTask task = make_regression_task(ds.bins, ranges, {RangeTag::low},
                                                     RangeTag::high, mix_seed(seed, "regression"));
    doc["regression"] = regression_manifest(task, graph_hash(ds.graph), kPrelimSplit);
  }

  const auto dir = prepare_out_dir(out_dir);
  const auto path = dir / "tasks.json";
  write_text_file(path, doc.dump(2) + "\n");
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_flag) {
  const RunConfig config = run_config_from_json(load_json_file(config_path));
  std::vector<Dataset> datasets;
  datasets.reserve(config.datasets.size());
  for (const DatasetSpec& spec : config.datasets) {
    Graph graph = build_graph(spec);
    datasets.push_back(make_dataset(spec.name, std::move(graph), config.protocol.bin_width));
  }
  const ResultsStore store = run_benchmark(datasets, config.models, config.protocol);

  const auto dir = prepare_out_dir(resolve_out_dir(out_flag, config.out_dir));
  const auto store_path = dir / "results.jsonl";
  write_store(store, store_path.string());

  int skipped = 0;
  for (const RunRecord& record : store.records) skipped += record.skipped() ? 1 : 0;
  std::cout << "wrote " << store_path.string() << " (" << store.records.size() << " records, "
            << skipped << " skipped, config " << hash_hex(store.config_hash) << ")\n";
  return 0;
}

int cmd_recover(const GraphSourceOptions& source, const std::string& out_dir,
                const std::string& model_name, const std::string& direction_name_arg,
                int layers, int hidden, int epochs, double learning_rate, std::uint64_t seed,
                double bin_width) {
  const DatasetSpec spec = to_dataset_spec(source);
  const Graph graph = build_graph(spec);
  const Dataset ds = make_dataset(spec.name, graph, bin_width);

  RecoveryConfig rc;
  rc.model = parse_model_kind(model_name);
  rc.direction = parse_direction(direction_name_arg);
  rc.layers = layers;
  rc.hidden = hidden;
  rc.seed = seed;
  rc.train = prelim_train_config();
  if (epochs > 0) rc.train.epochs = epochs;
  if (learning_rate > 0.0) rc.train.learning_rate = learning_rate;

  const std::uint64_t config_hash = Fnv1a()
                                        .u64(graph_source_hash(spec, graph))
                                        .str(model_name)
                                        .str(rc.direction == RecoveryDirection::low_to_high
                                                 ? "low_to_high"
                                                 : "high_to_low")
                                        .i64(rc.layers)
                                        .i64(rc.hidden)
                                        .i64(rc.train.epochs)
                                        .f64(rc.train.learning_rate)
                                        .u64(rc.seed)
                                        .f64(bin_width)
                                        .digest();

  const EnergyComparison comparison = run_frequency_recovery(ds, rc);

  const FrequencyRanges ranges = frequency_thirds(ds.bins);
  const RangeTag target_tag =
      rc.direction == RecoveryDirection::low_to_high ? RangeTag::high : RangeTag::low;
  const double output_in_target = energy_in_bins(comparison.output_energy, ranges.of(target_tag));
  const double input_in_target = energy_in_bins(comparison.input_energy, ranges.of(target_tag));

  json doc;
  doc["tool"] = tool_string();
  doc["config_hash"] = hash_hex(config_hash);
  doc["dataset"] = comparison.dataset;
  doc["model"] = comparison.model;
  doc["direction"] = comparison.direction;
  doc["bin_centers"] = comparison.bin_centers;
  doc["input_energy"] = std::vector<double>(comparison.input_energy.begin(),
                                            comparison.input_energy.end());
  doc["target_energy"] = std::vector<double>(comparison.target_energy.begin(),
                                             comparison.target_energy.end());
  doc["output_energy"] = std::vector<double>(comparison.output_energy.begin(),
                                             comparison.output_energy.end());
  doc["output_energy_in_target_range"] = output_in_target;
  doc["input_energy_in_target_range"] = input_in_target;
  doc["final_train_loss"] = comparison.final_train_loss;
  doc["notes"] = comparison.notes;

  const auto dir = prepare_out_dir(out_dir);
  const auto json_path = dir / ("recovery_" + comparison.direction + ".json");
  const auto svg_path = dir / ("recovery_" + comparison.direction + ".svg");
  write_text_file(json_path, doc.dump(2) + "\n");
  write_text_file(svg_path, render_energy_svg(comparison, config_hash));
  std::cout << "wrote " << json_path.string() << " and " << svg_path.string()
            << " (output energy in target range: " << output_in_target << ")\n";
  return 0;
}

int cmd_theory(int n, long long k, long long samples, std::uint64_t seed, int lipschitz_pairs) {
  if (n < 2) throw UsageError("--n must be >= 2");
  if (k < 1) throw UsageError("--k must be >= 1");
  if (samples < 1) throw UsageError("--samples must be >= 1");

  const std::uint64_t config_hash = Fnv1a()
                                        .str("specbench-theory-v1")
                                        .i64(n)
                                        .i64(k)
                                        .i64(samples)
                                        .u64(seed)
                                        .i64(lipschitz_pairs)
                                        .digest();

  // Basis of a path graph: simple, deterministic, full spectral spread.
  const Graph graph = generate_path(n);
  const SpectralBasis basis = eigendecompose(normalized_laplacian(graph));

  // Energy-distribution Lipschitz bound on random unit-vector pairs.
  Rng rng(mix_seed(seed, "lipschitz"));
  int violations = 0;
  double worst_margin = -std::numeric_limits<double>::infinity();
  for (int pair = 0; pair < lipschitz_pairs; ++pair) {
    Eigen::VectorXd v1(n), v2(n);
    for (int i = 0; i < n; ++i) v1[i] = rng.normal();
    for (int i = 0; i < n; ++i) v2[i] = rng.normal();
    if (v1.norm() < 1e-12 || v2.norm() < 1e-12) continue;
    v1.normalize();
    v2.normalize();
    const LipschitzGap gap = lipschitz_gap(v1, v2, basis);
    worst_margin = std::max(worst_margin, gap.lhs - gap.rhs);
    if (gap.lhs > gap.rhs) ++violations;
  }

  // Deviation oracle over every eigenvector of the basis.
  const DeviationBound bound = ncl_deviation_bound(n, k);
  const double angle_bound = max_center_angle_bound(n, k);
  double max_deviation = 0.0;
  double max_angle = 0.0;
  long long accepted = 0, proposed = 0;
  for (int column = 0; column < n; ++column) {
    const EdfOracleResult result =
        edf_deviation_oracle(basis.eigenvectors.col(column), static_cast<int>(k), samples,
                             mix_seed(seed, static_cast<std::uint64_t>(column)), basis);
    max_deviation = std::max(max_deviation, result.max_deviation);
    max_angle = std::max(max_angle, result.max_angle);
    accepted += result.accepted;
    proposed += result.proposed;
  }

  const bool lipschitz_ok = violations == 0;
  const bool deviation_ok =
      max_deviation <= bound.chord_bound && max_deviation <= bound.euclidean_bound;

  json doc;
  doc["tool"] = tool_string();
  doc["config_hash"] = hash_hex(config_hash);
  doc["n"] = n;
  doc["k"] = k;
  doc["seed"] = seed;
  doc["lipschitz"] = {{"pairs", lipschitz_pairs},
                      {"violations", violations},
                      {"worst_margin", worst_margin}};
  doc["deviation"] = {{"samples_per_eigenvector", samples},
                      {"accepted", accepted},
                      {"proposed", proposed},
                      {"max_observed_deviation", max_deviation},
                      {"chord_bound", bound.chord_bound},
                      {"euclidean_bound", bound.euclidean_bound},
                      {"max_observed_angle", max_angle},
                      {"angle_bound", angle_bound}};
  doc["pass"] = lipschitz_ok && deviation_ok;
  std::cout << doc.dump(2) << "\n";

  if (!lipschitz_ok) {
    emit_error("acceptance", "Lipschitz bound violated on " + std::to_string(violations) +
                                 " of " + std::to_string(lipschitz_pairs) + " pairs");
    return 3;
  }
  if (!deviation_ok) {
    emit_error("acceptance",
               "max observed deviation " + std::to_string(max_deviation) + " exceeds bound min(" +
                   std::to_string(bound.chord_bound) + ", " +
                   std::to_string(bound.euclidean_bound) + ")");
    return 3;
  }
  return 0;
}

int cmd_report(const std::string& store_path, const std::string& out_flag,
               const std::string& rank_range_name) {
  const ResultsStore store = read_store(store_path);
  if (store.records.empty()) throw std::runtime_error("no records in store '" + store_path + "'");

  std::set<std::pair<std::string, std::string>> pairs;  // (dataset, model)
  for (const RunRecord& record : store.records) pairs.insert({record.dataset, record.model});

  std::vector<AccuracyCurve> curves;
  for (const auto& [dataset, model] : pairs) {
    try {
      curves.push_back(accuracy_curve(store, model, dataset));
    } catch (const std::exception& e) {
      std::cerr << "warning: skipping " << dataset << "/" << model << ": " << e.what() << "\n";
    }
  }
  if (curves.empty()) throw std::runtime_error("no curves could be built from the store");

  std::vector<AUACScore> scores;
  for (const AccuracyCurve& curve : curves) {
    for (RangeTag tag : {RangeTag::full, RangeTag::low, RangeTag::mid, RangeTag::high}) {
      try {
        scores.push_back(normalized_auac(curve, tag));
      } catch (const std::exception& e) {
        std::cerr << "warning: no " << range_tag_name(tag) << " score for " << curve.dataset << "/"
                  << curve.model << ": " << e.what() << "\n";
      }
    }
  }

  const auto dir = prepare_out_dir(resolve_out_dir(out_flag, ""));
  write_text_file(dir / "curves.csv", curves_csv(curves, store.config_hash));
  write_text_file(dir / "auac.csv", auac_csv(scores, store.config_hash));
  write_text_file(dir / "curves.svg", render_curves_svg(curves, store.config_hash));

  const RangeTag rank_range = parse_range_tag(rank_range_name);
  std::vector<AUACScore> rank_scores;
  for (const AUACScore& score : scores) {
    if (score.range == rank_range) rank_scores.push_back(score);
  }
  bool wrote_ranking = false;
  if (!rank_scores.empty()) {
    try {
      write_text_file(dir / "ranking.csv", ranking_csv(rank_models(rank_scores), store.config_hash));
      wrote_ranking = true;
    } catch (const std::exception& e) {
      std::cerr << "warning: ranking skipped: " << e.what() << "\n";
    }
  }
  std::cout << "wrote " << (dir / "curves.csv").string() << ", " << (dir / "auac.csv").string()
            << ", " << (dir / "curves.svg").string();
  if (wrote_ranking) std::cout << ", " << (dir / "ranking.csv").string();
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("spectral GNN benchmark toolkit (") + tool_string() + ")"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_string());

  std::string out_dir;
  app.add_option("--out", out_dir, "output directory (env: SPECBENCH_OUT)");

  // decompose
  auto* decompose = app.add_subcommand("decompose", "eigendecompose a graph into a basis cache");
  GraphSourceOptions decompose_source;
  add_graph_source_options(decompose, decompose_source);
  std::string basis_name = "basis.json";
  double decompose_width = 0.1;
  decompose->add_option("--output", basis_name, "basis cache filename (.json or binary)");
  decompose->add_option("--bin-width", decompose_width, "bin width for the summary");

  // synth
  auto* synth = app.add_subcommand("synth", "emit task manifests for a graph");
  GraphSourceOptions synth_source;
  add_graph_source_options(synth, synth_source);
  double synth_width = 0.1;
  int synth_classes = 5;
  std::string synth_mode = "maxabs_rescale";
  std::uint64_t synth_seed = 42;
  synth->add_option("--bin-width", synth_width, "frequency bin width");
  synth->add_option("--num-classes", synth_classes, "discretization class count");
  synth->add_option("--discretize-mode", synth_mode, "maxabs_rescale|unit_range");
  synth->add_option("--seed", synth_seed, "split seed");

  // bench
  auto* bench = app.add_subcommand("bench", "run the full benchmark sweep");
  std::string bench_config;
  bench->add_option("--config", bench_config, "run config JSON")->required();

  // recover
  auto* recover = app.add_subcommand("recover", "frequency-recovery experiment");
  GraphSourceOptions recover_source;
  add_graph_source_options(recover, recover_source);
  std::string recover_model = "gcn";
  std::string recover_direction = "low_to_high";
  int recover_layers = 3, recover_hidden = 64, recover_epochs = 0;
  double recover_lr = 0.0, recover_width = 0.1;
  std::uint64_t recover_seed = 7;
  recover->add_option("--model", recover_model, "model kind");
  recover->add_option("--direction", recover_direction, "low_to_high|high_to_low");
  recover->add_option("--layers", recover_layers, "model depth");
  recover->add_option("--hidden", recover_hidden, "hidden width");
  recover->add_option("--epochs", recover_epochs, "override epoch count (default 2000)");
  recover->add_option("--lr", recover_lr, "override learning rate (default 2e-4)");
  recover->add_option("--seed", recover_seed, "experiment seed");
  recover->add_option("--bin-width", recover_width, "frequency bin width");

  // theory
  auto* theory = app.add_subcommand("theory", "verify the discretization theory bounds");
  int theory_n = 4;
  long long theory_k = 32, theory_samples = 1000;
  std::uint64_t theory_seed = 7;
  int theory_pairs = 10000;
  theory->add_option("--n", theory_n, "signal dimension (path-graph size)");
  theory->add_option("--k", theory_k, "discretization segment count");
  theory->add_option("--samples", theory_samples, "accepted oracle samples per eigenvector");
  theory->add_option("--seed", theory_seed, "oracle seed");
  theory->add_option("--lipschitz-pairs", theory_pairs, "random pairs for the Lipschitz check");

  // report
  auto* report = app.add_subcommand("report", "emit CSV tables and SVG plots from a store");
  std::string report_store;
  std::string report_rank_range = "full";
  report->add_option("--store", report_store, "results store (JSONL)")->required();
  report->add_option("--rank-range", report_rank_range, "range used for the ranking table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return 1;
  }

  try {
    if (decompose->parsed()) {
      return cmd_decompose(decompose_source, resolve_out_dir(out_dir, ""), basis_name,
                           decompose_width);
    }
    if (synth->parsed()) {
      return cmd_synth(synth_source, resolve_out_dir(out_dir, ""), synth_width, synth_classes,
                       synth_mode, synth_seed);
    }
    if (bench->parsed()) return cmd_bench(bench_config, out_dir);
    if (recover->parsed()) {
      return cmd_recover(recover_source, resolve_out_dir(out_dir, ""), recover_model,
                         recover_direction, recover_layers, recover_hidden, recover_epochs,
                         recover_lr, recover_seed, recover_width);
    }
    if (theory->parsed()) {
      return cmd_theory(theory_n, theory_k, theory_samples, theory_seed, theory_pairs);
    }
    if (report->parsed()) {
      return cmd_report(report_store, resolve_out_dir(out_dir, ""), report_rank_range);
    }
    emit_error("usage", "no subcommand given");
    return 1;
  } catch (const UsageError& e) {
    emit_error("usage", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    emit_error("usage", e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error("runtime", e.what());
    return 2;
  }
}
