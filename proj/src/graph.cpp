#include "specbench/graph.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "specbench/hash.hpp"
#include "specbench/rng.hpp"

namespace specbench {
namespace {

[[noreturn]] void fail(const std::string& message) {
  throw std::runtime_error(message);
}

bool parse_ll(std::string_view token, long long& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_double(std::string_view token, double& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

void check_node_budget(long long n, const std::string& origin) {
  if (n > kMaxDenseNodes) {
    fail(origin + ": graph has " + std::to_string(n) + " nodes, exceeding the dense-solver limit of " +
         std::to_string(kMaxDenseNodes));
  }
}

void finalize_edges(Graph& graph) {
  std::sort(graph.edges.begin(), graph.edges.end());
  graph.edges.erase(std::unique(graph.edges.begin(), graph.edges.end()), graph.edges.end());
}

}  // namespace

// Topological equality: id space and edge set.  Attached features are
// payload, not identity, and are deliberately ignored here.
bool operator==(const Graph& a, const Graph& b) {
  return a.n == b.n && a.edges == b.edges;
}

LoadReport load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open edge list '" + path + "'");

  LoadReport report;
  std::set<std::pair<long long, long long>> edge_set;
  std::set<long long> loop_only_candidates;
  std::set<long long> connected_ids;
  std::string line;
  long long line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;

    std::istringstream tokens{std::string(stripped)};
    std::string a, b, extra;
    tokens >> a >> b;
    if (b.empty() || (tokens >> extra)) {
      fail(path + ":" + std::to_string(line_no) + ": malformed edge line (expected two node ids): '" + line + "'");
    }
    long long u = 0, v = 0;
    if (!parse_ll(a, u) || !parse_ll(b, v)) {
      fail(path + ":" + std::to_string(line_no) + ": node ids must be integers: '" + line + "'");
    }
    if (u == v) {
      ++report.self_loops_dropped;
      loop_only_candidates.insert(u);
      continue;
    }
    if (u > v) std::swap(u, v);
    if (!edge_set.insert({u, v}).second) {
      ++report.duplicate_edges_dropped;
      continue;
    }
    connected_ids.insert(u);
    connected_ids.insert(v);
  }

  for (long long id : connected_ids) loop_only_candidates.insert(id);
  report.original_ids.assign(loop_only_candidates.begin(), loop_only_candidates.end());

  if (edge_set.empty()) {
    fail(path + ": no usable edges after dropping self loops and duplicates");
  }

  report.isolated_nodes_dropped =
      static_cast<long long>(report.original_ids.size() - connected_ids.size());
  if (report.isolated_nodes_dropped > 0) {
    report.warnings.push_back("dropped " + std::to_string(report.isolated_nodes_dropped) +
                              " node(s) that only appeared in self loops");
  }
  if (report.self_loops_dropped > 0) {
    report.warnings.push_back("dropped " + std::to_string(report.self_loops_dropped) + " self loop(s)");
  }
  if (report.duplicate_edges_dropped > 0) {
    report.warnings.push_back("dropped " + std::to_string(report.duplicate_edges_dropped) +
                              " duplicate edge(s)");
  }

  check_node_budget(static_cast<long long>(connected_ids.size()), path);

  std::map<long long, int> dense;
  for (long long id : connected_ids) {
    const int next = static_cast<int>(dense.size());
    dense.emplace(id, next);
  }
  report.remap.reserve(dense.size());
  for (const auto& [orig, idx] : dense) report.remap.emplace_back(orig, idx);

  report.graph.n = static_cast<int>(dense.size());
  report.graph.edges.reserve(edge_set.size());
  for (const auto& [u, v] : edge_set) {
    report.graph.edges.emplace_back(dense.at(u), dense.at(v));
  }
  finalize_edges(report.graph);
  return report;
}

void save_edge_list(const Graph& graph, const std::string& path) {
  save_edge_list(graph, path, {});
}

void save_edge_list(const Graph& graph, const std::string& path,
                    const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) fail("cannot write edge list '" + path + "'");
  for (const std::string& c : comments) out << "# " << c << "\n";
  for (const auto& [a, b] : graph.edges) out << a << " " << b << "\n";
  if (!out) fail("failed while writing edge list '" + path + "'");
}

void save_remap_csv(const LoadReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot write remap table '" + path + "'");
  out << "original_id,dense_id\n";
  for (const auto& [orig, dense] : report.remap) out << orig << "," << dense << "\n";
  if (!out) fail("failed while writing remap table '" + path + "'");
}

Graph load_features(const std::string& path, const LoadReport& loaded) {
  std::ifstream in(path);
  if (!in) fail("cannot open feature CSV '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::string line;
  long long line_no = 0;
  bool first_content_row = true;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view stripped = trim(line);
    if (stripped.empty()) continue;

    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss{std::string(stripped)};
    while (std::getline(ss, cell, ',')) cells.push_back(std::string(trim(cell)));
    if (!stripped.empty() && stripped.back() == ',') cells.push_back("");

    std::vector<double> values(cells.size());
    bool numeric = true;
    std::size_t bad_col = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_double(cells[c], values[c])) {
        numeric = false;
        bad_col = c;
        break;
      }
    }
    if (!numeric) {
      if (first_content_row) {
        first_content_row = false;  // header row, skip
        continue;
      }
      fail(path + ":" + std::to_string(line_no) + ": non-numeric feature value in column " +
           std::to_string(bad_col + 1));
    }
    first_content_row = false;
    if (!rows.empty() && values.size() != rows.front().size()) {
      fail(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(rows.front().size()) +
           " columns, found " + std::to_string(values.size()));
    }
    rows.push_back(std::move(values));
  }

  if (rows.empty()) fail(path + ": feature CSV contains no data rows");
  if (rows.size() != loaded.original_ids.size()) {
    fail(path + ": feature CSV has " + std::to_string(rows.size()) + " rows but the edge list defined " +
         std::to_string(loaded.original_ids.size()) + " nodes");
  }

  const int feature_dim = static_cast<int>(rows.front().size());
  Graph result = loaded.graph;
  Eigen::MatrixXd features(result.n, feature_dim);
  for (const auto& [orig, dense] : loaded.remap) {
    const auto it = std::lower_bound(loaded.original_ids.begin(), loaded.original_ids.end(), orig);
    assert(it != loaded.original_ids.end() && *it == orig);
    const auto row = static_cast<std::size_t>(it - loaded.original_ids.begin());
    for (int c = 0; c < feature_dim; ++c) features(dense, c) = rows[row][static_cast<std::size_t>(c)];
  }
  result.features = std::move(features);
  return result;
}

Graph with_identity_features(const Graph& graph) {
  Graph result = graph;
  result.features = Eigen::MatrixXd::Identity(graph.n, graph.n);
  return result;
}

Graph generate_path(int n) {
  if (n < 2) throw std::invalid_argument("path graph requires n >= 2");
  check_node_budget(n, "generate_path");
  Graph g;
  g.n = n;
  for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
  return g;
}

Graph generate_cycle(int n) {
  if (n < 3) throw std::invalid_argument("cycle graph requires n >= 3");
  check_node_budget(n, "generate_cycle");
  Graph g;
  g.n = n;
  for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
  g.edges.emplace_back(0, n - 1);
  finalize_edges(g);
  return g;
}

Graph generate_star(int n) {
  if (n < 2) throw std::invalid_argument("star graph requires n >= 2");
  check_node_budget(n, "generate_star");
  Graph g;
  g.n = n;
  for (int i = 1; i < n; ++i) g.edges.emplace_back(0, i);
  return g;
}

Graph generate_sbm(const SbmParams& params, std::uint64_t seed) {
  if (params.block_sizes.empty()) throw std::invalid_argument("SBM needs at least one block");
  long long total = 0;
  for (int size : params.block_sizes) {
    if (size <= 0) throw std::invalid_argument("SBM block sizes must be positive");
    total += size;
  }
  if (total < 2) throw std::invalid_argument("SBM needs at least two nodes");
  check_node_budget(total, "generate_sbm");
  for (double p : {params.p_in, params.p_out}) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("SBM probabilities must lie in [0, 1]");
  }

  const int n = static_cast<int>(total);
  std::vector<int> block_of(static_cast<std::size_t>(n));
  {
    int node = 0;
    for (std::size_t b = 0; b < params.block_sizes.size(); ++b) {
      for (int k = 0; k < params.block_sizes[b]; ++k) block_of[static_cast<std::size_t>(node++)] = static_cast<int>(b);
    }
  }

  // One uniform draw per pair, in a fixed (i, j) order, so the generated
  // graph is a pure function of the seed.
  Rng rng(mix_seed(seed, "sbm"));
  Graph g;
  g.n = n;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = block_of[static_cast<std::size_t>(i)] == block_of[static_cast<std::size_t>(j)]
                           ? params.p_in
                           : params.p_out;
      if (rng.uniform() < p) g.edges.emplace_back(i, j);
    }
  }

  // Compact away isolated nodes (possible at small p), keeping node order.
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const auto& [a, b] : g.edges) {
    seen[static_cast<std::size_t>(a)] = 1;
    seen[static_cast<std::size_t>(b)] = 1;
  }
  std::vector<int> dense(static_cast<std::size_t>(n), -1);
  int kept = 0;
  for (int i = 0; i < n; ++i) {
    if (seen[static_cast<std::size_t>(i)]) dense[static_cast<std::size_t>(i)] = kept++;
  }
  if (kept == 0) fail("generate_sbm: all nodes isolated; increase p_in/p_out");
  if (kept < n) {
    for (auto& [a, b] : g.edges) {
      a = dense[static_cast<std::size_t>(a)];
      b = dense[static_cast<std::size_t>(b)];
    }
    g.n = kept;
  }
  finalize_edges(g);
  return g;
}

Graph generate_graph(const GeneratorSpec& spec) {
  if (spec.kind == "path") return generate_path(spec.n);
  if (spec.kind == "cycle") return generate_cycle(spec.n);
  if (spec.kind == "star") return generate_star(spec.n);
  if (spec.kind == "sbm") return generate_sbm(spec.sbm, spec.seed);
  throw std::invalid_argument("unknown graph generator '" + spec.kind + "'");
}

Eigen::VectorXi degree_vector(const Graph& graph) {
  Eigen::VectorXi degrees = Eigen::VectorXi::Zero(graph.n);
  for (const auto& [a, b] : graph.edges) {
    degrees[a] += 1;
    degrees[b] += 1;
  }
  return degrees;
}

Eigen::MatrixXd adjacency_matrix(const Graph& graph) {
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(graph.n, graph.n);
  for (const auto& [a, b] : graph.edges) {
    adj(a, b) = 1.0;
    adj(b, a) = 1.0;
  }
  return adj;
}

Eigen::MatrixXd normalized_laplacian(const Graph& graph) {
  const Eigen::VectorXi degrees = degree_vector(graph);
  for (int i = 0; i < graph.n; ++i) {
    if (degrees[i] == 0) {
      fail("normalized_laplacian: node " + std::to_string(i) + " has degree zero");
    }
  }
  Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(graph.n, graph.n);
  for (const auto& [a, b] : graph.edges) {
    const double w = -1.0 / std::sqrt(static_cast<double>(degrees[a]) * static_cast<double>(degrees[b]));
    lap(a, b) = w;
    lap(b, a) = w;
  }
  return lap;
}

Eigen::MatrixXd normalized_adjacency_with_self_loops(const Graph& graph) {
  Eigen::VectorXd degrees_hat = Eigen::VectorXd::Ones(graph.n);  // self loop
  for (const auto& [a, b] : graph.edges) {
    degrees_hat[a] += 1.0;
    degrees_hat[b] += 1.0;
  }
  const Eigen::VectorXd inv_sqrt = degrees_hat.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd norm = Eigen::MatrixXd::Zero(graph.n, graph.n);
  for (int i = 0; i < graph.n; ++i) norm(i, i) = inv_sqrt[i] * inv_sqrt[i];
  for (const auto& [a, b] : graph.edges) {
    const double w = inv_sqrt[a] * inv_sqrt[b];
    norm(a, b) = w;
    norm(b, a) = w;
  }
  return norm;
}

Eigen::MatrixXd mean_neighbor_matrix(const Graph& graph) {
  const Eigen::VectorXi degrees = degree_vector(graph);
  for (int i = 0; i < graph.n; ++i) {
    if (degrees[i] == 0) {
      fail("mean_neighbor_matrix: node " + std::to_string(i) + " has degree zero");
    }
  }
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(graph.n, graph.n);
  for (const auto& [a, b] : graph.edges) {
    mean(a, b) = 1.0 / degrees[a];
    mean(b, a) = 1.0 / degrees[b];
  }
  return mean;
}

std::uint64_t graph_hash(const Graph& graph) {
  Fnv1a h;
  h.str("specbench-graph-v1");
  h.i64(graph.n);
  h.i64(graph.num_edges());
  for (const auto& [a, b] : graph.edges) {
    h.i64(a);
    h.i64(b);
  }
  return h.digest();
}

}  // namespace specbench
