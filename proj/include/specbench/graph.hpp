#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace specbench {

// Hard cap on graph size.  Everything downstream does dense linear algebra
// (full eigendecomposition, dense propagation operators), which is cubic in
// n; beyond a few thousand nodes runtime and memory blow up, so the loaders
// and generators refuse larger graphs instead of grinding.
inline constexpr int kMaxDenseNodes = 5000;

// Undirected simple graph with dense contiguous node ids 0..n-1.
// Edges are stored once each as (a, b) with a < b, sorted, no duplicates,
// no self loops.  Construction goes through the loaders / generators which
// enforce these invariants.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::optional<Eigen::MatrixXd> features;  // n x F, optional

  int num_edges() const { return static_cast<int>(edges.size()); }
  bool has_features() const { return features.has_value(); }
  int feature_dim() const {
    return has_features() ? static_cast<int>(features->cols()) : 0;
  }
};

bool operator==(const Graph& a, const Graph& b);

// Result of parsing an edge-list file: the cleaned graph plus everything
// needed to trace dense ids back to the ids used in the file.
struct LoadReport {
  Graph graph;
  // All distinct node ids seen in the file, ascending (including ids later
  // dropped as isolated).  Feature CSV rows are matched against this order.
  std::vector<long long> original_ids;
  // (original_id, dense_id) for retained nodes, ascending by original id.
  std::vector<std::pair<long long, int>> remap;
  long long self_loops_dropped = 0;
  long long duplicate_edges_dropped = 0;
  long long isolated_nodes_dropped = 0;
  std::vector<std::string> warnings;
};

// Parses a whitespace-separated edge list.  Lines starting with '#' and
// blank lines are skipped.  Node ids must be integers; they are remapped to
// dense 0..n-1 by ascending original id.  Self loops and duplicate edges are
// dropped (counted), as are nodes left without any edge.
LoadReport load_edge_list(const std::string& path);

// Writes "a b" lines (canonical edge order), optionally preceded by '#'
// comment lines.  Loading the output again yields a graph equal to the input.
void save_edge_list(const Graph& graph, const std::string& path);
void save_edge_list(const Graph& graph, const std::string& path,
                    const std::vector<std::string>& comments);

// Writes the id remap as CSV with header "original_id,dense_id".
void save_remap_csv(const LoadReport& report, const std::string& path);

// Parses a numeric CSV of node features.  A header row is auto-detected
// (first row with any non-numeric cell).  Row i corresponds to the i-th
// smallest original node id; rows for dropped nodes are discarded and the
// rest are placed at their dense ids.  Returns a copy of the graph with
// features attached.
Graph load_features(const std::string& path, const LoadReport& loaded);

// Returns a copy of the graph with identity-matrix features (F = n).
Graph with_identity_features(const Graph& graph);

// Deterministic generators. ------------------------------------------------

Graph generate_path(int n);    // n >= 2
Graph generate_cycle(int n);   // n >= 3
Graph generate_star(int n);    // n >= 2, node 0 is the hub

struct SbmParams {
  std::vector<int> block_sizes;
  double p_in = 0.0;
  double p_out = 0.0;
};

// Stochastic block model: each intra-block pair is an edge with probability
// p_in, each inter-block pair with probability p_out.  Nodes that end up
// isolated are dropped and the remaining ids compacted (order preserved).
Graph generate_sbm(const SbmParams& params, std::uint64_t seed);

// Generator selector used by the CLI ("path" | "cycle" | "star" | "sbm").
struct GeneratorSpec {
  std::string kind;
  int n = 0;                // path / cycle / star
  SbmParams sbm;            // sbm
  std::uint64_t seed = 0;   // sbm only
};

Graph generate_graph(const GeneratorSpec& spec);

// Dense matrices. ------------------------------------------------------------

Eigen::VectorXi degree_vector(const Graph& graph);
Eigen::MatrixXd adjacency_matrix(const Graph& graph);

// Symmetric normalized Laplacian L = I - D^{-1/2} A D^{-1/2}.
// Requires every node to have degree >= 1.
Eigen::MatrixXd normalized_laplacian(const Graph& graph);

// GCN propagation operator: add self loops, then symmetrically normalize:
// D_hat^{-1/2} (A + I) D_hat^{-1/2}.  Well defined for isolated nodes.
Eigen::MatrixXd normalized_adjacency_with_self_loops(const Graph& graph);

// Row-normalized adjacency D^{-1} A (mean over neighbors).
// Requires every node to have degree >= 1.
Eigen::MatrixXd mean_neighbor_matrix(const Graph& graph);

// Content hash over n and the canonical edge list.  Used to key cached
// eigendecompositions and to detect graph/cache mismatches.
std::uint64_t graph_hash(const Graph& graph);

}  // namespace specbench
