#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace specbench {

// Eigendecomposition of a normalized Laplacian.  Column i of `eigenvectors`
// is the unit eigenvector for `eigenvalues[i]`; eigenvalues ascend.  Each
// column's sign is fixed so that its largest-magnitude entry (ties: lowest
// index) is positive, which makes repeated decompositions bit-identical.
struct SpectralBasis {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;

  int n() const { return static_cast<int>(eigenvalues.size()); }
};

SpectralBasis eigendecompose(const Eigen::MatrixXd& laplacian);

// Fixed-width eigenvalue bins covering [0, 2].  Bins are half-open
// [edge_k, edge_{k+1}) except the last, which is closed at 2.  Each
// non-empty bin carries the arithmetic mean of its member eigenvectors;
// empty bins carry a size-0 vector.
struct SpectralBins {
  double width = 0.1;
  std::vector<double> edges;               // num_bins() + 1 boundaries
  std::vector<int> counts;                 // members per bin
  std::vector<Eigen::VectorXd> bin_mean;   // mean eigenvector per bin
  std::vector<int> bin_of;                 // bin index per eigen index

  int num_bins() const { return static_cast<int>(counts.size()); }
  bool is_empty(int bin) const { return counts[static_cast<std::size_t>(bin)] == 0; }
  double center(int bin) const {
    return 0.5 * (edges[static_cast<std::size_t>(bin)] + edges[static_cast<std::size_t>(bin) + 1]);
  }
  std::vector<int> nonempty_bins() const;
};

SpectralBins bin_eigenvectors(const SpectralBasis& basis, double width = 0.1);

// Contiguous low/mid/high partition of the non-empty bin indices.  When the
// count is not divisible by 3, the extra bins go to the later groups.
enum class RangeTag { low, mid, high, full };

std::string range_tag_name(RangeTag tag);
RangeTag parse_range_tag(const std::string& name);

struct FrequencyRanges {
  std::vector<int> low;
  std::vector<int> mid;
  std::vector<int> high;

  const std::vector<int>& of(RangeTag tag) const;
};

FrequencyRanges frequency_thirds(const SpectralBins& bins);

// Energy distribution of a signal: squared projections onto the eigenbasis,
// normalized by the squared norm.  Nonnegative, sums to 1.
Eigen::VectorXd energy_distribution(const Eigen::VectorXd& v, const SpectralBasis& basis);

// Per-bin sums of an energy distribution.
Eigen::VectorXd binned_energy(const Eigen::VectorXd& energy, const SpectralBasis& basis,
                              const SpectralBins& bins);

// Fraction of binned energy falling in the given bin set.
double energy_in_bins(const Eigen::VectorXd& binned, const std::vector<int>& bins);

// Basis cache.  Format chosen by extension: ".json" for a readable JSON
// container, anything else for the compact binary layout.  Both embed the
// source-graph hash and the sign-convention version; load_basis refuses a
// cache whose hash does not match `expected_graph_hash`.
void save_basis(const SpectralBasis& basis, std::uint64_t graph_hash, const std::string& path);
SpectralBasis load_basis(const std::string& path, std::uint64_t expected_graph_hash);

}  // namespace specbench
