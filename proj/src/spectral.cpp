#include "specbench/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "specbench/graph.hpp"
#include "specbench/hash.hpp"
#include "specbench/version.hpp"

namespace specbench {
namespace {

// Eigenvalues that are mathematically on a bin edge come out of the solver
// a few ulps low (e.g. the path-graph eigenvalue 1 as 1-1e-16) and would be
// assigned to the bin below.  Values this close to an upper edge are snapped
// onto it so the half-open membership rule sees the intended edge value.
constexpr double kEdgeSnap = 1e-9;

[[noreturn]] void fail(const std::string& message) { throw std::runtime_error(message); }

}  // namespace

std::vector<int> SpectralBins::nonempty_bins() const {
  std::vector<int> result;
  for (int b = 0; b < num_bins(); ++b) {
    if (!is_empty(b)) result.push_back(b);
  }
  return result;
}

const std::vector<int>& FrequencyRanges::of(RangeTag tag) const {
  switch (tag) {
    case RangeTag::low: return low;
    case RangeTag::mid: return mid;
    case RangeTag::high: return high;
    case RangeTag::full: break;
  }
  throw std::invalid_argument("FrequencyRanges::of: 'full' does not name a single range");
}

std::string range_tag_name(RangeTag tag) {
  switch (tag) {
    case RangeTag::low: return "low";
    case RangeTag::mid: return "mid";
    case RangeTag::high: return "high";
    case RangeTag::full: return "full";
  }
  throw std::invalid_argument("range_tag_name: bad tag");
}

RangeTag parse_range_tag(const std::string& name) {
  if (name == "low") return RangeTag::low;
  if (name == "mid") return RangeTag::mid;
  if (name == "high") return RangeTag::high;
  if (name == "full") return RangeTag::full;
  throw std::invalid_argument("unknown frequency range '" + name + "' (expected low|mid|high|full)");
}

SpectralBasis eigendecompose(const Eigen::MatrixXd& laplacian) {
  const auto n = laplacian.rows();
  if (n == 0 || laplacian.cols() != n) {
    throw std::invalid_argument("eigendecompose: matrix must be square and non-empty");
  }
  if (n > kMaxDenseNodes) {
    throw std::invalid_argument("eigendecompose: n exceeds the dense-solver limit of " +
                                std::to_string(kMaxDenseNodes));
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
  if (solver.info() != Eigen::Success) {
    fail("eigendecompose: solver failed to converge (n=" + std::to_string(n) +
         ", |L|_max=" + std::to_string(laplacian.cwiseAbs().maxCoeff()) + ")");
  }

  SpectralBasis basis;
  basis.eigenvalues = solver.eigenvalues();  // ascending
  basis.eigenvectors = solver.eigenvectors();

  // Deterministic sign: make the largest-magnitude entry of each column
  // positive, breaking magnitude ties by the lowest index.
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index row = 0; row < n; ++row) {
      const double mag = std::abs(basis.eigenvectors(row, col));
      if (mag > best) {
        best = mag;
        pivot = row;
      }
    }
    if (basis.eigenvectors(pivot, col) < 0.0) basis.eigenvectors.col(col) = -basis.eigenvectors.col(col);
  }
  return basis;
}

SpectralBins bin_eigenvectors(const SpectralBasis& basis, double width) {
  if (!(width > 0.0 && width <= 2.0)) {
    throw std::invalid_argument("bin_eigenvectors: width must lie in (0, 2]");
  }
  const int n = basis.n();

  // Edges j*width, with the last edge pinned to 2 so the bins exactly
  // partition [0, 2] even when width does not divide 2.
  int num_bins = static_cast<int>(std::ceil(2.0 / width - 1e-12));
  if (num_bins < 1) num_bins = 1;

  SpectralBins bins;
  bins.width = width;
  bins.edges.resize(static_cast<std::size_t>(num_bins) + 1);
  for (int j = 0; j <= num_bins; ++j) bins.edges[static_cast<std::size_t>(j)] = j * width;
  bins.edges.back() = 2.0;

  bins.counts.assign(static_cast<std::size_t>(num_bins), 0);
  bins.bin_of.assign(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::VectorXd> sums(static_cast<std::size_t>(num_bins));

  for (int i = 0; i < n; ++i) {
    double lambda = std::clamp(basis.eigenvalues[i], 0.0, 2.0);
    int bin = static_cast<int>(lambda / width);
    if (bin >= num_bins) bin = num_bins - 1;  // lambda == 2: last bin is closed
    // Snap values a hair below their upper edge onto it (see kEdgeSnap).
    if (bin + 1 < num_bins && bins.edges[static_cast<std::size_t>(bin) + 1] - lambda <= kEdgeSnap) {
      ++bin;
    }
    bins.bin_of[static_cast<std::size_t>(i)] = bin;
    bins.counts[static_cast<std::size_t>(bin)] += 1;
    auto& sum = sums[static_cast<std::size_t>(bin)];
    if (sum.size() == 0) sum = Eigen::VectorXd::Zero(n);
    sum += basis.eigenvectors.col(i);
  }

  bins.bin_mean.resize(static_cast<std::size_t>(num_bins));
  for (int b = 0; b < num_bins; ++b) {
    if (bins.counts[static_cast<std::size_t>(b)] > 0) {
      bins.bin_mean[static_cast<std::size_t>(b)] =
          sums[static_cast<std::size_t>(b)] / static_cast<double>(bins.counts[static_cast<std::size_t>(b)]);
    }
  }
  return bins;
}

FrequencyRanges frequency_thirds(const SpectralBins& bins) {
  const std::vector<int> nonempty = bins.nonempty_bins();
  const int count = static_cast<int>(nonempty.size());
  if (count < 3) {
    throw std::invalid_argument("frequency_thirds: need at least 3 non-empty bins, have " +
                                std::to_string(count));
  }
  // Contiguous groups; the remainder r gives one extra bin to the last r groups.
  const int base = count / 3;
  const int remainder = count % 3;
  const int size_low = base;
  const int size_mid = base + (remainder >= 2 ? 1 : 0);

  FrequencyRanges ranges;
  ranges.low.assign(nonempty.begin(), nonempty.begin() + size_low);
  ranges.mid.assign(nonempty.begin() + size_low, nonempty.begin() + size_low + size_mid);
  ranges.high.assign(nonempty.begin() + size_low + size_mid, nonempty.end());
  return ranges;
}

Eigen::VectorXd energy_distribution(const Eigen::VectorXd& v, const SpectralBasis& basis) {
  if (v.size() != basis.n()) {
    throw std::invalid_argument("energy_distribution: vector length does not match basis dimension");
  }
  const double norm_sq = v.squaredNorm();
  if (!(norm_sq > 1e-24)) {
    throw std::invalid_argument("energy_distribution: input vector is numerically zero");
  }
  const Eigen::VectorXd coeffs = basis.eigenvectors.transpose() * v;
  return coeffs.cwiseAbs2() / norm_sq;
}

Eigen::VectorXd binned_energy(const Eigen::VectorXd& energy, const SpectralBasis& basis,
                              const SpectralBins& bins) {
  if (energy.size() != basis.n() || energy.size() != static_cast<Eigen::Index>(bins.bin_of.size())) {
    throw std::invalid_argument("binned_energy: inconsistent dimensions");
  }
  Eigen::VectorXd per_bin = Eigen::VectorXd::Zero(bins.num_bins());
  for (Eigen::Index i = 0; i < energy.size(); ++i) {
    per_bin[bins.bin_of[static_cast<std::size_t>(i)]] += energy[i];
  }
  return per_bin;
}

double energy_in_bins(const Eigen::VectorXd& binned, const std::vector<int>& bins) {
  double total = 0.0;
  for (int b : bins) total += binned[b];
  return total;
}

namespace {

constexpr char kBasisMagic[8] = {'S', 'P', 'B', 'A', 'S', 'I', 'S', '\x01'};

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 4);
}

void write_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint32_t read_u32(std::ifstream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::ifstream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void save_basis(const SpectralBasis& basis, std::uint64_t graph_hash, const std::string& path) {
  const int n = basis.n();
  if (has_suffix(path, ".json")) {
    nlohmann::json doc;
    doc["format"] = "specbench-basis";
    doc["version"] = kBasisCacheVersion;
    doc["sign_convention"] = kSignConventionVersion;
    doc["graph_hash"] = hash_hex(graph_hash);
    doc["n"] = n;
    doc["eigenvalues"] = std::vector<double>(basis.eigenvalues.data(), basis.eigenvalues.data() + n);
    nlohmann::json cols = nlohmann::json::array();
    for (int c = 0; c < n; ++c) {
      cols.push_back(std::vector<double>(basis.eigenvectors.col(c).data(),
                                         basis.eigenvectors.col(c).data() + n));
    }
    doc["eigenvectors"] = std::move(cols);
    std::ofstream out(path);
    if (!out) fail("cannot write basis cache '" + path + "'");
    out << doc.dump(2) << "\n";
    if (!out) fail("failed while writing basis cache '" + path + "'");
    return;
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write basis cache '" + path + "'");
  out.write(kBasisMagic, sizeof(kBasisMagic));
  write_u32(out, static_cast<std::uint32_t>(kBasisCacheVersion));
  write_u32(out, static_cast<std::uint32_t>(kSignConventionVersion));
  write_u64(out, graph_hash);
  write_u32(out, static_cast<std::uint32_t>(n));
  for (int i = 0; i < n; ++i) write_u64(out, std::bit_cast<std::uint64_t>(basis.eigenvalues[i]));
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) write_u64(out, std::bit_cast<std::uint64_t>(basis.eigenvectors(r, c)));
  }
  if (!out) fail("failed while writing basis cache '" + path + "'");
}

SpectralBasis load_basis(const std::string& path, std::uint64_t expected_graph_hash) {
  if (has_suffix(path, ".json")) {
    std::ifstream in(path);
    if (!in) fail("cannot open basis cache '" + path + "'");
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      fail("basis cache '" + path + "' is not valid JSON: " + e.what());
    }
    if (doc.value("format", "") != "specbench-basis") fail("'" + path + "' is not a basis cache");
    if (doc.value("version", -1) != kBasisCacheVersion) {
      fail("basis cache '" + path + "' uses an unsupported container version");
    }
    if (doc.value("sign_convention", -1) != kSignConventionVersion) {
      fail("basis cache '" + path + "' was written under a different sign convention");
    }
    if (doc.value("graph_hash", "") != hash_hex(expected_graph_hash)) {
      fail("basis cache '" + path + "' was computed for a different graph (hash mismatch)");
    }
    const int n = doc.at("n").get<int>();
    SpectralBasis basis;
    basis.eigenvalues.resize(n);
    basis.eigenvectors.resize(n, n);
    const auto& evals = doc.at("eigenvalues");
    const auto& evecs = doc.at("eigenvectors");
    if (static_cast<int>(evals.size()) != n || static_cast<int>(evecs.size()) != n) {
      fail("basis cache '" + path + "' has inconsistent dimensions");
    }
    for (int i = 0; i < n; ++i) basis.eigenvalues[i] = evals[static_cast<std::size_t>(i)].get<double>();
    for (int c = 0; c < n; ++c) {
      const auto& col = evecs[static_cast<std::size_t>(c)];
      if (static_cast<int>(col.size()) != n) fail("basis cache '" + path + "' has a malformed column");
      for (int r = 0; r < n; ++r) basis.eigenvectors(r, c) = col[static_cast<std::size_t>(r)].get<double>();
    }
    return basis;
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open basis cache '" + path + "'");
  char magic[sizeof(kBasisMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kBasisMagic, sizeof(magic)) != 0) {
    fail("'" + path + "' is not a basis cache (bad magic)");
  }
  if (read_u32(in) != static_cast<std::uint32_t>(kBasisCacheVersion)) {
    fail("basis cache '" + path + "' uses an unsupported container version");
  }
  if (read_u32(in) != static_cast<std::uint32_t>(kSignConventionVersion)) {
    fail("basis cache '" + path + "' was written under a different sign convention");
  }
  if (read_u64(in) != expected_graph_hash) {
    fail("basis cache '" + path + "' was computed for a different graph (hash mismatch)");
  }
  const int n = static_cast<int>(read_u32(in));
  if (n <= 0 || n > kMaxDenseNodes) fail("basis cache '" + path + "' has an invalid dimension");
  SpectralBasis basis;
  basis.eigenvalues.resize(n);
  basis.eigenvectors.resize(n, n);
  for (int i = 0; i < n; ++i) basis.eigenvalues[i] = std::bit_cast<double>(read_u64(in));
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) basis.eigenvectors(r, c) = std::bit_cast<double>(read_u64(in));
  }
  if (!in) fail("basis cache '" + path + "' is truncated");
  return basis;
}

}  // namespace specbench
