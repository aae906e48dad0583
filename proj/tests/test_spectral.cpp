#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "specbench/graph.hpp"
#include "specbench/rng.hpp"
#include "specbench/spectral.hpp"
#include "test_util.hpp"

using namespace specbench;

namespace {

SpectralBasis path_basis(int n) { return eigendecompose(normalized_laplacian(generate_path(n))); }

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("path graph on three nodes has eigenvalues 0, 1, 2") {
  const SpectralBasis basis = path_basis(3);
  REQUIRE(basis.n() == 3);
  CHECK(std::abs(basis.eigenvalues[0] - 0.0) <= 1e-10);
  CHECK(std::abs(basis.eigenvalues[1] - 1.0) <= 1e-10);
  CHECK(std::abs(basis.eigenvalues[2] - 2.0) <= 1e-10);
}

TEST_CASE("the zero eigenvector is the normalized sqrt-degree vector") {
  const Graph g = generate_path(3);
  const SpectralBasis basis = eigendecompose(normalized_laplacian(g));
  Eigen::VectorXd expected(3);
  expected << 1.0, std::sqrt(2.0), 1.0;
  expected /= expected.norm();
  CHECK((basis.eigenvectors.col(0) - expected).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("eigendecomposition is orthonormal with a small residual") {
  const Graph g = generate_sbm({{10, 10, 12}, 0.4, 0.1}, 3);
  const Eigen::MatrixXd lap = normalized_laplacian(g);
  const SpectralBasis basis = eigendecompose(lap);

  const Eigen::MatrixXd gram = basis.eigenvectors.transpose() * basis.eigenvectors;
  CHECK((gram - Eigen::MatrixXd::Identity(g.n, g.n)).cwiseAbs().maxCoeff() <= 1e-8);

  const Eigen::MatrixXd residual =
      lap * basis.eigenvectors - basis.eigenvectors * basis.eigenvalues.asDiagonal();
  CHECK(residual.cwiseAbs().maxCoeff() <= 1e-8);

  CHECK(basis.eigenvalues.minCoeff() >= -1e-10);
  CHECK(basis.eigenvalues.maxCoeff() <= 2.0 + 1e-10);
}

TEST_CASE("repeated decompositions are bit-identical") {
  const Eigen::MatrixXd lap = normalized_laplacian(generate_sbm({{12, 12}, 0.4, 0.1}, 9));
  const SpectralBasis a = eigendecompose(lap);
  const SpectralBasis b = eigendecompose(lap);
  CHECK((a.eigenvalues.array() == b.eigenvalues.array()).all());
  CHECK((a.eigenvectors.array() == b.eigenvectors.array()).all());
}

TEST_CASE("eigendecompose validates its input") {
  CHECK_THROWS_AS(eigendecompose(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(eigendecompose(Eigen::MatrixXd()), std::invalid_argument);
}

TEST_CASE("bins cover [0, 2] and snap near-edge eigenvalues upward") {
  const SpectralBasis basis = path_basis(3);
  const SpectralBins bins = bin_eigenvectors(basis, 0.1);

  CHECK(bins.num_bins() == 20);
  CHECK(bins.edges.front() == 0.0);
  CHECK(bins.edges.back() == 2.0);

  // Eigenvalue 1 computes as 1 +- a few ulps; it must land in [1.0, 1.1),
  // not the bin below.  Eigenvalue 2 lands in the final, closed bin.
  CHECK(bins.nonempty_bins() == std::vector<int>{0, 10, 19});
  CHECK(bins.bin_of == std::vector<int>{0, 10, 19});
  CHECK(bins.counts[0] == 1);
  CHECK(bins.counts[10] == 1);
  CHECK(bins.counts[19] == 1);
  CHECK(bins.center(0) == doctest::Approx(0.05));

  for (int b = 0; b < bins.num_bins(); ++b) {
    if (bins.is_empty(b)) {
      CHECK(bins.bin_mean[static_cast<std::size_t>(b)].size() == 0);
    } else {
      CHECK(bins.bin_mean[static_cast<std::size_t>(b)].size() == 3);
    }
  }
}

TEST_CASE("bin means average the member eigenvectors") {
  const SpectralBasis basis = path_basis(8);
  const SpectralBins bins = bin_eigenvectors(basis, 2.0);
  REQUIRE(bins.num_bins() == 1);
  CHECK(bins.counts[0] == 8);
  const Eigen::VectorXd expected = basis.eigenvectors.rowwise().mean();
  CHECK((bins.bin_mean[0] - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("bin width is validated") {
  const SpectralBasis basis = path_basis(3);
  CHECK_THROWS_AS(bin_eigenvectors(basis, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(bin_eigenvectors(basis, 2.5), std::invalid_argument);
}

TEST_CASE("frequency thirds hand the remainder to the later groups") {
  SpectralBins bins;
  auto with_nonempty = [&](int count) {
    bins.counts.assign(static_cast<std::size_t>(count), 1);
    return frequency_thirds(bins);
  };

  FrequencyRanges r = with_nonempty(20);
  CHECK(r.low.size() == 6);
  CHECK(r.mid.size() == 7);
  CHECK(r.high.size() == 7);
  CHECK(r.low.front() == 0);
  CHECK(r.high.back() == 19);

  r = with_nonempty(5);
  CHECK(r.low == std::vector<int>{0});
  CHECK(r.mid == std::vector<int>{1, 2});
  CHECK(r.high == std::vector<int>{3, 4});

  r = with_nonempty(3);
  CHECK(r.low.size() == 1);
  CHECK(r.mid.size() == 1);
  CHECK(r.high.size() == 1);

  bins.counts = {1, 0, 1};  // only two non-empty bins
  CHECK_THROWS_WITH_AS(frequency_thirds(bins), doctest::Contains("at least 3"),
                       std::invalid_argument);
}

TEST_CASE("range tags round trip through their names") {
  for (RangeTag tag : {RangeTag::low, RangeTag::mid, RangeTag::high, RangeTag::full}) {
    CHECK(parse_range_tag(range_tag_name(tag)) == tag);
  }
  CHECK_THROWS_AS(parse_range_tag("ultra"), std::invalid_argument);
  CHECK_THROWS_AS(FrequencyRanges{}.of(RangeTag::full), std::invalid_argument);
}

TEST_CASE("energy of an eigenvector is a one-hot distribution") {
  const SpectralBasis basis = path_basis(8);
  for (int i = 0; i < basis.n(); ++i) {
    const Eigen::VectorXd e = energy_distribution(basis.eigenvectors.col(i), basis);
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(8);
    expected[i] = 1.0;
    CHECK((e - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("energy of an eigenvector superposition splits evenly") {
  const SpectralBasis basis = path_basis(6);
  const Eigen::VectorXd v =
      (basis.eigenvectors.col(0) + basis.eigenvectors.col(1)) / std::sqrt(2.0);
  const Eigen::VectorXd e = energy_distribution(v, basis);
  CHECK(e[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(e[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(e.tail(4).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("energy distributions are normalized, nonnegative and scale invariant") {
  const Graph g = generate_sbm({{16, 16}, 0.4, 0.1}, 21);
  REQUIRE(g.n == 32);
  const SpectralBasis basis = eigendecompose(normalized_laplacian(g));
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd v(g.n);
    for (int i = 0; i < g.n; ++i) v[i] = rng.normal();
    const Eigen::VectorXd e = energy_distribution(v, basis);
    CHECK(e.minCoeff() >= 0.0);
    CHECK(std::abs(e.sum() - 1.0) <= 1e-12);
    const Eigen::VectorXd e_scaled = energy_distribution(3.7 * v, basis);
    CHECK((e - e_scaled).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("the zero vector has no energy distribution") {
  const SpectralBasis basis = path_basis(4);
  CHECK_THROWS_WITH_AS(energy_distribution(Eigen::VectorXd::Zero(4), basis),
                       doctest::Contains("zero"), std::invalid_argument);
  CHECK_THROWS_AS(energy_distribution(Eigen::VectorXd::Ones(5), basis), std::invalid_argument);
}

TEST_CASE("binned energy sums the distribution per bin") {
  const SpectralBasis basis = path_basis(3);
  const SpectralBins bins = bin_eigenvectors(basis, 0.1);
  const Eigen::VectorXd v =
      (basis.eigenvectors.col(0) + basis.eigenvectors.col(2)) / std::sqrt(2.0);
  const Eigen::VectorXd binned = binned_energy(energy_distribution(v, basis), basis, bins);
  REQUIRE(binned.size() == 20);
  CHECK(binned[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(binned[19] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(binned.sum() - 1.0) <= 1e-12);
  CHECK(energy_in_bins(binned, {0, 19}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(energy_in_bins(binned, {5, 6}) == doctest::Approx(0.0));
}

TEST_CASE("basis caches round trip exactly in both formats") {
  const Graph g = generate_path(6);
  const SpectralBasis basis = eigendecompose(normalized_laplacian(g));
  const std::uint64_t hash = graph_hash(g);

  for (const char* name : {"basis.json", "basis.bin"}) {
    CAPTURE(name);
    const std::string path = testutil::scratch_file(name);
    save_basis(basis, hash, path);
    const SpectralBasis loaded = load_basis(path, hash);
    CHECK((loaded.eigenvalues.array() == basis.eigenvalues.array()).all());
    CHECK((loaded.eigenvectors.array() == basis.eigenvectors.array()).all());
  }
}

TEST_CASE("basis caches refuse a mismatched graph hash") {
  const Graph g = generate_path(5);
  const SpectralBasis basis = eigendecompose(normalized_laplacian(g));
  const std::string path = testutil::scratch_file("basis_wrong.json");
  save_basis(basis, graph_hash(g), path);
  CHECK_THROWS_WITH_AS(load_basis(path, graph_hash(g) + 1), doctest::Contains("hash mismatch"),
                       std::runtime_error);
  CHECK_THROWS_AS(load_basis(testutil::scratch_file("missing.bin"), 0), std::runtime_error);
}

TEST_CASE("non-cache files are rejected") {
  const std::string path = testutil::scratch_file("not_a_cache.bin");
  testutil::write_file(path, "this is not a basis cache at all");
  CHECK_THROWS_WITH_AS(load_basis(path, 0), doctest::Contains("bad magic"), std::runtime_error);

  const std::string json_path = testutil::scratch_file("not_a_cache.json");
  testutil::write_file(json_path, "{\"format\": \"something-else\"}");
  CHECK_THROWS_WITH_AS(load_basis(json_path, 0), doctest::Contains("not a basis cache"),
                       std::runtime_error);
}

}  // TEST_SUITE("spectral")
