#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "specbench/spectral.hpp"

namespace specbench {

// How a continuous node signal is mapped onto [-1, 1] before interval
// discretization.  maxabs_rescale divides by max|v_i| first: eigenvector
// entries scale like 1/sqrt(n), so without rescaling nearly every node of a
// large graph lands in the middle class.  unit_range discretizes the raw
// entries and requires them to lie in [-1, 1] already.
enum class DiscretizeMode { maxabs_rescale, unit_range };

std::string discretize_mode_name(DiscretizeMode mode);
DiscretizeMode parse_discretize_mode(const std::string& name);

// Node-class-label assignment: per-node class ids plus the equivalent
// one-hot matrix.
struct NCLMatrix {
  Eigen::VectorXi labels;   // length n, values in [0, num_classes)
  int num_classes = 0;
  Eigen::MatrixXd onehot;   // n x num_classes, exactly one 1 per row
};

// Splits [-1, 1] into num_classes equal intervals (last interval closed at
// 1) and labels each entry with its interval index.
NCLMatrix discretize(const Eigen::VectorXd& v, int num_classes, DiscretizeMode mode);

// Both sides of the energy-distribution Lipschitz inequality for unit
// vectors: lhs = ||e(v1) - e(v2)||_2, rhs = 2 ||v1 - v2||_2.  The library
// returns both so callers (tests, the CLI check) assert lhs <= rhs.
struct LipschitzGap {
  double lhs = 0.0;
  double rhs = 0.0;
};

LipschitzGap lipschitz_gap(const Eigen::VectorXd& v1, const Eigen::VectorXd& v2,
                           const SpectralBasis& basis);

// Worst-case deviation bounds for energy distributions of vectors sharing a
// label matrix at segment count k in dimension n.  Two variants are
// computed: the chord form 2 (4n/k^2)^(1/n), from the largest chord between
// unit vectors confined to one cell, and the Euclidean-diagonal form
// 4 sqrt(n)/k obtained by chaining the Lipschitz constant with the diagonal
// of a side-(2/k) hypercube cell.  Callers decide which to compare against;
// the oracle below is checked against both.
struct DeviationBound {
  int n = 0;
  long long k = 0;
  double chord_bound = 0.0;
  double euclidean_bound = 0.0;
};

DeviationBound ncl_deviation_bound(int n, long long k);

// Smallest segment count k whose chord_bound drops to eps or below,
// i.e. ceil(2 sqrt(n) (2/eps)^(n/2)) with an exact-boundary adjustment.
long long min_segments_for_tolerance(int n, double eps);

// Angular bound on the deviation between two unit vectors confined to one
// discretization cell: 2 arcsin( (1/2) (1/n)^(1/n) (2/k)^(2/n) ).
double max_center_angle_bound(int n, long long k);

// Empirical probe of the energy-distribution spread inside one label cell.
// Starting from unit vector v, coordinates are perturbed within v's
// per-entry discretization interval (scaled by radius_scale), renormalized,
// and kept only if the label matrix is unchanged.  Reports the worst
// observed energy deviation and angle from v across accepted samples.
struct EdfOracleResult {
  double max_deviation = 0.0;   // max ||e(u) - e(v)||_2
  double max_angle = 0.0;       // max angle between u and v, radians
  long long accepted = 0;
  long long proposed = 0;
  std::uint64_t seed = 0;
};

EdfOracleResult edf_deviation_oracle(const Eigen::VectorXd& v, int k, long long samples,
                                     std::uint64_t seed, const SpectralBasis& basis,
                                     double radius_scale = 1.0);

}  // namespace specbench
