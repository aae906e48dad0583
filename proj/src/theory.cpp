#include "specbench/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "specbench/rng.hpp"

namespace specbench {

std::string discretize_mode_name(DiscretizeMode mode) {
  return mode == DiscretizeMode::maxabs_rescale ? "maxabs_rescale" : "unit_range";
}

DiscretizeMode parse_discretize_mode(const std::string& name) {
  if (name == "maxabs_rescale") return DiscretizeMode::maxabs_rescale;
  if (name == "unit_range") return DiscretizeMode::unit_range;
  throw std::invalid_argument("unknown discretize mode '" + name +
                              "' (expected maxabs_rescale|unit_range)");
}

NCLMatrix discretize(const Eigen::VectorXd& v, int num_classes, DiscretizeMode mode) {
  if (num_classes < 2) throw std::invalid_argument("discretize: need at least 2 classes");
  const Eigen::Index n = v.size();
  if (n == 0) throw std::invalid_argument("discretize: empty vector");
  if (!v.allFinite()) throw std::invalid_argument("discretize: non-finite entry");

  Eigen::VectorXd scaled = v;
  if (mode == DiscretizeMode::maxabs_rescale) {
    const double max_abs = v.cwiseAbs().maxCoeff();
    if (!(max_abs > 0.0)) {
      throw std::invalid_argument("discretize: zero vector cannot be rescaled");
    }
    scaled /= max_abs;
  } else {
    if (v.minCoeff() < -1.0 || v.maxCoeff() > 1.0) {
      throw std::invalid_argument("discretize: entry outside [-1, 1] in unit_range mode");
    }
  }

  NCLMatrix ncl;
  ncl.num_classes = num_classes;
  ncl.labels.resize(n);
  ncl.onehot = Eigen::MatrixXd::Zero(n, num_classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    // Interval index over [-1, 1]; the top interval is closed so +1 maps to
    // the last class instead of overflowing.
    int label = static_cast<int>(std::floor((scaled[i] + 1.0) * 0.5 * num_classes));
    label = std::clamp(label, 0, num_classes - 1);
    ncl.labels[i] = label;
    ncl.onehot(i, label) = 1.0;
  }
  return ncl;
}

LipschitzGap lipschitz_gap(const Eigen::VectorXd& v1, const Eigen::VectorXd& v2,
                           const SpectralBasis& basis) {
  for (const auto* v : {&v1, &v2}) {
    if (std::abs(v->norm() - 1.0) > 1e-10) {
      throw std::invalid_argument("lipschitz_gap: inputs must be unit vectors");
    }
  }
  const Eigen::VectorXd e1 = energy_distribution(v1, basis);
  const Eigen::VectorXd e2 = energy_distribution(v2, basis);
  LipschitzGap gap;
  gap.lhs = (e1 - e2).norm();
  gap.rhs = 2.0 * (v1 - v2).norm();
  return gap;
}

DeviationBound ncl_deviation_bound(int n, long long k) {
  if (n < 2) throw std::invalid_argument("ncl_deviation_bound: n must be >= 2");
  if (k < 1) throw std::invalid_argument("ncl_deviation_bound: k must be >= 1");
  DeviationBound bound;
  bound.n = n;
  bound.k = k;
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  bound.chord_bound = 2.0 * std::pow(4.0 * nd / (kd * kd), 1.0 / nd);
  bound.euclidean_bound = 4.0 * std::sqrt(nd) / kd;
  return bound;
}

long long min_segments_for_tolerance(int n, double eps) {
  if (n < 2) throw std::invalid_argument("min_segments_for_tolerance: n must be >= 2");
  if (!(eps > 0.0)) throw std::invalid_argument("min_segments_for_tolerance: eps must be positive");

  const double nd = static_cast<double>(n);
  const double raw = 2.0 * std::sqrt(nd) * std::pow(2.0 / eps, nd / 2.0);
  if (!(raw < 9.0e18)) {
    throw std::runtime_error("min_segments_for_tolerance: required k overflows 64-bit integers (eps=" +
                             std::to_string(eps) + ", n=" + std::to_string(n) + ")");
  }
  long long k = static_cast<long long>(std::ceil(raw));
  if (k < 1) k = 1;

  // Snap to the true threshold of the bound function in case the closed-form
  // inversion landed one off due to floating-point rounding.
  while (k > 1 && ncl_deviation_bound(n, k - 1).chord_bound <= eps) --k;
  while (ncl_deviation_bound(n, k).chord_bound > eps) ++k;
  return k;
}

double max_center_angle_bound(int n, long long k) {
  if (n < 2 || k < 1) throw std::invalid_argument("max_center_angle_bound: need n >= 2, k >= 1");
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double arg = 0.5 * std::pow(1.0 / nd, 1.0 / nd) * std::pow(2.0 / kd, 2.0 / nd);
  return 2.0 * std::asin(std::min(1.0, arg));
}

EdfOracleResult edf_deviation_oracle(const Eigen::VectorXd& v, int k, long long samples,
                                     std::uint64_t seed, const SpectralBasis& basis,
                                     double radius_scale) {
  if (std::abs(v.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("edf_deviation_oracle: v must be a unit vector");
  }
  if (samples < 1) throw std::invalid_argument("edf_deviation_oracle: need at least 1 sample");
  if (!(radius_scale >= 0.0 && radius_scale <= 1.0)) {
    throw std::invalid_argument("edf_deviation_oracle: radius_scale must lie in [0, 1]");
  }

  const Eigen::Index n = v.size();
  const NCLMatrix reference = discretize(v, k, DiscretizeMode::unit_range);
  const Eigen::VectorXd e_ref = energy_distribution(v, basis);
  const double cell_width = 2.0 / static_cast<double>(k);

  // Per-entry interval cell [lo_i, lo_i + width) containing v_i.
  Eigen::VectorXd lo(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lo[i] = -1.0 + reference.labels[i] * cell_width;
  }

  Rng rng(seed);
  EdfOracleResult result;
  result.seed = seed;
  Eigen::VectorXd candidate(n);

  const long long proposal_cap = std::max<long long>(10000, 200 * samples);
  while (result.accepted < samples && result.proposed < proposal_cap) {
    ++result.proposed;
    for (Eigen::Index i = 0; i < n; ++i) {
      // Uniform inside the cell, shrunk toward v_i by radius_scale.
      const double lo_i = v[i] - radius_scale * (v[i] - lo[i]);
      const double hi_i = v[i] + radius_scale * (lo[i] + cell_width - v[i]);
      candidate[i] = rng.uniform(lo_i, hi_i);
    }
    const double norm = candidate.norm();
    if (!(norm > 1e-12)) continue;
    candidate /= norm;

    // Keep only samples whose label matrix is still the reference one; the
    // renormalization can push coordinates across cell edges.
    const NCLMatrix sample_labels = discretize(candidate, k, DiscretizeMode::unit_range);
    if ((sample_labels.labels.array() != reference.labels.array()).any()) continue;

    ++result.accepted;
    const Eigen::VectorXd e_sample = energy_distribution(candidate, basis);
    result.max_deviation = std::max(result.max_deviation, (e_sample - e_ref).norm());
    const double cosine = std::clamp(candidate.dot(v), -1.0, 1.0);
    result.max_angle = std::max(result.max_angle, std::acos(cosine));
  }

  if (result.accepted < 10) {
    throw std::runtime_error(
        "edf_deviation_oracle: only " + std::to_string(result.accepted) + " of " +
        std::to_string(result.proposed) +
        " proposals landed in the label cell; the cell-sphere intersection is too thin to probe");
  }
  return result;
}

}  // namespace specbench
