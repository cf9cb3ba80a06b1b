#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "deskew/geometry.hpp"

namespace deskew {

/// One NEES sample.
struct NeesRecord {
  double epsilon{0.0};
  int dof{0};
  bool in_bounds{false};
};

/// Normalized estimation error squared, e^T Sigma^-1 e with
/// e = estimate.mean - truth. Sigma is factored with the same jitter
/// ladder as the sigma-point square root; throws NumericError if it stays
/// singular.
double nees(const GaussianState& estimate, const Eigen::VectorXd& truth);

/// Two-sided chi-square acceptance interval: quantiles at
/// (1-prob)/2 and 1-(1-prob)/2. dof must be in 1..10.
std::pair<double, double> chi2_bounds(int dof, double prob = 0.95);

/// Fraction of records with in_bounds set. Throws std::invalid_argument on
/// empty input.
double in_bound_rate(const std::vector<NeesRecord>& records);

/// Pooled NEES statistics for one branch (3D points or 2D pixels).
struct NeesSummary {
  int dof{0};
  double bound_lo{0.0};
  double bound_hi{0.0};
  std::int64_t count{0};
  std::int64_t in_bounds{0};
  double rate{0.0};
  double mean_epsilon{0.0};
  double histogram_max{0.0};            ///< upper edge of the last bin
  std::vector<std::int64_t> histogram;  ///< uniform bins over [0, max]
  std::int64_t overflow{0};             ///< samples above histogram_max
};

/// Consistency report for a Monte Carlo evaluation.
struct ConsistencyReport {
  int runs{0};
  std::uint64_t seed{0};
  NeesSummary nees_3d;
  NeesSummary nees_2d;
  std::int64_t dropped_2d{0};
};

/// Aggregate raw NEES samples into a summary with `bins` uniform bins over
/// [0, histogram_max].
NeesSummary summarize_nees(const std::vector<double>& epsilons, int dof,
                           double histogram_max = 20.0, int bins = 40);

}  // namespace deskew
