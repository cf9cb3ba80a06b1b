#include "deskew/consistency.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include "deskew/errors.hpp"
#include "deskew/stats.hpp"

namespace deskew {

double nees(const GaussianState& estimate, const Eigen::VectorXd& truth) {
  const int d = estimate.dim();
  if (truth.size() != d) {
    throw std::invalid_argument("nees: dimension mismatch");
  }
  const Eigen::VectorXd e = estimate.mean - truth;

  for (double eps : {0.0, 1e-12, 1e-9, 1e-6}) {
    Eigen::MatrixXd m = estimate.cov;
    if (eps > 0.0) m.diagonal().array() += eps;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) {
      return e.dot(llt.solve(e));
    }
  }
  throw NumericError("nees: covariance singular after jitter escalation");
}

std::pair<double, double> chi2_bounds(int dof, double prob) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw std::invalid_argument("chi2_bounds: prob must be in (0, 1)");
  }
  const double tail = (1.0 - prob) / 2.0;
  return {chi2_quantile(dof, tail), chi2_quantile(dof, 1.0 - tail)};
}

double in_bound_rate(const std::vector<NeesRecord>& records) {
  if (records.empty()) {
    throw std::invalid_argument("in_bound_rate: no records");
  }
  std::int64_t hits = 0;
  for (const NeesRecord& r : records) {
    if (r.in_bounds) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

NeesSummary summarize_nees(const std::vector<double>& epsilons, int dof,
                           double histogram_max, int bins) {
  if (epsilons.empty()) {
    throw std::invalid_argument("summarize_nees: no samples");
  }
  NeesSummary s;
  s.dof = dof;
  const auto [lo, hi] = chi2_bounds(dof);
  s.bound_lo = lo;
  s.bound_hi = hi;
  s.count = static_cast<std::int64_t>(epsilons.size());
  s.histogram_max = histogram_max;
  s.histogram.assign(bins, 0);

  double sum = 0.0;
  for (double eps : epsilons) {
    sum += eps;
    if (eps >= lo && eps <= hi) ++s.in_bounds;
    if (eps >= histogram_max) {
      ++s.overflow;
    } else {
      const int bin = static_cast<int>(eps / histogram_max * bins);
      ++s.histogram[std::min(bin, bins - 1)];
    }
  }
  s.rate = static_cast<double>(s.in_bounds) / static_cast<double>(s.count);
  s.mean_epsilon = sum / static_cast<double>(s.count);
  return s;
}

}  // namespace deskew
