#include "deskew/unscented.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "deskew/errors.hpp"

namespace deskew {

namespace {

constexpr double kJitterLadder[] = {0.0, 1e-12, 1e-9, 1e-6};

std::string matrix_diagnostics(const Eigen::MatrixXd& m) {
  std::ostringstream os;
  os << "dim=" << m.rows() << " diag=[" << m.diagonal().minCoeff() << ", "
     << m.diagonal().maxCoeff() << "]"
     << " asym=" << (m - m.transpose()).cwiseAbs().maxCoeff();
  return os.str();
}

}  // namespace

void UtParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("UtParams: alpha must be in (0, 1]");
  }
  if (!(kappa >= 0.0)) {
    throw std::invalid_argument("UtParams: kappa must be >= 0");
  }
  if (!std::isfinite(beta)) {
    throw std::invalid_argument("UtParams: beta must be finite");
  }
}

Eigen::MatrixXd ut_sqrt_psd(const Eigen::MatrixXd& m) {
  const int d = static_cast<int>(m.rows());
  if (m.cols() != d || d < 1) {
    throw std::invalid_argument("ut_sqrt_psd: matrix must be square");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw NumericError("ut_sqrt_psd: matrix not symmetric, " +
                       matrix_diagnostics(m));
  }

  // Split off dimensions with exactly zero diagonal. PSD forces their whole
  // row to zero; keeping them out of the Cholesky leaves degenerate blocks
  // exactly degenerate instead of smearing jitter into them.
  std::vector<int> active;
  active.reserve(d);
  bool pruned_ok = true;
  for (int i = 0; i < d; ++i) {
    if (m(i, i) != 0.0) {
      active.push_back(i);
    } else if (m.row(i).cwiseAbs().maxCoeff() > 1e-14 * scale) {
      pruned_ok = false;  // zero diagonal with nonzero row: not PSD
      break;
    }
  }

  Eigen::MatrixXd result = Eigen::MatrixXd::Zero(d, d);
  if (!pruned_ok) {
    throw NumericError(
        "ut_sqrt_psd: zero diagonal with nonzero off-diagonal entries, " +
        matrix_diagnostics(m));
  }
  const int k = static_cast<int>(active.size());
  if (k == 0) return result;  // zero matrix

  Eigen::MatrixXd sub(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) sub(i, j) = m(active[i], active[j]);

  for (double eps : kJitterLadder) {
    Eigen::MatrixXd trial = sub;
    if (eps > 0.0) trial.diagonal().array() += eps;
    Eigen::LLT<Eigen::MatrixXd> llt(trial);
    if (llt.info() == Eigen::Success) {
      const Eigen::MatrixXd l = llt.matrixL();
      for (int i = 0; i < k; ++i)
        for (int j = 0; j <= i; ++j) result(active[i], active[j]) = l(i, j);
      return result;
    }
  }
  throw NumericError("ut_sqrt_psd: indefinite after jitter escalation, " +
                     matrix_diagnostics(m));
}

SigmaPoints ut_decompose(const GaussianState& g, const UtParams& params) {
  params.validate();
  const int d = g.dim();
  if (d < 1) {
    throw std::invalid_argument("ut_decompose: state dimension must be >= 1");
  }
  if (g.cov.rows() != d || g.cov.cols() != d) {
    throw std::invalid_argument("ut_decompose: mean/cov dimension mismatch");
  }

  const double lambda = params.alpha * params.alpha * (d + params.kappa) - d;
  const double spread = d + lambda;  // alpha^2 (d + kappa) > 0

  SigmaPoints s;
  s.points.resize(d, 2 * d + 1);
  s.wm.resize(2 * d + 1);
  s.wc.resize(2 * d + 1);

  const Eigen::MatrixXd scaled = std::sqrt(spread) * ut_sqrt_psd(g.cov);
  s.points.col(0) = g.mean;
  for (int i = 0; i < d; ++i) {
    s.points.col(1 + i) = g.mean + scaled.col(i);
    s.points.col(1 + d + i) = g.mean - scaled.col(i);
  }

  s.wm[0] = lambda / spread;
  s.wc[0] = lambda / spread + (1.0 - params.alpha * params.alpha + params.beta);
  const double w = 1.0 / (2.0 * spread);
  for (int i = 1; i <= 2 * d; ++i) {
    s.wm[i] = w;
    s.wc[i] = w;
  }
  return s;
}

Eigen::VectorXd ut_recover_mean(const SigmaPoints& s) {
  const int n = s.count();
  if (s.wm.size() != n) {
    throw std::invalid_argument("ut_recover: weight/point count mismatch");
  }
  // Accumulate relative to X_0 so identical points recover exactly.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(s.dim());
  for (int i = 1; i < n; ++i) {
    mean.noalias() += s.wm[i] * (s.points.col(i) - s.points.col(0));
  }
  mean += s.points.col(0);
  return mean;
}

GaussianState ut_recover(const SigmaPoints& s) {
  const int d = s.dim();
  const int n = s.count();
  if (s.wm.size() != n || s.wc.size() != n) {
    throw std::invalid_argument("ut_recover: weight/point count mismatch");
  }

  Eigen::VectorXd mean = ut_recover_mean(s);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd e = s.points.col(i) - mean;
    cov.noalias() += s.wc[i] * (e * e.transpose());
  }
  cov = ((cov + cov.transpose()) / 2.0).eval();
  return GaussianState{std::move(mean), std::move(cov)};
}

}  // namespace deskew
