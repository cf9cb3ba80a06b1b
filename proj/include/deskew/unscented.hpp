#pragma once

#include <Eigen/Dense>

#include "deskew/geometry.hpp"

namespace deskew {

/// Scaling parameters of the scaled unscented transform.
/// lambda = alpha^2 (d + kappa) - d is recomputed per call from the state
/// dimension d.
struct UtParams {
  double alpha{1.0};  ///< in (0, 1]
  double kappa{0.0};  ///< >= 0
  double beta{2.0};   ///< 2 is optimal for Gaussian priors

  void validate() const;
};

/// 2d+1 sigma points (columns) with mean and covariance weights.
struct SigmaPoints {
  Eigen::MatrixXd points;  ///< d x (2d+1)
  Eigen::VectorXd wm;      ///< mean weights, size 2d+1
  Eigen::VectorXd wc;      ///< covariance weights, size 2d+1

  int dim() const { return static_cast<int>(points.rows()); }
  int count() const { return static_cast<int>(points.cols()); }
};

/// Lower-triangular factor R with R R^T = m for a symmetric PSD matrix.
///
/// Dimensions whose diagonal is exactly zero are factored out first (their
/// whole row must be zero for a PSD matrix), so zero blocks stay exactly
/// zero in the factor. The remaining block goes through Cholesky with a
/// jitter ladder eps*I, eps in {0, 1e-12, 1e-9, 1e-6}. Throws NumericError
/// if the matrix stays indefinite.
Eigen::MatrixXd ut_sqrt_psd(const Eigen::MatrixXd& m);

/// Decompose a Gaussian into sigma points:
///   X_0 = mean, X_i = mean +- column i of sqrt((d+lambda) cov),
///   wm_0 = lambda/(d+lambda), wc_0 = wm_0 + (1 - alpha^2 + beta),
///   wm_i = wc_i = 1/(2(d+lambda)) otherwise.
SigmaPoints ut_decompose(const GaussianState& g, const UtParams& params);

/// Recover mean and covariance from (transformed) sigma points:
///   mean = sum wm_i X_i, cov = sum wc_i (X_i - mean)(X_i - mean)^T.
/// The mean is accumulated relative to X_0 and the covariance is
/// symmetrized before return.
GaussianState ut_recover(const SigmaPoints& s);

/// Mean only, skipping the covariance accumulation.
Eigen::VectorXd ut_recover_mean(const SigmaPoints& s);

}  // namespace deskew
