#pragma once

namespace deskew {

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double regularized_gamma_p(double a, double x);

/// Quantile of the chi-square distribution with `dof` degrees of freedom,
/// computed by inverting the regularized incomplete gamma function.
/// Throws std::invalid_argument for dof outside 1..10 or p outside (0, 1).
double chi2_quantile(int dof, double p);

/// Quantile of the standard normal distribution, p in (0, 1).
double normal_quantile(double p);

}  // namespace deskew
