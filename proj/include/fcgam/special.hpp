#pragma once

namespace fcgam {

/// ln Gamma(x) for x > 0. Relative error below 1e-13 over [1e-3, 1e6].
double log_gamma(double x);

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a),
/// a > 0, x >= 0. Series expansion for x < a + 1, continued fraction
/// otherwise.
double reg_lower_inc_gamma(double a, double x);

/// Inverse of P(a, .) for p in [0, 1). Newton iteration with a bisection
/// safeguard, started from the Wilson-Hilferty approximation. The result x
/// satisfies |P(a, x) - p| <= 1e-12.
double inv_reg_lower_inc_gamma(double a, double p);

/// Integral of t / (e^t - 1) from 0 to theta (signed for theta < 0).
/// The integrand takes its limit value 1 at t = 0.
double debye_like_integral(double theta);

/// Standard normal CDF.
double std_normal_cdf(double x);

/// Standard normal quantile for p in (0, 1); absolute error below 1e-9.
double std_normal_quantile(double p);

/// ln Beta(a, b).
double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b) for x in [0, 1].
double reg_inc_beta(double a, double b, double x);

/// Inverse of I_.(a, b) for p in (0, 1).
double inv_reg_inc_beta(double a, double b, double p);

}  // namespace fcgam
