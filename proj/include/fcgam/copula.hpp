#pragma once

#include <utility>

#include "fcgam/rng.hpp"

namespace fcgam {

/// Association parameters with |theta| below this threshold are routed to
/// the exact independence limits of every copula formula (they are 0/0 at
/// theta = 0, and a fitted predictor can cross zero).
inline constexpr double kEpsIndep = 1e-8;

/// Gamma distribution given by rate and shape.
struct GammaMarginal {
  double rate;   ///< lambda > 0
  double shape;  ///< delta > 0 (the regression model additionally demands > 1)

  void validate() const;
};

/// Frank copula association parameter (any finite real; ~0 means independence).
struct FrankTheta {
  double theta;

  void validate() const;
  bool near_independence() const;
};

double gamma_log_pdf(const GammaMarginal& m, double x);
double gamma_pdf(const GammaMarginal& m, double x);
double gamma_cdf(const GammaMarginal& m, double x);
double gamma_quantile(const GammaMarginal& m, double p);

/// Frank copula CDF C_theta(a, b) on the unit square.
double frank_cdf(FrankTheta t, double a, double b);

/// Log of the Frank copula density c_theta(a, b), evaluated in log space
/// throughout so large |theta| cannot overflow.
double frank_log_density(FrankTheta t, double a, double b);

double frank_density(FrankTheta t, double a, double b);

/// Conditional CDF of the second coordinate given the first:
/// dC_theta(a, b) / da = P(B <= b | A = a). By exchangeability of the Frank
/// copula the other conditional is frank_conditional_cdf(t, b, a).
double frank_conditional_cdf(FrankTheta t, double a, double b);

/// Solves frank_conditional_cdf(t, a, b) = w for b in closed form. Output is
/// clamped to (1e-15, 1 - 1e-15).
double frank_conditional_inverse(FrankTheta t, double a, double w);

/// Kendall's rank correlation tau(theta); 0 at independence by continuity.
double kendall_tau(FrankTheta t);

/// Inverse of kendall_tau, solved on |theta| <= 50 (tau is clamped to the
/// attainable range first).
double kendall_tau_inverse(double tau);

/// One pair (a, b) from the Frank copula by conditional inversion.
std::pair<double, double> sample_uniform_pair(FrankTheta t, Rng& rng);

/// One pair (u, v) with the given gamma marginals coupled by a Frank copula.
/// Exact sampler: no approximation beyond floating point.
std::pair<double, double> sample_pair(const GammaMarginal& mu, const GammaMarginal& mv,
                                      FrankTheta t, Rng& rng);

}  // namespace fcgam
