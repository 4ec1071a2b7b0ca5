#pragma once

#include "fcgam/copula.hpp"
#include "fcgam/quadrature.hpp"

namespace fcgam {

/// Parameters that fully determine the law of the ratio R = U/V: the ratio
/// of the rate parameters, both shapes and the association parameter. The
/// individual rates only enter through their ratio.
struct RatioLaw {
  double capital_lambda;  ///< Lambda = lambda_U / lambda_V > 0
  double shape_u;         ///< delta_U > 0
  double shape_v;         ///< delta_V > 0
  double theta;           ///< Frank association parameter

  void validate() const;
};

/// Ratio density evaluated from the full five-parameter form (both marginals
/// spelled out). Kept alongside ratio_pdf_lambda as an independent route:
/// the two must agree whenever the rate ratios match.
double ratio_pdf_full(const GammaMarginal& mu, const GammaMarginal& mv, FrankTheta t, double r,
                      const QuadratureConfig& cfg);

/// Ratio density in the reduced (Lambda, delta_U, delta_V, theta) form.
double ratio_pdf_lambda(const RatioLaw& law, double r, const QuadratureConfig& cfg);

/// Ratio CDF: the unit-interval integral of the copula conditional
/// P(A <= F_U(r F_V^{-1}(s)) | B = s). The integrand is a probability, so
/// the integral is bounded and increasing in r.
double ratio_cdf(const RatioLaw& law, double r, const QuadratureConfig& cfg);

/// p-quantile of the ratio law, solved by bracketing the CDF. The initial
/// bracket comes from the independence (GB2) quantile widened by a factor of
/// four each way and is expanded geometrically if needed.
double ratio_quantile(const RatioLaw& law, double p, const QuadratureConfig& cfg);

double ratio_median(const RatioLaw& law, const QuadratureConfig& cfg);

/// Mean of the ratio; requires delta_V > 1 so that E(1/V) is finite.
double ratio_mean(const RatioLaw& law, const QuadratureConfig& cfg);

/// Closed-form density of the ratio of independent gammas (generalized beta
/// of the second kind); law.theta is ignored.
double gb2_log_pdf(const RatioLaw& law, double r);
double gb2_pdf(const RatioLaw& law, double r);
double gb2_cdf(const RatioLaw& law, double r);
double gb2_quantile(const RatioLaw& law, double p);

}  // namespace fcgam
