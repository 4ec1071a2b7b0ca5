#include "fcgam/copula.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fcgam/errors.hpp"
#include "fcgam/special.hpp"

namespace fcgam {

namespace {

constexpr double kUnitClamp = 1e-15;

// log of |D| where D = (e^-t - 1) + (e^-ta - 1)(e^-tb - 1) is the shared
// denominator of the Frank copula formulas. Expanding the product gives
// D = e^-t(a+b) + e^-t - e^-ta - e^-tb; factoring out the dominant term
// leaves a bracket of bounded, same-signed pieces, so the computation never
// overflows or cancels for any finite theta.
double frank_log_abs_denom(double theta, double a, double b) {
  if (theta > 0.0) {
    const double m = std::min(a, b);
    const double span = std::abs(a - b);
    const double inside =
        std::exp(-theta * span) * (-std::expm1(-theta * m)) + (-std::expm1(-theta * (1.0 - m)));
    return -theta * m + std::log(inside);
  }
  const double phi = -theta;
  if (a + b >= 1.0) {
    const double inside = -std::expm1(-phi * a) +
                          (std::exp(-phi * (a + b - 1.0)) - std::exp(-phi * b));
    return phi * (a + b) + std::log(inside);
  }
  const double inside = -std::expm1(-phi * (1.0 - a)) +
                        (std::exp(-phi * (1.0 - a - b)) - std::exp(-phi * (1.0 - b)));
  return phi + std::log(inside);
}

// log|e^x - 1| without overflow.
double log_abs_expm1(double x) {
  if (x > 0.0) return x + std::log1p(-std::exp(-x));
  return std::log(-std::expm1(x));
}

void check_unit(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::domain_error(std::string("frank copula: ") + name + " must lie in [0, 1]");
  }
}

}  // namespace

void GammaMarginal::validate() const {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw std::domain_error("gamma marginal: rate must be positive and finite");
  }
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw std::domain_error("gamma marginal: shape must be positive and finite");
  }
}

void FrankTheta::validate() const {
  if (!std::isfinite(theta)) throw std::domain_error("frank copula: theta must be finite");
}

bool FrankTheta::near_independence() const { return std::abs(theta) < kEpsIndep; }

double gamma_log_pdf(const GammaMarginal& m, double x) {
  m.validate();
  if (!(x > 0.0)) throw std::domain_error("gamma_pdf: x must be positive");
  return m.shape * std::log(m.rate) + (m.shape - 1.0) * std::log(x) - m.rate * x -
         log_gamma(m.shape);
}

double gamma_pdf(const GammaMarginal& m, double x) { return std::exp(gamma_log_pdf(m, x)); }

double gamma_cdf(const GammaMarginal& m, double x) {
  m.validate();
  if (!(x >= 0.0)) throw std::domain_error("gamma_cdf: x must be nonnegative");
  return reg_lower_inc_gamma(m.shape, m.rate * x);
}

double gamma_quantile(const GammaMarginal& m, double p) {
  m.validate();
  return inv_reg_lower_inc_gamma(m.shape, p) / m.rate;
}

double frank_cdf(FrankTheta t, double a, double b) {
  t.validate();
  check_unit(a, "a");
  check_unit(b, "b");
  if (a == 0.0 || b == 0.0) return 0.0;
  if (a == 1.0) return b;
  if (b == 1.0) return a;
  if (t.near_independence()) return a * b;
  const double theta = t.theta;
  if (std::abs(theta) <= 30.0) {
    return -std::log1p(std::expm1(-theta * a) * std::expm1(-theta * b) / std::expm1(-theta)) /
           theta;
  }
  // 1 + E_a E_b / E_1 = D / E_1 with both factors of the same sign.
  return -(frank_log_abs_denom(theta, a, b) - log_abs_expm1(-theta)) / theta;
}

double frank_log_density(FrankTheta t, double a, double b) {
  t.validate();
  if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0)) {
    throw std::domain_error("frank_density: arguments must lie strictly in (0, 1)");
  }
  if (t.near_independence()) return 0.0;
  const double theta = t.theta;
  return std::log(std::abs(theta)) + log_abs_expm1(-theta) - theta * (a + b) -
         2.0 * frank_log_abs_denom(theta, a, b);
}

double frank_density(FrankTheta t, double a, double b) {
  if (t.near_independence()) return 1.0;
  return std::exp(frank_log_density(t, a, b));
}

double frank_conditional_cdf(FrankTheta t, double a, double b) {
  t.validate();
  check_unit(a, "a");
  check_unit(b, "b");
  if (b == 0.0) return 0.0;
  if (b == 1.0) return 1.0;
  if (t.near_independence()) return b;
  const double theta = t.theta;
  if (std::abs(theta) <= 30.0) {
    const double num = std::exp(-theta * a) * std::expm1(-theta * b);
    const double den = std::expm1(-theta) + std::expm1(-theta * a) * std::expm1(-theta * b);
    return num / den;
  }
  // exp(-ta) E_b and D share their sign, so the quotient of absolute values
  // is the conditional probability.
  const double log_num = -theta * a + log_abs_expm1(-theta * b);
  return std::exp(log_num - frank_log_abs_denom(theta, a, b));
}

double frank_conditional_inverse(FrankTheta t, double a, double w) {
  t.validate();
  if (!(a > 0.0 && a < 1.0 && w > 0.0 && w < 1.0)) {
    throw std::domain_error("frank_conditional_inverse: arguments must lie in (0, 1)");
  }
  if (t.near_independence()) return w;
  const double theta = t.theta;
  double b;
  if (std::abs(theta) <= 30.0) {
    const double ratio = w * std::expm1(-theta) / (w + (1.0 - w) * std::exp(-theta * a));
    b = -std::log1p(ratio) / theta;
  } else {
    // 1 + ratio = ((1-w) e^-ta + w e^-t) / (w + (1-w) e^-ta); evaluate both
    // logs by log-sum-exp so no exponential is formed directly.
    const auto log_sum_exp = [](double x, double y) {
      const double m = std::max(x, y);
      return m + std::log1p(std::exp(std::min(x, y) - m));
    };
    const double log_w = std::log(w);
    const double log_1mw = std::log1p(-w);
    const double log_num = log_sum_exp(log_1mw - theta * a, log_w - theta);
    const double log_den = log_sum_exp(log_w, log_1mw - theta * a);
    b = -(log_num - log_den) / theta;
  }
  return std::clamp(b, kUnitClamp, 1.0 - kUnitClamp);
}

double kendall_tau(FrankTheta t) {
  t.validate();
  if (t.near_independence()) return 0.0;
  const double theta = t.theta;
  return 1.0 + (4.0 / theta) * (debye_like_integral(theta) / theta - 1.0);
}

double kendall_tau_inverse(double tau) {
  if (!(tau > -1.0 && tau < 1.0)) {
    throw std::domain_error("kendall_tau_inverse: tau must lie in (-1, 1)");
  }
  if (std::abs(tau) < 1e-12) return 0.0;
  constexpr double kThetaMax = 50.0;
  const double tau_max = kendall_tau({kThetaMax});
  const double clamped = std::clamp(tau, -tau_max, tau_max);
  double lo = -kThetaMax, hi = kThetaMax;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double f = (std::abs(mid) < kEpsIndep) ? 0.0 : kendall_tau({mid});
    if (f < clamped) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::pair<double, double> sample_uniform_pair(FrankTheta t, Rng& rng) {
  const double a = rng.uniform();
  const double w = rng.uniform();
  return {a, frank_conditional_inverse(t, a, w)};
}

std::pair<double, double> sample_pair(const GammaMarginal& mu, const GammaMarginal& mv,
                                      FrankTheta t, Rng& rng) {
  const auto [a, b] = sample_uniform_pair(t, rng);
  return {gamma_quantile(mu, a), gamma_quantile(mv, b)};
}

}  // namespace fcgam
