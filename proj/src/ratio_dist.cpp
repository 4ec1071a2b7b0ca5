#include "fcgam/ratio_dist.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fcgam/errors.hpp"
#include "fcgam/special.hpp"

namespace fcgam {

namespace {

void check_r(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw std::domain_error("ratio distribution: r must be positive and finite");
  }
}

double clamp_unit(double x) { return std::clamp(x, 1e-15, 1.0 - 1e-15); }

}  // namespace

namespace {

// The s-integrands of the ratio density carry the weight y^shape_u
// exp(-z y) with y the unit-rate quantile of the V marginal at s. For large
// z that weight is a spike near s = 0 which the first quadrature panels
// would miss entirely, so the interval is pre-split snugly around it.
// Returns interior split points (possibly empty).
std::vector<double> density_splits(double z, double shape_u, double shape_v) {
  std::vector<double> splits;
  if (!(z > 0.0)) return splits;
  const double y_peak = shape_u / z;
  const double y_cut = (shape_u + 45.0) / z;
  const double s_hi = reg_lower_inc_gamma(shape_v, y_cut);
  if (!(s_hi > 0.0) || s_hi >= 0.25) return splits;
  const double s_lo = reg_lower_inc_gamma(shape_v, 0.05 * y_peak);
  if (s_lo > 0.0 && s_lo < s_hi) splits.push_back(s_lo);
  splits.push_back(s_hi);
  return splits;
}

double integrate_with_splits(const std::function<double(double)>& f,
                             const std::vector<double>& splits,
                             const QuadratureConfig& cfg) {
  double lo = 0.0;
  double total = 0.0;
  for (double split : splits) {
    total += integrate_interval(f, lo, split, cfg).value;
    lo = split;
  }
  total += integrate_interval(f, lo, 1.0, cfg).value;
  return total;
}

}  // namespace

void RatioLaw::validate() const {
  if (!(capital_lambda > 0.0) || !std::isfinite(capital_lambda)) {
    throw std::domain_error("ratio law: capital_lambda must be positive and finite");
  }
  if (!(shape_u > 0.0) || !(shape_v > 0.0)) {
    throw std::domain_error("ratio law: shapes must be positive");
  }
  if (!std::isfinite(theta)) throw std::domain_error("ratio law: theta must be finite");
}

double ratio_pdf_full(const GammaMarginal& mu, const GammaMarginal& mv, FrankTheta t, double r,
                      const QuadratureConfig& cfg) {
  mu.validate();
  mv.validate();
  t.validate();
  check_r(r);
  const auto integrand = [&](double s) {
    const double v = gamma_quantile(mv, s);
    const double a = clamp_unit(gamma_cdf(mu, r * v));
    return v * std::exp(frank_log_density(t, a, clamp_unit(s)) + gamma_log_pdf(mu, r * v));
  };
  // The weight peaks where lambda_u r v ~ shape_u; rescale to the unit-rate
  // coordinate used by density_splits.
  return integrate_with_splits(integrand,
                               density_splits(r * mu.rate / mv.rate, mu.shape, mv.shape),
                               cfg);
}

double ratio_pdf_lambda(const RatioLaw& law, double r, const QuadratureConfig& cfg) {
  law.validate();
  check_r(r);
  const FrankTheta t{law.theta};
  const double log_front = law.shape_u * std::log(law.capital_lambda) +
                           (law.shape_u - 1.0) * std::log(r) - log_gamma(law.shape_u);
  const auto integrand = [&](double s) {
    const double y = inv_reg_lower_inc_gamma(law.shape_v, s);
    const double z = r * law.capital_lambda * y;
    const double a = clamp_unit(reg_lower_inc_gamma(law.shape_u, z));
    const double log_weight = log_front + law.shape_u * std::log(y) - z;
    return std::exp(frank_log_density(t, a, clamp_unit(s)) + log_weight);
  };
  return integrate_with_splits(
      integrand, density_splits(r * law.capital_lambda, law.shape_u, law.shape_v), cfg);
}

double ratio_cdf(const RatioLaw& law, double r, const QuadratureConfig& cfg) {
  law.validate();
  check_r(r);
  const FrankTheta t{law.theta};
  const auto integrand = [&](double s) {
    const double v = inv_reg_lower_inc_gamma(law.shape_v, s);
    const double a = reg_lower_inc_gamma(law.shape_u, law.capital_lambda * r * v);
    return frank_conditional_cdf(t, clamp_unit(s), clamp_unit(a));
  };
  const double value = integrate_unit_interval(integrand, cfg).value;
  return std::clamp(value, 0.0, 1.0);
}

double ratio_quantile(const RatioLaw& law, double p, const QuadratureConfig& cfg) {
  law.validate();
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("ratio_quantile: p must lie strictly in (0, 1)");
  }
  const double center = gb2_quantile(law, p);
  double lo = center / 4.0;
  double hi = center * 4.0;
  double f_lo = ratio_cdf(law, lo, cfg) - p;
  double f_hi = ratio_cdf(law, hi, cfg) - p;
  for (int i = 0; i < 60 && (f_lo > 0.0 || f_hi < 0.0); ++i) {
    if (f_lo > 0.0) {
      lo /= 4.0;
      f_lo = ratio_cdf(law, lo, cfg) - p;
    }
    if (f_hi < 0.0) {
      hi *= 4.0;
      f_hi = ratio_cdf(law, hi, cfg) - p;
    }
  }
  if (f_lo > 0.0 || f_hi < 0.0) {
    throw BracketingError("ratio_quantile: could not bracket the quantile");
  }

  // Brent's method on the bracket.
  double a = lo, b = hi, fa = f_lo, fb = f_hi;
  double c = a, fc = fa, d = b - a, e = d;
  const double rel_tol = 1e-8;
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) +
                       0.5 * rel_tol * std::abs(b);
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0) return b;
    if (std::abs(e) < tol || std::abs(fa) <= std::abs(fb)) {
      d = m;
      e = m;
    } else {
      double s = fb / fa;
      double P, q;
      if (a == c) {
        P = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double rr = fb / fc;
        P = s * (2.0 * m * qq * (qq - rr) - (b - a) * (rr - 1.0));
        q = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
      }
      if (P > 0.0) q = -q;
      P = std::abs(P);
      if (2.0 * P < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = P / q;
      } else {
        d = m;
        e = m;
      }
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
    fb = ratio_cdf(law, b, cfg) - p;
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
  }
  throw BracketingError("ratio_quantile: Brent iteration did not converge");
}

double ratio_median(const RatioLaw& law, const QuadratureConfig& cfg) {
  return ratio_quantile(law, 0.5, cfg);
}

double ratio_mean(const RatioLaw& law, const QuadratureConfig& cfg) {
  law.validate();
  if (!(law.shape_v > 1.0)) {
    throw std::domain_error("ratio_mean: requires shape_v > 1 for a finite mean");
  }
  // Compactify (0, inf) with r = t / (1 - t).
  const auto integrand = [&](double t) {
    const double om = 1.0 - t;
    const double r = t / om;
    return ratio_pdf_lambda(law, r, cfg) * t / (om * om * om);
  };
  QuadratureConfig outer = cfg;
  outer.abs_tol = std::max(cfg.abs_tol, 1e-9);
  outer.rel_tol = std::max(cfg.rel_tol, 1e-7);
  return integrate_unit_interval(integrand, outer).value;
}

double gb2_log_pdf(const RatioLaw& law, double r) {
  law.validate();
  check_r(r);
  return law.shape_u * std::log(law.capital_lambda) + (law.shape_u - 1.0) * std::log(r) -
         (law.shape_u + law.shape_v) * std::log1p(law.capital_lambda * r) -
         log_beta(law.shape_u, law.shape_v);
}

double gb2_pdf(const RatioLaw& law, double r) { return std::exp(gb2_log_pdf(law, r)); }

double gb2_cdf(const RatioLaw& law, double r) {
  law.validate();
  if (!(r >= 0.0)) throw std::domain_error("gb2_cdf: r must be nonnegative");
  if (r == 0.0) return 0.0;
  const double z = law.capital_lambda * r;
  return reg_inc_beta(law.shape_u, law.shape_v, z / (1.0 + z));
}

double gb2_quantile(const RatioLaw& law, double p) {
  law.validate();
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("gb2_quantile: p must lie in (0, 1)");
  const double x = inv_reg_inc_beta(law.shape_u, law.shape_v, p);
  return x / ((1.0 - x) * law.capital_lambda);
}

}  // namespace fcgam
