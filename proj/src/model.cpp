#include "fcgam/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "fcgam/copula.hpp"
#include "fcgam/detail/glm.hpp"
#include "fcgam/errors.hpp"
#include "fcgam/optimize.hpp"
#include "fcgam/special.hpp"

namespace fcgam {

namespace {

constexpr double kEtaLimit = 700.0;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kShapeInitFloor = 1.05;

double clamp_unit(double x) { return std::clamp(x, 1e-15, 1.0 - 1e-15); }

double gamma_glm_shape_moment(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& alpha) {
  const double dispersion = detail::gamma_glm_dispersion(X, y, alpha);
  if (!(dispersion > 0.0) || !std::isfinite(dispersion)) return kShapeInitFloor;
  return std::clamp(1.0 / dispersion, kShapeInitFloor, 1e6);
}

double empirical_kendall_tau(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const Eigen::Index n = u.size();
  long long concordant = 0, discordant = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double du = u[i] - u[j];
      const double dv = v[i] - v[j];
      const double prod = du * dv;
      if (prod > 0.0) {
        ++concordant;
      } else if (prod < 0.0) {
        ++discordant;
      }
    }
  }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return static_cast<double>(concordant - discordant) / pairs;
}

}  // namespace

std::string theta_mode_name(ThetaMode mode) {
  return mode == ThetaMode::Constant ? "constant" : "modeled";
}

ThetaMode theta_mode_from_name(const std::string& name) {
  if (name == "constant") return ThetaMode::Constant;
  if (name == "modeled") return ThetaMode::Modeled;
  throw ValidationError("unknown theta mode: " + name);
}

int CoefficientVector::free_parameter_count() const {
  const int p1 = static_cast<int>(beta_u.size());
  return 2 * p1 + (theta_mode == ThetaMode::Modeled ? p1 : 1) + 2;
}

void CoefficientVector::validate() const {
  if (beta_u.size() != beta_v.size() || beta_u.size() != beta_theta.size() ||
      beta_u.size() < 1) {
    throw ValidationError("coefficients: predictor blocks must share length p + 1");
  }
  if (!(shape_u > 1.0) || !(shape_v > 1.0)) {
    throw ValidationError("coefficients: shapes must be greater than 1");
  }
  if (theta_mode == ThetaMode::Constant) {
    for (Eigen::Index j = 1; j < beta_theta.size(); ++j) {
      if (beta_theta[j] != 0.0) {
        throw ValidationError("coefficients: constant theta mode requires zero theta slopes");
      }
    }
  }
}

CoefficientVector CoefficientVector::zero(int p, ThetaMode mode) {
  CoefficientVector out;
  out.beta_u = Eigen::VectorXd::Zero(p + 1);
  out.beta_v = Eigen::VectorXd::Zero(p + 1);
  out.beta_theta = Eigen::VectorXd::Zero(p + 1);
  out.theta_mode = mode;
  return out;
}

Predictors predictors(const CoefficientVector& gamma, const Eigen::VectorXd& x_row) {
  if (x_row.size() != gamma.beta_u.size()) {
    throw ValidationError("predictors: design row length mismatch");
  }
  const double eta_u = gamma.beta_u.dot(x_row);
  const double eta_v = gamma.beta_v.dot(x_row);
  const double eta_theta = gamma.beta_theta.dot(x_row);
  if (std::abs(eta_u) > kEtaLimit || std::abs(eta_v) > kEtaLimit ||
      std::abs(eta_theta) > kEtaLimit) {
    throw FitDivergenceError("predictors: linear predictor magnitude exceeds 700");
  }
  return {std::exp(eta_u), std::exp(eta_v), eta_theta, std::exp(eta_u - eta_v)};
}

double neg_loglik(const CoefficientVector& gamma, const Dataset& data,
                  NegLoglikDiagnostics* diag) {
  const Eigen::VectorXd eta_u = data.x.values * gamma.beta_u;
  const Eigen::VectorXd eta_v = data.x.values * gamma.beta_v;
  const Eigen::VectorXd eta_t = data.x.values * gamma.beta_theta;
  const double lg_u = log_gamma(gamma.shape_u);
  const double lg_v = log_gamma(gamma.shape_v);

  const auto fail = [&](int row, const char* reason) {
    if (diag) {
      diag->bad_row = row;
      diag->reason = reason;
    }
    return kInf;
  };

  // Compensated summation: keeps the finite-difference gradient noise of the
  // optimizer independent of n.
  double total = 0.0;
  double carry = 0.0;
  const int n = data.n();
  for (int i = 0; i < n; ++i) {
    if (std::abs(eta_u[i]) > kEtaLimit || std::abs(eta_v[i]) > kEtaLimit ||
        std::abs(eta_t[i]) > kEtaLimit) {
      return fail(i, "linear predictor out of range");
    }
    const double lam_u = std::exp(eta_u[i]);
    const double lam_v = std::exp(eta_v[i]);
    const double ui = data.u[i];
    const double vi = data.v[i];

    const double log_fu = gamma.shape_u * eta_u[i] + (gamma.shape_u - 1.0) * std::log(ui) -
                          lam_u * ui - lg_u;
    const double log_fv = gamma.shape_v * eta_v[i] + (gamma.shape_v - 1.0) * std::log(vi) -
                          lam_v * vi - lg_v;

    double log_c = 0.0;
    const double theta_i = eta_t[i];
    if (std::abs(theta_i) >= kEpsIndep) {
      const double a = clamp_unit(reg_lower_inc_gamma(gamma.shape_u, lam_u * ui));
      const double b = clamp_unit(reg_lower_inc_gamma(gamma.shape_v, lam_v * vi));
      log_c = frank_log_density({theta_i}, a, b);
    }

    const double term = log_c + log_fu + log_fv;
    if (!std::isfinite(term)) {
      return fail(i, "row density underflow");
    }
    const double y = term - carry;
    const double t = total + y;
    carry = (t - total) - y;
    total = t;
  }
  return -total;
}

Eigen::VectorXd pack_free_parameters(const CoefficientVector& gamma) {
  gamma.validate();
  const int p1 = static_cast<int>(gamma.beta_u.size());
  const int theta_len = gamma.theta_mode == ThetaMode::Modeled ? p1 : 1;
  Eigen::VectorXd x(2 * p1 + theta_len + 2);
  x.segment(0, p1) = gamma.beta_u;
  x.segment(p1, p1) = gamma.beta_v;
  x.segment(2 * p1, theta_len) = gamma.beta_theta.head(theta_len);
  x[2 * p1 + theta_len] = std::log(gamma.shape_u - 1.0);
  x[2 * p1 + theta_len + 1] = std::log(gamma.shape_v - 1.0);
  return x;
}

CoefficientVector unpack_free_parameters(const Eigen::VectorXd& x, int p, ThetaMode mode) {
  const int p1 = p + 1;
  const int theta_len = mode == ThetaMode::Modeled ? p1 : 1;
  CoefficientVector gamma = CoefficientVector::zero(p, mode);
  gamma.beta_u = x.segment(0, p1);
  gamma.beta_v = x.segment(p1, p1);
  gamma.beta_theta.head(theta_len) = x.segment(2 * p1, theta_len);
  gamma.shape_u = 1.0 + std::exp(x[2 * p1 + theta_len]);
  gamma.shape_v = 1.0 + std::exp(x[2 * p1 + theta_len + 1]);
  return gamma;
}

std::vector<std::string> free_parameter_names(int p, ThetaMode mode,
                                              const std::vector<std::string>& cov_names) {
  std::vector<std::string> covs = cov_names;
  if (covs.empty()) {
    for (int j = 1; j <= p; ++j) covs.push_back("x" + std::to_string(j));
  }
  std::vector<std::string> names;
  const auto block = [&](const std::string& prefix, int count) {
    names.push_back(prefix + ".(intercept)");
    for (int j = 1; j < count; ++j) names.push_back(prefix + "." + covs[j - 1]);
  };
  block("beta_u", p + 1);
  block("beta_v", p + 1);
  block("beta_theta", mode == ThetaMode::Modeled ? p + 1 : 1);
  names.push_back("zeta_u");
  names.push_back("zeta_v");
  return names;
}

CoefficientVector initial_values(const Dataset& data, ThetaMode theta_mode) {
  data.validate();
  const int p = data.x.p();
  const auto near_constant = [](const Eigen::VectorXd& y) {
    const double mean = y.mean();
    const double var = (y.array() - mean).square().sum() / std::max<double>(1, y.size() - 1);
    return !(var > 1e-12 * mean * mean);
  };
  if (near_constant(data.u) || near_constant(data.v)) {
    throw ValidationError("initial_values: degenerate component data (no variation)");
  }

  CoefficientVector gamma = CoefficientVector::zero(p, theta_mode);

  const auto component = [&](const Eigen::VectorXd& y, Eigen::VectorXd& beta, double& shape) {
    const Eigen::VectorXd alpha = detail::gamma_glm_mean_coefficients(data.x.values, y);
    shape = gamma_glm_shape_moment(data.x.values, y, alpha);
    // log(lambda) = log(shape) - log(mu)
    beta = -alpha;
    beta[0] += std::log(shape);
  };
  component(data.u, gamma.beta_u, gamma.shape_u);
  component(data.v, gamma.beta_v, gamma.shape_v);

  const double tau_hat = empirical_kendall_tau(data.u, data.v);
  gamma.beta_theta[0] = kendall_tau_inverse(std::clamp(tau_hat, -0.999, 0.999));
  gamma.validate();
  return gamma;
}

FitResult fit(const Dataset& data, ThetaMode theta_mode,
              const std::optional<CoefficientVector>& init, const FitOptions& opts) {
  data.validate();
  const int p = data.x.p();

  CoefficientVector start = init ? *init : initial_values(data, theta_mode);
  if (start.theta_mode != theta_mode || start.covariate_count() != p) {
    throw ValidationError("fit: initial values incompatible with data / theta mode");
  }
  start.validate();

  const int k = start.free_parameter_count();
  if (data.n() <= k) {
    throw ValidationError("fit: need more observations than free parameters");
  }
  {
    const auto qr = data.x.values.colPivHouseholderQr();
    if (qr.rank() < data.x.values.cols()) {
      throw ValidationError("fit: design matrix is rank deficient");
    }
  }

  const Objective objective = [&](const Eigen::VectorXd& x) {
    return neg_loglik(unpack_free_parameters(x, p, theta_mode), data);
  };

  BfgsOptions bopts;
  bopts.gradient_tol = opts.gradient_tol;
  bopts.rel_f_tol = opts.rel_f_tol;
  bopts.max_iterations = opts.max_iterations;
  bopts.fd_step_rel = opts.fd_step_rel;
  const BfgsResult res = minimize_bfgs(objective, pack_free_parameters(start), bopts);

  // The relative-change rule can stop while the gradient is still above its
  // tolerance (the log-likelihood has magnitude ~n, so objective changes
  // bottom out first). A few Newton steps on the finite-difference Hessian
  // polish the optimum; the Hessian is needed for the information matrix
  // anyway.
  Eigen::VectorXd x_hat = res.x;
  double f_hat = res.f;
  Eigen::VectorXd g_hat = res.gradient;
  Eigen::MatrixXd hessian;
  int polish_steps = 0;
  if (res.converged) {
    for (int round = 0; round < 4; ++round) {
      if (g_hat.lpNorm<Eigen::Infinity>() <= opts.gradient_tol) break;
      hessian = fd_hessian(objective, x_hat, opts.hessian_step_rel);
      Eigen::LLT<Eigen::MatrixXd> llt(hessian);
      if (llt.info() != Eigen::Success) break;
      Eigen::VectorXd step = -llt.solve(g_hat);
      bool accepted = false;
      for (int halving = 0; halving < 6; ++halving) {
        const Eigen::VectorXd x_try = x_hat + step;
        const double f_try = objective(x_try);
        if (std::isfinite(f_try) && f_try <= f_hat + 1e-9 * std::max(1.0, std::abs(f_hat))) {
          x_hat = x_try;
          f_hat = std::min(f_hat, f_try);
          g_hat = fd_gradient(objective, x_hat, opts.fd_step_rel);
          accepted = true;
          ++polish_steps;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      hessian.resize(0, 0);  // moved away from where it was computed
    }
  }

  FitResult out;
  out.gamma_hat = unpack_free_parameters(x_hat, p, theta_mode);
  out.loglik = -f_hat;
  out.converged = res.converged;
  out.iterations = res.iterations + polish_steps;
  out.gradient_norm = g_hat.size() ? g_hat.lpNorm<Eigen::Infinity>() : 0.0;
  out.status = res.status;
  out.n_obs = data.n();
  out.bic = k * std::log(static_cast<double>(data.n())) - 2.0 * out.loglik;
  out.covariate_names = data.x.covariate_names;
  out.parameter_names = free_parameter_names(p, theta_mode, data.x.covariate_names);

  if (opts.compute_information && res.converged) {
    const Eigen::MatrixXd info = hessian.size() > 0
                                     ? hessian
                                     : fd_hessian(objective, x_hat, opts.hessian_step_rel);
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) {
      if (!opts.ridge_fallback) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
        std::vector<double> evs(es.eigenvalues().data(),
                                es.eigenvalues().data() + es.eigenvalues().size());
        throw IndefiniteInformationError(
            "fit: observed information is not positive definite", std::move(evs));
      }
      const double ridge = 1e-6 * info.trace() / k;
      Eigen::MatrixXd patched = info + ridge * Eigen::MatrixXd::Identity(k, k);
      llt.compute(patched);
      if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
        std::vector<double> evs(es.eigenvalues().data(),
                                es.eigenvalues().data() + es.eigenvalues().size());
        throw IndefiniteInformationError(
            "fit: observed information not positive definite even after ridge",
            std::move(evs));
      }
      std::fprintf(stderr,
                   "fcgam fit: WARNING: indefinite observed information, "
                   "ridge %.3e added to the diagonal; intervals are approximate\n",
                   ridge);
    }
    out.neg_hessian_inv = llt.solve(Eigen::MatrixXd::Identity(k, k));
  }
  return out;
}

RatioLaw predict_law(const CoefficientVector& gamma, const Eigen::VectorXd& x_row) {
  const Predictors pred = predictors(gamma, x_row);
  return {pred.capital_lambda, gamma.shape_u, gamma.shape_v, pred.theta};
}

RatioLaw predict_law(const FitResult& fit, const Eigen::VectorXd& x_row) {
  return predict_law(fit.gamma_hat, x_row);
}

Eigen::VectorXd quantile_residuals(const FitResult& fit, const Dataset& data,
                                   const QuadratureConfig& cfg) {
  data.validate();
  const Eigen::VectorXd r = data.ratios();
  Eigen::VectorXd out(data.n());
  for (int i = 0; i < data.n(); ++i) {
    const RatioLaw law = predict_law(fit, data.x.values.row(i).transpose());
    const double cdf = std::clamp(ratio_cdf(law, r[i], cfg), 1e-12, 1.0 - 1e-12);
    out[i] = std_normal_quantile(cdf);
  }
  return out;
}

}  // namespace fcgam
