#include "fcgam/inference.hpp"

#include <algorithm>
#include <cmath>

#include "fcgam/copula.hpp"
#include "fcgam/errors.hpp"
#include "fcgam/optimize.hpp"
#include "fcgam/rng.hpp"

namespace fcgam {

Eigen::MatrixXd observed_information(const CoefficientVector& gamma, const Dataset& data,
                                     double step_rel) {
  const int p = gamma.covariate_count();
  const ThetaMode mode = gamma.theta_mode;
  const Objective objective = [&](const Eigen::VectorXd& x) {
    return neg_loglik(unpack_free_parameters(x, p, mode), data);
  };
  const Eigen::MatrixXd H = fd_hessian(objective, pack_free_parameters(gamma), step_rel);
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    std::vector<double> evs(es.eigenvalues().data(),
                            es.eigenvalues().data() + es.eigenvalues().size());
    throw IndefiniteInformationError(
        "observed_information: Hessian is not positive definite", std::move(evs));
  }
  return H;
}

PosteriorSample posterior_sample(const FitResult& fit, int m, std::uint64_t seed) {
  if (!fit.converged) {
    throw NonConvergenceError("posterior_sample: fit did not converge");
  }
  if (fit.neg_hessian_inv.size() == 0) {
    throw ValidationError("posterior_sample: fit carries no information matrix");
  }
  const int k = static_cast<int>(fit.neg_hessian_inv.rows());

  // Cholesky factor of the posterior covariance J^-1.
  Eigen::LLT<Eigen::MatrixXd> llt(fit.neg_hessian_inv);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fit.neg_hessian_inv);
    std::vector<double> evs(es.eigenvalues().data(),
                            es.eigenvalues().data() + es.eigenvalues().size());
    throw IndefiniteInformationError(
        "posterior_sample: covariance is not positive definite", std::move(evs));
  }
  const Eigen::MatrixXd A = llt.matrixL();

  const Eigen::VectorXd mean = pack_free_parameters(fit.gamma_hat);
  const int zeta_u_col = k - 2;
  const int zeta_v_col = k - 1;

  PosteriorSample out;
  out.draws.resize(m, k);
  out.param_names = fit.parameter_names;
  out.seed = seed;
  out.shape_u_col = zeta_u_col;
  out.shape_v_col = zeta_v_col;
  if (out.param_names.size() == static_cast<size_t>(k)) {
    out.param_names[zeta_u_col] = "shape_u";
    out.param_names[zeta_v_col] = "shape_v";
  }

  Eigen::VectorXd z(k);
  for (int i = 0; i < m; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    for (int j = 0; j < k; ++j) z[j] = rng.normal();
    Eigen::VectorXd draw = mean + A * z;
    draw[zeta_u_col] = 1.0 + std::exp(draw[zeta_u_col]);
    draw[zeta_v_col] = 1.0 + std::exp(draw[zeta_v_col]);
    out.draws.row(i) = draw.transpose();
  }
  return out;
}

double sample_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("sample_quantile: empty sample");
  std::sort(values.begin(), values.end());
  // Inverse empirical CDF (order statistic at ceil(p m)): this definition is
  // exactly equivariant under monotone transforms of the draws, which the
  // derived-quantity intervals rely on.
  const double m = static_cast<double>(values.size());
  const size_t idx = static_cast<size_t>(
      std::clamp(std::ceil(p * m), 1.0, m));
  return values[idx - 1];
}

std::vector<CredibleInterval> credible_intervals(const PosteriorSample& sample, double level,
                                                 const std::vector<NamedTransform>& transforms) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ValidationError("credible_intervals: level must lie in (0, 1)");
  }
  const int m = static_cast<int>(sample.draws.rows());
  const double alpha = 1.0 - level;
  std::vector<CredibleInterval> out;
  out.reserve(transforms.size());
  std::vector<double> values(m);
  for (const NamedTransform& t : transforms) {
    for (int i = 0; i < m; ++i) values[i] = t.fn(sample.draws.row(i).transpose());
    std::vector<double> sorted = values;
    const double lower = sample_quantile(sorted, alpha / 2.0);
    const double upper = sample_quantile(sorted, 1.0 - alpha / 2.0);
    const double estimate =
        std::isnan(t.estimate) ? sample_quantile(sorted, 0.5) : t.estimate;
    out.push_back({t.name, estimate, lower, upper, level});
  }
  return out;
}

std::vector<CredibleInterval> standard_interval_table(const FitResult& fit,
                                                      const PosteriorSample& sample,
                                                      double level) {
  const CoefficientVector& gamma = fit.gamma_hat;
  const int p1 = static_cast<int>(gamma.beta_u.size());
  const int theta_len = gamma.theta_mode == ThetaMode::Modeled ? p1 : 1;
  const int k = static_cast<int>(sample.draws.cols());

  std::vector<NamedTransform> transforms;
  const auto coordinate = [&](int col) {
    return [col](const Eigen::VectorXd& d) { return d[col]; };
  };
  for (int j = 0; j < p1; ++j) {
    transforms.push_back({sample.param_names[j], coordinate(j), gamma.beta_u[j]});
  }
  for (int j = 0; j < p1; ++j) {
    transforms.push_back({sample.param_names[p1 + j], coordinate(p1 + j), gamma.beta_v[j]});
  }
  for (int j = 0; j < theta_len; ++j) {
    transforms.push_back(
        {sample.param_names[2 * p1 + j], coordinate(2 * p1 + j), gamma.beta_theta[j]});
  }
  transforms.push_back({"shape_u", coordinate(k - 2), gamma.shape_u});
  transforms.push_back({"shape_v", coordinate(k - 1), gamma.shape_v});

  // Rate-ratio coefficients: percentiles of the per-draw differences.
  for (int j = 0; j < p1; ++j) {
    const std::string base = sample.param_names[j].substr(std::string("beta_u").size());
    transforms.push_back({"beta_lambda" + base,
                          [j, p1](const Eigen::VectorXd& d) { return d[j] - d[p1 + j]; },
                          gamma.beta_u[j] - gamma.beta_v[j]});
  }
  if (gamma.theta_mode == ThetaMode::Constant) {
    const int theta_col = 2 * p1;
    transforms.push_back({"tau",
                          [theta_col](const Eigen::VectorXd& d) {
                            return kendall_tau({d[theta_col]});
                          },
                          kendall_tau({gamma.beta_theta[0]})});
  }
  return credible_intervals(sample, level, transforms);
}

double predictive_loglik(const FitResult& fit, const Dataset& test) {
  NegLoglikDiagnostics diag;
  const double value = neg_loglik(fit.gamma_hat, test, &diag);
  if (std::isinf(value)) {
    return -std::numeric_limits<double>::infinity();
  }
  return -value;
}

}  // namespace fcgam
