#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fcgam/model.hpp"

namespace fcgam {

/// Draws from the Gaussian posterior of the model coefficients. Shapes are
/// sampled on the unconstrained zeta scale and stored back-transformed, so
/// every draw respects delta > 1.
struct PosteriorSample {
  Eigen::MatrixXd draws;  ///< m x k; shape columns on the delta scale
  std::vector<std::string> param_names;
  std::uint64_t seed = 0;
  int shape_u_col = -1;
  int shape_v_col = -1;
};

struct CredibleInterval {
  std::string name;
  double estimate;
  double lower;
  double upper;
  double level;
};

/// Finite-difference Hessian of the negative log-likelihood in the
/// free-parameter (zeta-reparameterized) space, symmetrized. Throws
/// IndefiniteInformationError (with eigenvalues) if Cholesky fails.
Eigen::MatrixXd observed_information(const CoefficientVector& gamma, const Dataset& data,
                                     double step_rel = 1e-4);

/// m multivariate-normal posterior draws, deterministic in the seed and
/// independent of any parallel scheduling (each draw derives its own
/// counter-based stream).
PosteriorSample posterior_sample(const FitResult& fit, int m, std::uint64_t seed);

struct NamedTransform {
  std::string name;
  std::function<double(const Eigen::VectorXd&)> fn;  ///< applied per draw
  double estimate = std::numeric_limits<double>::quiet_NaN();
};

/// Percentile credible intervals for arbitrary per-draw transforms. When the
/// estimate of a transform is NaN the posterior median is reported instead.
std::vector<CredibleInterval> credible_intervals(const PosteriorSample& sample, double level,
                                                 const std::vector<NamedTransform>& transforms);

/// The interval table a fit report carries: every coefficient, both shapes,
/// the rate-ratio differences beta_lambda = beta_u - beta_v, and Kendall's
/// tau of the association intercept when theta is constant.
std::vector<CredibleInterval> standard_interval_table(const FitResult& fit,
                                                      const PosteriorSample& sample,
                                                      double level);

/// Sample quantile as the order statistic at ceil(p m) (inverse empirical
/// CDF); exactly equivariant under monotone transforms.
double sample_quantile(std::vector<double> values, double p);

/// Log-likelihood of a fitted model on held-out data (larger is better).
double predictive_loglik(const FitResult& fit, const Dataset& test);

}  // namespace fcgam
