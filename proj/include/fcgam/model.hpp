#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "fcgam/design.hpp"
#include "fcgam/quadrature.hpp"
#include "fcgam/ratio_dist.hpp"

namespace fcgam {

/// Whether the association parameter gets its own covariate slopes or is a
/// single intercept shared by all observations.
enum class ThetaMode { Constant, Modeled };

std::string theta_mode_name(ThetaMode mode);
ThetaMode theta_mode_from_name(const std::string& name);

/// Full parameter set of the regression model. beta_theta always has length
/// p + 1; in Constant mode its slopes are exactly zero and are not counted
/// as free parameters.
struct CoefficientVector {
  Eigen::VectorXd beta_u;
  Eigen::VectorXd beta_v;
  Eigen::VectorXd beta_theta;
  double shape_u = 2.0;
  double shape_v = 2.0;
  ThetaMode theta_mode = ThetaMode::Constant;

  int covariate_count() const { return static_cast<int>(beta_u.size()) - 1; }
  int free_parameter_count() const;
  void validate() const;

  static CoefficientVector zero(int p, ThetaMode mode);
};

struct Predictors {
  double lambda_u;
  double lambda_v;
  double theta;
  double capital_lambda;
};

/// Evaluates the linear predictors for one design row:
/// lambda = exp(eta) for both rates, theta = eta_theta, and the derived
/// rate ratio Lambda = exp(eta_U - eta_V). Throws FitDivergenceError when a
/// predictor exceeds 700 in magnitude.
Predictors predictors(const CoefficientVector& gamma, const Eigen::VectorXd& x_row);

struct NegLoglikDiagnostics {
  int bad_row = -1;
  std::string reason;
};

/// Negative joint log-likelihood of the paired observations. Rows whose
/// per-row theta is within the independence window use the factorized
/// density. Returns +infinity (with diagnostics) instead of throwing when a
/// row's density degenerates, so the optimizer can back off.
double neg_loglik(const CoefficientVector& gamma, const Dataset& data,
                  NegLoglikDiagnostics* diag = nullptr);

struct FitOptions {
  double fd_step_rel = 1e-6;       ///< central-difference gradient step
  double gradient_tol = 1e-5;      ///< max-norm stopping rule
  double rel_f_tol = 1e-10;        ///< relative log-likelihood change rule
  int max_iterations = 500;
  double hessian_step_rel = 1e-4;  ///< observed-information step
  bool compute_information = true;
  bool ridge_fallback = false;     ///< regularize an indefinite information matrix
};

struct FitResult {
  CoefficientVector gamma_hat;
  double loglik = 0.0;
  double bic = 0.0;
  Eigen::MatrixXd neg_hessian_inv;  ///< inverse observed information, free-parameter space
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::string status;
  int n_obs = 0;
  std::vector<std::string> covariate_names;
  std::vector<std::string> parameter_names;  ///< free parameters, shapes as zeta
};

/// Maximum-likelihood fit. The shape constraint delta > 1 is enforced by
/// optimizing zeta = log(delta - 1), so plain quasi-Newton iterations apply.
/// Deterministic given data, init and options.
FitResult fit(const Dataset& data, ThetaMode theta_mode,
              const std::optional<CoefficientVector>& init = std::nullopt,
              const FitOptions& opts = {});

/// Starting values: per-component gamma regressions with log link on the
/// rate (method-of-moments shapes clipped above 1.05) and the association
/// intercept from inverting Kendall's tau.
CoefficientVector initial_values(const Dataset& data, ThetaMode theta_mode);

/// The conditional ratio law at a new covariate row.
RatioLaw predict_law(const FitResult& fit, const Eigen::VectorXd& x_row);
RatioLaw predict_law(const CoefficientVector& gamma, const Eigen::VectorXd& x_row);

/// Quantile residuals Phi^-1(F_R(r_i | x_i)); standard normal under a
/// correctly specified model.
Eigen::VectorXd quantile_residuals(const FitResult& fit, const Dataset& data,
                                   const QuadratureConfig& cfg = {});

// Free-parameter packing (used by the optimizer and the inference module).
// Layout: beta_u, beta_v, beta_theta (1 or p+1 entries), zeta_u, zeta_v.
Eigen::VectorXd pack_free_parameters(const CoefficientVector& gamma);
CoefficientVector unpack_free_parameters(const Eigen::VectorXd& x, int p, ThetaMode mode);
std::vector<std::string> free_parameter_names(int p, ThetaMode mode,
                                              const std::vector<std::string>& cov_names);

}  // namespace fcgam
