#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace fcgam {

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Central finite-difference gradient with per-coordinate relative step.
Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x,
                            double rel_step = 1e-6);

/// Central finite-difference Hessian, symmetrized as (H + H^T) / 2.
Eigen::MatrixXd fd_hessian(const Objective& f, const Eigen::VectorXd& x,
                           double rel_step = 1e-4);

struct BfgsOptions {
  double gradient_tol = 1e-5;  ///< max-norm convergence threshold
  double rel_f_tol = 1e-10;    ///< relative objective-change threshold
  int max_iterations = 500;
  double fd_step_rel = 1e-6;   ///< used when no analytic gradient is supplied
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  int function_evals = 0;
  bool converged = false;
  std::string status;
};

/// Quasi-Newton minimizer with inverse-Hessian BFGS updates and a
/// backtracking Armijo line search with quadratic interpolation. Infinite
/// objective values are treated as out-of-bounds trial points. Gradients
/// default to central finite differences.
BfgsResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                         const BfgsOptions& opts = {},
                         const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad = {});

}  // namespace fcgam
