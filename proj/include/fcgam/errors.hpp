#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fcgam {

/// Malformed or inconsistent user input (bad CSV, invalid parameters, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative routine exhausted its budget without reaching tolerance.
class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive quadrature ran out of subdivisions; carries the best estimate.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& msg, double value, double err_est)
      : std::runtime_error(msg), value(value), err_est(err_est) {}
  double value;
  double err_est;
};

/// Root bracketing for a quantile failed; usually means the CDF evaluation
/// is too noisy for the requested tolerance.
class BracketingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A linear predictor left the range where exp() is meaningful.
class FitDivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Observed information matrix failed its Cholesky factorization.
class IndefiniteInformationError : public std::runtime_error {
 public:
  IndefiniteInformationError(const std::string& msg, std::vector<double> eigenvalues)
      : std::runtime_error(msg), eigenvalues(std::move(eigenvalues)) {}
  std::vector<double> eigenvalues;
};

}  // namespace fcgam
