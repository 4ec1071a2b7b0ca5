#pragma once

#include <Eigen/Dense>

namespace fcgam::detail {

/// Ordinary least squares via column-pivoted QR.
inline Eigen::VectorXd ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  return X.colPivHouseholderQr().solve(y);
}

/// Gamma regression with log link on the mean, fitted by iteratively
/// reweighted least squares. The working weights are constant under this
/// link, so each step reduces to OLS on the working response.
inline Eigen::VectorXd gamma_glm_mean_coefficients(const Eigen::MatrixXd& X,
                                                   const Eigen::VectorXd& y) {
  Eigen::VectorXd alpha = ols(X, y.array().log().matrix());
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd eta = X * alpha;
    eta = eta.cwiseMax(-30.0).cwiseMin(30.0);
    const Eigen::VectorXd mu = eta.array().exp();
    const Eigen::VectorXd z = eta + ((y - mu).cwiseQuotient(mu));
    const Eigen::VectorXd next = ols(X, z);
    const double delta = (next - alpha).lpNorm<Eigen::Infinity>();
    alpha = next;
    if (delta < 1e-12) break;
  }
  return alpha;
}

/// Squared-coefficient-of-variation dispersion of a fitted gamma GLM.
inline double gamma_glm_dispersion(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& alpha) {
  const Eigen::VectorXd mu = (X * alpha).array().exp();
  const Eigen::VectorXd resid = (y - mu).cwiseQuotient(mu);
  const double dof = std::max<double>(1.0, static_cast<double>(y.size() - X.cols()));
  return resid.squaredNorm() / dof;
}

}  // namespace fcgam::detail
