#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace fcgam {

/// Regression design: n x (p + 1) with a leading intercept column of ones.
struct DesignMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> covariate_names;  ///< size p, no intercept entry

  int n() const { return static_cast<int>(values.rows()); }
  int p() const { return static_cast<int>(values.cols()) - 1; }

  /// Prepends the intercept column and fills default names x1..xp.
  static DesignMatrix with_intercept(const Eigen::MatrixXd& covariates,
                                     std::vector<std::string> names = {});

  /// Intercept-only design for n observations.
  static DesignMatrix intercept_only(int n);

  void validate() const;
};

/// Paired component observations with their shared design.
struct Dataset {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  DesignMatrix x;

  int n() const { return static_cast<int>(u.size()); }
  Eigen::VectorXd ratios() const { return u.cwiseQuotient(v); }

  void validate() const;
};

}  // namespace fcgam
