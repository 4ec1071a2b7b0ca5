#include "fcgam/design.hpp"

#include <cmath>

#include "fcgam/errors.hpp"

namespace fcgam {

DesignMatrix DesignMatrix::with_intercept(const Eigen::MatrixXd& covariates,
                                          std::vector<std::string> names) {
  DesignMatrix out;
  out.values.resize(covariates.rows(), covariates.cols() + 1);
  out.values.col(0).setOnes();
  out.values.rightCols(covariates.cols()) = covariates;
  if (names.empty()) {
    for (Eigen::Index j = 0; j < covariates.cols(); ++j) {
      names.push_back("x" + std::to_string(j + 1));
    }
  }
  out.covariate_names = std::move(names);
  out.validate();
  return out;
}

DesignMatrix DesignMatrix::intercept_only(int n) {
  DesignMatrix out;
  out.values = Eigen::MatrixXd::Ones(n, 1);
  return out;
}

void DesignMatrix::validate() const {
  if (values.rows() < 1 || values.cols() < 1) {
    throw ValidationError("design matrix: empty");
  }
  if (!values.allFinite()) {
    throw ValidationError("design matrix: non-finite entries");
  }
  if ((values.col(0).array() != 1.0).any()) {
    throw ValidationError("design matrix: first column must be the intercept");
  }
  if (covariate_names.size() != static_cast<size_t>(p())) {
    throw ValidationError("design matrix: covariate name count mismatch");
  }
}

void Dataset::validate() const {
  x.validate();
  if (u.size() != v.size() || u.size() != x.values.rows()) {
    throw ValidationError("dataset: u, v and design row counts disagree");
  }
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0.0) || !std::isfinite(u[i])) {
      throw ValidationError("dataset: u must be positive and finite (row " +
                            std::to_string(i + 1) + ")");
    }
    if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
      throw ValidationError("dataset: v must be positive and finite (row " +
                            std::to_string(i + 1) + ")");
    }
  }
}

}  // namespace fcgam
