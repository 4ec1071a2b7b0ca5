#pragma once

#include <functional>

#include "fcgam/errors.hpp"

namespace fcgam {

/// Settings for the adaptive Gauss-Kronrod integrator.
struct QuadratureConfig {
  int node_count = 15;        ///< Kronrod panel size, 15 (G7K15) or 31 (G15K31)
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 200;

  void validate() const;
};

struct QuadResult {
  double value;
  double err_est;
};

/// Integrates f over the open interval (a, b). All evaluation nodes are
/// strictly interior, so integrands may be unbounded at the endpoints as
/// long as the integral exists. Panels are bisected worst-error-first until
/// the total error estimate drops below max(abs_tol, rel_tol*|value|).
/// Throws QuadratureError (carrying the best estimate) when the subdivision
/// budget runs out. Deterministic for a fixed config.
QuadResult integrate_interval(const std::function<double(double)>& f, double a, double b,
                              const QuadratureConfig& cfg);

/// integrate_interval specialized to (0, 1), the domain of every copula
/// ratio integral in this library.
QuadResult integrate_unit_interval(const std::function<double(double)>& f,
                                   const QuadratureConfig& cfg);

}  // namespace fcgam
