#include "fcgam/optimize.hpp"

#include <cmath>
#include <limits>

namespace fcgam {

Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x, double rel_step) {
  const Eigen::Index k = x.size();
  Eigen::VectorXd g(k);
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const Objective& f, const Eigen::VectorXd& x, double rel_step) {
  const Eigen::Index k = x.size();
  Eigen::VectorXd h(k);
  for (Eigen::Index i = 0; i < k; ++i) h[i] = rel_step * std::max(1.0, std::abs(x[i]));

  const double f0 = f(x);
  Eigen::MatrixXd H(k, k);
  Eigen::VectorXd xp = x;

  for (Eigen::Index i = 0; i < k; ++i) {
    xp[i] = x[i] + h[i];
    const double fpp = f(xp);
    xp[i] = x[i] - h[i];
    const double fmm = f(xp);
    xp[i] = x[i];
    H(i, i) = (fpp - 2.0 * f0 + fmm) / (h[i] * h[i]);
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      xp[i] = x[i] + h[i];
      xp[j] = x[j] + h[j];
      const double fpp = f(xp);
      xp[j] = x[j] - h[j];
      const double fpm = f(xp);
      xp[i] = x[i] - h[i];
      const double fmm = f(xp);
      xp[j] = x[j] + h[j];
      const double fmp = f(xp);
      xp[i] = x[i];
      xp[j] = x[j];
      const double value = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
      H(i, j) = value;
      H(j, i) = value;
    }
  }
  return 0.5 * (H + H.transpose());
}

BfgsResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0, const BfgsOptions& opts,
                         const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad) {
  const Eigen::Index k = x0.size();
  BfgsResult out;
  int evals = 0;

  const auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    const double value = f(x);
    return std::isnan(value) ? std::numeric_limits<double>::infinity() : value;
  };
  const auto gradient = [&](const Eigen::VectorXd& x) {
    if (grad) return grad(x);
    evals += 2 * static_cast<int>(k);
    return fd_gradient(f, x, opts.fd_step_rel);
  };

  Eigen::VectorXd x = x0;
  double fx = eval(x);
  if (!std::isfinite(fx)) {
    out.x = x;
    out.f = fx;
    out.gradient = Eigen::VectorXd::Zero(k);
    out.status = "objective not finite at the initial point";
    return out;
  }
  Eigen::VectorXd g = gradient(x);
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(k, k);
  bool scaled = false;

  const double c1 = 1e-4;
  int iter = 0;
  std::string status = "max iterations reached";
  bool converged = false;

  for (; iter < opts.max_iterations; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() < opts.gradient_tol) {
      converged = true;
      status = "gradient tolerance reached";
      break;
    }

    Eigen::VectorXd d = -(H * g);
    double dg = d.dot(g);
    if (!(dg < 0.0)) {
      H.setIdentity();
      d = -g;
      dg = d.dot(g);
    }

    // Backtracking Armijo search with quadratic interpolation.
    double alpha = 1.0;
    double f_trial = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_trial;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_trial = x + alpha * d;
      f_trial = eval(x_trial);
      if (std::isfinite(f_trial) && f_trial <= fx + c1 * alpha * dg) {
        accepted = true;
        break;
      }
      double next;
      if (std::isfinite(f_trial)) {
        // Minimizer of the quadratic through (0, fx), slope dg, (alpha, f_trial).
        next = -0.5 * dg * alpha * alpha / (f_trial - fx - dg * alpha);
      } else {
        next = 0.1 * alpha;
      }
      alpha = (next > 1e-3 * alpha && next < 0.9 * alpha) ? next : 0.5 * alpha;
      if (alpha * d.lpNorm<Eigen::Infinity>() <
          1e-14 * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
        break;
      }
    }
    if (!accepted) {
      status = "line search failed";
      break;
    }

    Eigen::VectorXd g_new = gradient(x_trial);
    const Eigen::VectorXd s = x_trial - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);

    const double f_prev = fx;
    x = x_trial;
    fx = f_trial;
    g = g_new;

    if (sy > 1e-10 * s.norm() * y.norm()) {
      if (!scaled) {
        H = (sy / y.squaredNorm()) * Eigen::MatrixXd::Identity(k, k);
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * y;
      // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
      H.noalias() -= rho * (s * Hy.transpose() + Hy * s.transpose());
      H.noalias() += rho * rho * (y.dot(Hy) + sy) * (s * s.transpose());
    }

    if (std::abs(f_prev - fx) <= opts.rel_f_tol * std::max(1.0, std::abs(fx))) {
      converged = true;
      status = "relative objective change below tolerance";
      ++iter;
      break;
    }
  }

  // A failed line search at a flat point still counts as converged when the
  // gradient is already at its finite-difference noise floor.
  if (!converged && status == "line search failed" &&
      g.lpNorm<Eigen::Infinity>() < 10.0 * opts.gradient_tol) {
    converged = true;
    status = "line search floor with small gradient";
  }

  out.x = std::move(x);
  out.f = fx;
  out.gradient = std::move(g);
  out.iterations = iter;
  out.function_evals = evals;
  out.converged = converged;
  out.status = status;
  return out;
}

}  // namespace fcgam
