#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "fcgam/copula.hpp"
#include "fcgam/model.hpp"
#include "fcgam/optimize.hpp"
#include "fcgam/simlab.hpp"
#include "fcgam/special.hpp"
#include "support/oracles.hpp"

using namespace fcgam;

namespace {

// Intercept-only data from the model law.
Dataset simulate_intercept_only(int n, double lambda_u, double shape_u, double lambda_v,
                                double shape_v, double theta, uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.x = DesignMatrix::intercept_only(n);
  data.u.resize(n);
  data.v.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto [u, v] =
        sample_pair({lambda_u, shape_u}, {lambda_v, shape_v}, {theta}, rng);
    data.u[i] = u;
    data.v[i] = v;
  }
  return data;
}

CoefficientVector intercept_gamma(double b_u0, double b_v0, double theta0, double shape_u,
                                  double shape_v) {
  CoefficientVector g = CoefficientVector::zero(0, ThetaMode::Constant);
  g.beta_u[0] = b_u0;
  g.beta_v[0] = b_v0;
  g.beta_theta[0] = theta0;
  g.shape_u = shape_u;
  g.shape_v = shape_v;
  return g;
}

}  // namespace

TEST_CASE("predictors") {
  CoefficientVector g = CoefficientVector::zero(4, ThetaMode::Modeled);
  g.shape_u = 2.0;
  g.shape_v = 2.0;
  Eigen::VectorXd row(5);
  row << 1.0, 0.3, -0.2, 1.0, 0.0;

  const Predictors zero = predictors(g, row);
  CHECK(zero.lambda_u == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(zero.lambda_v == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(zero.theta == 0.0);
  CHECK(zero.capital_lambda == doctest::Approx(1.0).epsilon(1e-14));

  g.beta_u[0] = std::log(2.0);
  CHECK(predictors(g, row).lambda_u == doctest::Approx(2.0).epsilon(1e-14));

  // Rate-ratio cancellation: beta_u - beta_v = (0, .6, -.6, .6, -.6) at
  // x = (1, 1, 1, 0, 0) gives Lambda = exp(0.6 - 0.6) = 1.
  g = CoefficientVector::zero(4, ThetaMode::Constant);
  g.shape_u = g.shape_v = 2.0;
  g.beta_u << 0.0, 0.3, -0.3, 0.3, -0.3;
  g.beta_v << 0.0, -0.3, 0.3, -0.3, 0.3;
  Eigen::VectorXd x(5);
  x << 1.0, 1.0, 1.0, 0.0, 0.0;
  CHECK(predictors(g, x).capital_lambda == doctest::Approx(1.0).epsilon(1e-14));

  g.beta_u[1] = 800.0;
  CHECK_THROWS_AS(predictors(g, x), FitDivergenceError);
  CHECK_THROWS_AS(predictors(g, Eigen::VectorXd::Ones(3)), ValidationError);
}

TEST_CASE("neg_loglik factorizes at independence") {
  Dataset data;
  data.x = DesignMatrix::intercept_only(1);
  data.u = Eigen::VectorXd::Constant(1, 0.8);
  data.v = Eigen::VectorXd::Constant(1, 1.7);

  CoefficientVector g = intercept_gamma(0.2, -0.1, 0.0, 2.5, 3.5);
  const double nll = neg_loglik(g, data);
  const double expected = -(gamma_log_pdf({std::exp(0.2), 2.5}, 0.8) +
                            gamma_log_pdf({std::exp(-0.1), 3.5}, 1.7));
  CHECK(nll == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("neg_loglik single-row value against a direct evaluation") {
  // u = v = 1, unit rates, shapes 2, theta 1: the joint density is
  // c_theta(P(2,1), P(2,1)) * e^-1 * e^-1.
  Dataset data;
  data.x = DesignMatrix::intercept_only(1);
  data.u = Eigen::VectorXd::Constant(1, 1.0);
  data.v = Eigen::VectorXd::Constant(1, 1.0);
  CoefficientVector g = intercept_gamma(0.0, 0.0, 1.0, 2.0, 2.0);

  const long double p21 = oracle::gamma_p_shape2(1.0L);
  const long double c = oracle::frank_density_naive(1.0L, p21, p21);
  const long double joint = c * std::exp(-1.0L) * std::exp(-1.0L);
  CHECK(neg_loglik(g, data) ==
        doctest::Approx(-static_cast<double>(std::log(joint))).epsilon(1e-10));
}

TEST_CASE("neg_loglik is permutation invariant") {
  const SimConfig cfg = study_preset("1", -5.0, 60, 1, 42);
  Rng rng(7);
  Dataset data = generate_dataset(cfg, rng);
  const CoefficientVector g = initial_values(data, ThetaMode::Constant);
  const double base = neg_loglik(g, data);

  std::vector<int> perm(data.n());
  for (int i = 0; i < data.n(); ++i) perm[i] = i;
  std::mt19937 shuffler(99);
  std::shuffle(perm.begin(), perm.end(), shuffler);
  Dataset shuffled = data;
  for (int i = 0; i < data.n(); ++i) {
    shuffled.u[i] = data.u[perm[i]];
    shuffled.v[i] = data.v[perm[i]];
    shuffled.x.values.row(i) = data.x.values.row(perm[i]);
  }
  CHECK(neg_loglik(g, shuffled) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("neg_loglik signals divergence with +inf") {
  Dataset data;
  data.x = DesignMatrix::intercept_only(2);
  data.u = Eigen::VectorXd::Constant(2, 1.0);
  data.v = Eigen::VectorXd::Constant(2, 1.0);
  CoefficientVector g = intercept_gamma(701.0, 0.0, 1.0, 2.0, 2.0);
  NegLoglikDiagnostics diag;
  CHECK(std::isinf(neg_loglik(g, data, &diag)));
  CHECK(diag.bad_row == 0);
}

TEST_CASE("finite-difference gradient agrees across two schemes") {
  const SimConfig cfg = study_preset("1", -5.0, 80, 1, 10);
  Rng rng(11);
  const Dataset data = generate_dataset(cfg, rng);
  const Objective f = [&](const Eigen::VectorXd& x) {
    return neg_loglik(unpack_free_parameters(x, 4, ThetaMode::Constant), data);
  };
  const Eigen::VectorXd x0 = pack_free_parameters(initial_values(data, ThetaMode::Constant));

  std::mt19937 gen(5);
  std::normal_distribution<double> jitter(0.0, 0.05);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd x = x0;
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += jitter(gen);
    const Eigen::VectorXd g1 = fd_gradient(f, x, 1e-6);
    // Richardson extrapolation of two coarser central differences.
    const Eigen::VectorXd g_h = fd_gradient(f, x, 4e-5);
    const Eigen::VectorXd g_h2 = fd_gradient(f, x, 2e-5);
    const Eigen::VectorXd g2 = (4.0 * g_h2 - g_h) / 3.0;
    const double scale = std::max(1.0, g1.lpNorm<Eigen::Infinity>());
    CHECK((g1 - g2).lpNorm<Eigen::Infinity>() / scale < 1e-4);
  }
}

TEST_CASE("initial values") {
  // Strong positive association, tau around 0.46, inverse near 5.
  {
    const Dataset data = simulate_intercept_only(1500, 1.0, 2.0, 1.0, 6.0, 5.0, 21);
    const CoefficientVector g = initial_values(data, ThetaMode::Constant);
    CHECK(std::abs(g.beta_theta[0] - 5.0) < 1.0);
    CHECK(g.shape_u > 1.0);
    CHECK(g.shape_v > 1.0);
  }
  // Independent components: association starts near zero.
  {
    const Dataset data = simulate_intercept_only(1500, 1.0, 2.0, 1.0, 6.0, 0.0, 22);
    const CoefficientVector g = initial_values(data, ThetaMode::Constant);
    CHECK(std::abs(g.beta_theta[0]) < 1.0);
  }
  // Rate recovery through the gamma regression start.
  {
    const Dataset data = simulate_intercept_only(4000, 2.0, 3.0, 0.5, 2.0, 1.0, 23);
    const CoefficientVector g = initial_values(data, ThetaMode::Constant);
    CHECK(std::exp(g.beta_u[0]) == doctest::Approx(2.0).epsilon(0.15));
    CHECK(std::exp(g.beta_v[0]) == doctest::Approx(0.5).epsilon(0.15));
  }
  // Degenerate data is rejected.
  {
    Dataset data;
    data.x = DesignMatrix::intercept_only(10);
    data.u = Eigen::VectorXd::Constant(10, 2.0);
    data.v = Eigen::VectorXd::LinSpaced(10, 1.0, 2.0);
    CHECK_THROWS_AS(initial_values(data, ThetaMode::Constant), ValidationError);
  }
}

TEST_CASE("fit recovers intercept-only truth") {
  const Dataset data = simulate_intercept_only(4000, 1.0, 2.0, 1.0, 6.0, -1.0, 31);
  const FitResult res = fit(data, ThetaMode::Constant);
  CHECK(res.converged);
  CHECK(std::exp(res.gamma_hat.beta_u[0]) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::exp(res.gamma_hat.beta_v[0]) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(res.gamma_hat.shape_u == doctest::Approx(2.0).epsilon(0.05));
  CHECK(res.gamma_hat.shape_v == doctest::Approx(6.0).epsilon(0.05));
  CHECK(res.gamma_hat.shape_u > 1.0);
  CHECK(res.gamma_hat.shape_v > 1.0);

  // BIC bookkeeping: k ln n - 2 loglik with 5 free parameters.
  CHECK(res.bic == doctest::Approx(5.0 * std::log(4000.0) - 2.0 * res.loglik).epsilon(1e-12));

  // Restarting at the optimum stays there.
  const FitResult again = fit(data, ThetaMode::Constant, res.gamma_hat);
  CHECK(again.converged);
  CHECK(again.gradient_norm < 1e-5);
  CHECK(std::abs(again.loglik - res.loglik) < 1e-8);
}

TEST_CASE("fit validation errors") {
  const Dataset data = simulate_intercept_only(30, 1.0, 2.0, 1.0, 2.0, 1.0, 5);

  // Rank-deficient design: duplicate covariate columns.
  Dataset bad = data;
  Eigen::MatrixXd covs(30, 2);
  covs.col(0) = Eigen::VectorXd::LinSpaced(30, -1.0, 1.0);
  covs.col(1) = 2.0 * covs.col(0);
  bad.x = DesignMatrix::with_intercept(covs);
  CHECK_THROWS_AS(fit(bad, ThetaMode::Constant), ValidationError);

  // Too few observations for the parameter count.
  const Dataset tiny = simulate_intercept_only(4, 1.0, 2.0, 1.0, 2.0, 1.0, 6);
  CHECK_THROWS_AS(fit(tiny, ThetaMode::Constant), ValidationError);
}

TEST_CASE("predict_law") {
  const Dataset data = simulate_intercept_only(600, 1.0, 2.0, 1.0, 3.0, 2.0, 47);
  const FitResult res = fit(data, ThetaMode::Constant);

  // Intercept-only: the law cannot depend on the covariate row.
  const RatioLaw a = predict_law(res, Eigen::VectorXd::Ones(1));
  CHECK(a.capital_lambda > 0.0);
  CHECK(a.shape_u == res.gamma_hat.shape_u);

  // A binary flag scales Lambda by exp(beta_u_j - beta_v_j).
  CoefficientVector g = CoefficientVector::zero(1, ThetaMode::Constant);
  g.shape_u = 2.0;
  g.shape_v = 3.0;
  g.beta_u << 0.1, 0.7;
  g.beta_v << -0.2, 0.3;
  FitResult manual;
  manual.gamma_hat = g;
  Eigen::VectorXd x_off(2), x_on(2);
  x_off << 1.0, 0.0;
  x_on << 1.0, 1.0;
  const double scale = predict_law(manual, x_on).capital_lambda /
                       predict_law(manual, x_off).capital_lambda;
  CHECK(scale == doctest::Approx(std::exp(0.7 - 0.3)).epsilon(1e-12));

  CHECK_THROWS_AS(predict_law(manual, Eigen::VectorXd::Ones(3)), ValidationError);

  // Predicted median agrees with the definition as the smallest r whose CDF
  // reaches one half, located by a dense grid scan refined three times.
  const QuadratureConfig quad;
  const RatioLaw law = predict_law(res, Eigen::VectorXd::Ones(1));
  const double median = ratio_quantile(law, 0.5, quad);
  double lo = median / 4.0, hi = median * 4.0;
  for (int pass = 0; pass < 12; ++pass) {
    const int points = 64;
    double found = hi;
    for (int i = 0; i <= points; ++i) {
      const double r = lo + (hi - lo) * i / points;
      if (ratio_cdf(law, r, quad) >= 0.5) {
        found = r;
        break;
      }
    }
    const double step = (hi - lo) / points;
    lo = std::max(found - step, 1e-12);
    hi = found;
    if (hi - lo < 1e-7 * median) break;
  }
  CHECK(median == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-6));
}

TEST_CASE("quantile residuals") {
  const SimConfig cfg = study_preset("1", -5.0, 500, 1, 77);
  Rng rng(77);
  const Dataset data = generate_dataset(cfg, rng);

  // Residuals under the true parameters are standard normal by the
  // probability integral transform.
  FitResult truth_fit;
  truth_fit.gamma_hat = cfg.truth();
  truth_fit.converged = true;
  const Eigen::VectorXd resid = quantile_residuals(truth_fit, data);
  std::vector<double> values(resid.data(), resid.data() + resid.size());
  const double ks = oracle::ks_distance(values, [](double x) {
    return fcgam::std_normal_cdf(x);
  });
  CHECK(ks < 0.07);

  // The residual of an observation sitting at its conditional median is zero.
  Eigen::VectorXd base_row(5);
  base_row << 1.0, 0.0, 0.0, 0.0, 0.0;
  const RatioLaw law = predict_law(truth_fit, base_row);
  const double med = ratio_quantile(law, 0.5, QuadratureConfig{});
  Dataset med_row;
  med_row.x.values = Eigen::MatrixXd::Zero(1, 5);
  med_row.x.values(0, 0) = 1.0;
  med_row.x.covariate_names = {"x1", "x2", "x3", "x4"};
  med_row.u = Eigen::VectorXd::Constant(1, med);
  med_row.v = Eigen::VectorXd::Constant(1, 1.0);
  const Eigen::VectorXd r0 = quantile_residuals(truth_fit, med_row);
  CHECK(std::abs(r0[0]) < 1e-4);

  // Residual ordering follows the ratio ordering for a fixed covariate row.
  Dataset three;
  three.x.values = Eigen::MatrixXd::Zero(3, 5);
  three.x.values.col(0).setOnes();
  three.x.covariate_names = {"x1", "x2", "x3", "x4"};
  three.u.resize(3);
  three.v.resize(3);
  three.u << 0.5 * med, med, 2.0 * med;
  three.v << 1.0, 1.0, 1.0;
  const Eigen::VectorXd rs = quantile_residuals(truth_fit, three);
  CHECK(rs[0] < rs[1]);
  CHECK(rs[1] < rs[2]);
}

TEST_CASE("theta mode bookkeeping") {
  CHECK(theta_mode_from_name("constant") == ThetaMode::Constant);
  CHECK(theta_mode_from_name("modeled") == ThetaMode::Modeled);
  CHECK_THROWS_AS(theta_mode_from_name("wat"), ValidationError);

  CoefficientVector g = CoefficientVector::zero(2, ThetaMode::Constant);
  g.shape_u = g.shape_v = 2.0;
  CHECK(g.free_parameter_count() == 9);
  g.theta_mode = ThetaMode::Modeled;
  CHECK(g.free_parameter_count() == 11);

  // Round trip through the packing.
  g.beta_u << 0.1, -0.2, 0.3;
  g.beta_v << 0.4, 0.5, -0.6;
  g.beta_theta << -1.0, 2.0, 0.25;
  g.shape_u = 1.7;
  g.shape_v = 3.14;
  const CoefficientVector back =
      unpack_free_parameters(pack_free_parameters(g), 2, ThetaMode::Modeled);
  CHECK((back.beta_u - g.beta_u).lpNorm<Eigen::Infinity>() < 1e-14);
  CHECK((back.beta_theta - g.beta_theta).lpNorm<Eigen::Infinity>() < 1e-14);
  CHECK(back.shape_u == doctest::Approx(1.7).epsilon(1e-12));

  // Constant mode with nonzero slopes is rejected.
  CoefficientVector bad = CoefficientVector::zero(2, ThetaMode::Constant);
  bad.shape_u = bad.shape_v = 2.0;
  bad.beta_theta[1] = 0.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}
