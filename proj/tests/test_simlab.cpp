#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fcgam/detail/glm.hpp"
#include "fcgam/simlab.hpp"
#include "support/oracles.hpp"

using namespace fcgam;

TEST_CASE("covariate generator hits its marginals and correlations") {
  Rng rng(314);
  const DesignMatrix x = generate_covariates(100000, rng);
  REQUIRE(x.p() == 4);
  const Eigen::MatrixXd covs = x.values.rightCols(4);

  const Eigen::VectorXd mean = covs.colwise().mean();
  CHECK(std::abs(mean[0]) < 0.02);
  CHECK(std::abs(mean[1]) < 0.02);
  CHECK(mean[2] == doctest::Approx(0.5).epsilon(0.04));
  CHECK(mean[3] == doctest::Approx(0.5).epsilon(0.04));

  Eigen::MatrixXd centered = covs.rowwise() - mean.transpose();
  const Eigen::VectorXd sd =
      (centered.array().square().colwise().sum() / (covs.rows() - 1.0)).sqrt();
  CHECK(sd[0] == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sd[1] == doctest::Approx(1.0).epsilon(0.02));

  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      const double corr =
          centered.col(a).dot(centered.col(b)) / ((covs.rows() - 1.0) * sd[a] * sd[b]);
      CHECK(corr == doctest::Approx(0.4).epsilon(0.075));
    }
  }

  // Binary columns are exactly zero/one valued.
  CHECK(((covs.col(2).array() == 0.0) || (covs.col(2).array() == 1.0)).all());
}

TEST_CASE("study presets encode the documented scenarios") {
  const SimConfig s1 = study_preset("1", -5.0, 500, 10, 1);
  CHECK(s1.beta_u[1] == 0.4);
  CHECK(s1.beta_v[1] == -0.2);
  CHECK(s1.shape_u == 2.0);
  CHECK(s1.shape_v == 6.0);
  CHECK(s1.beta_theta[0] == -5.0);
  CHECK(s1.truth().theta_mode == ThetaMode::Constant);

  const SimConfig s2 = study_preset("2", 10.0, 500, 10, 1);
  CHECK(s2.beta_v[1] == 0.2);
  CHECK(s2.shape_v == 2.0);

  const SimConfig s3a = study_preset("3a", 0.0, 500, 10, 1);
  CHECK(s3a.beta_theta[0] == 0.0);
  CHECK(s3a.beta_theta[1] == 1.0);
  CHECK(s3a.beta_theta[4] == -0.5);
  CHECK(s3a.truth().theta_mode == ThetaMode::Modeled);

  CHECK_THROWS_AS(study_preset("9", 0.0, 10, 1, 1), ValidationError);
}

TEST_CASE("generated datasets follow the configured law") {
  SimConfig cfg = study_preset("1", -5.0, 4000, 1, 99);
  Rng rng(6);
  const Dataset data = generate_dataset(cfg, rng);
  REQUIRE(data.n() == 4000);
  CHECK((data.u.array() > 0.0).all());
  CHECK((data.v.array() > 0.0).all());

  // Rank correlation near the preset association.
  std::vector<double> us(data.u.data(), data.u.data() + data.n());
  std::vector<double> vs(data.v.data(), data.v.data() + data.n());
  const double tau_hat = oracle::kendall_tau_fast(us, vs);
  CHECK(std::abs(tau_hat - kendall_tau({-5.0})) < 0.04);
}

TEST_CASE("LN benchmark equals ordinary least squares") {
  // Exactly log-normal outcomes.
  Rng rng(41);
  const int n = 400;
  const DesignMatrix x = generate_covariates(n, rng);
  Eigen::VectorXd beta(5);
  beta << 0.3, 0.2, -0.1, 0.4, 0.0;
  Dataset data;
  data.x = x;
  data.u.resize(n);
  data.v = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) {
    const double y = x.values.row(i).dot(beta) + 0.3 * rng.normal();
    data.u[i] = std::exp(y);
  }

  const BenchmarkFit ln = fit_benchmark(BenchmarkKind::LN, data);
  CHECK(ln.converged);
  const Eigen::VectorXd ols_beta =
      detail::ols(x.values, data.ratios().array().log().matrix());
  CHECK((ln.params.head(5) - ols_beta).lpNorm<Eigen::Infinity>() < 1e-8);

  // Predictive log-likelihood includes the change-of-variable term.
  const double pll = ln.predictive_loglik(data);
  CHECK(pll == doctest::Approx(ln.loglik).epsilon(1e-12));
}

TEST_CASE("GA benchmark satisfies its score equation") {
  Rng rng(43);
  const int n = 500;
  Dataset data;
  data.x = DesignMatrix::intercept_only(n);
  data.u.resize(n);
  data.v = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) {
    data.u[i] = gamma_quantile({2.0, 3.0}, rng.uniform());
  }
  const BenchmarkFit ga = fit_benchmark(BenchmarkKind::GA, data);
  CHECK(ga.converged);
  // Intercept-only gamma regression: the fitted mean is the sample mean.
  CHECK(std::exp(ga.params[0]) == doctest::Approx(data.u.mean()).epsilon(1e-8));
}

TEST_CASE("GB2 benchmark recovers independence truth") {
  Rng rng(44);
  const int n = 5000;
  Dataset data;
  data.x = DesignMatrix::intercept_only(n);
  data.u.resize(n);
  data.v.resize(n);
  for (int i = 0; i < n; ++i) {
    data.u[i] = gamma_quantile({2.0, 2.0}, rng.uniform());
    data.v[i] = gamma_quantile({1.0, 3.0}, rng.uniform());
  }
  const BenchmarkFit gb2 = fit_benchmark(BenchmarkKind::GB2, data);
  CHECK(gb2.converged);
  CHECK(std::exp(gb2.params[0]) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(std::exp(gb2.params[1]) == doctest::Approx(2.0).epsilon(0.10));
  CHECK(std::exp(gb2.params[2]) == doctest::Approx(3.0).epsilon(0.10));
}

TEST_CASE("LSS benchmarks improve on their plain versions in-sample") {
  const SimConfig cfg = study_preset("1", -5.0, 600, 1, 123);
  Rng rng = Rng::stream(cfg.seed, 0);
  const Dataset data = generate_dataset(cfg, rng);
  const BenchmarkFit ln = fit_benchmark(BenchmarkKind::LN, data);
  const BenchmarkFit ln_lss = fit_benchmark(BenchmarkKind::LN_LSS, data);
  const BenchmarkFit ga = fit_benchmark(BenchmarkKind::GA, data);
  const BenchmarkFit ga_lss = fit_benchmark(BenchmarkKind::GA_LSS, data);
  REQUIRE(ln.converged);
  REQUIRE(ln_lss.converged);
  REQUIRE(ga.converged);
  REQUIRE(ga_lss.converged);
  CHECK(ln_lss.loglik >= ln.loglik - 1e-6);
  CHECK(ga_lss.loglik >= ga.loglik - 1e-6);
}

TEST_CASE("run_study is reproducible for any worker count") {
  SimConfig cfg = study_preset("1", -5.0, 150, 6, 20240915);
  StudyOptions opts;
  opts.methods = {"fcgam", "gb2", "ln"};
  opts.test_size = 100;
  opts.posterior_draws = 800;
  opts.jobs = 1;

  const SimMetrics serial = run_study(cfg, opts);
  opts.jobs = 3;
  const SimMetrics parallel = run_study(cfg, opts);

  REQUIRE(serial.records.size() == parallel.records.size());
  CHECK(serial.excluded == parallel.excluded);
  for (size_t i = 0; i < serial.records.size(); ++i) {
    const auto& a = serial.records[i];
    const auto& b = parallel.records[i];
    REQUIRE(a.ok == b.ok);
    if (!a.ok) continue;
    CHECK(a.estimates == b.estimates);
    CHECK(a.covered == b.covered);
    CHECK((a.rmse_median == b.rmse_median ||
           (std::isnan(a.rmse_median) && std::isnan(b.rmse_median))));
    for (const auto& [name, value] : a.pred_loglik) {
      CHECK(b.pred_loglik.at(name) == value);
    }
  }
  CHECK(serial.bias == parallel.bias);
  CHECK(serial.coverage == parallel.coverage);

  // Bookkeeping adds up on a clean run.
  CHECK(serial.requested == 6);
  CHECK(serial.completed + serial.excluded == 6);
  CHECK(serial.coef_names.size() == 8);

  // Every requested method reported a predictive value.
  CHECK(serial.pred_loglik.count("fcgam") == 1);
  CHECK(serial.pred_loglik.count("gb2") == 1);
  CHECK(serial.pred_loglik.count("ln") == 1);

  // The first method must be the copula model.
  StudyOptions bad = opts;
  bad.methods = {"ln"};
  CHECK_THROWS_AS(run_study(cfg, bad), ValidationError);
}
