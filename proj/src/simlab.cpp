#include "fcgam/simlab.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <thread>
#include <unordered_map>

#include "fcgam/copula.hpp"
#include "fcgam/detail/glm.hpp"
#include "fcgam/errors.hpp"
#include "fcgam/optimize.hpp"
#include "fcgam/special.hpp"

namespace fcgam {

namespace {

// Latent correlations calibrated so every realized pairwise Pearson
// correlation equals 0.4 after dichotomizing the binary coordinates
// (derivation and simulation check: scripts/calibrate_covariate_correlation.py).
constexpr double kLatentContCont = 0.4;
constexpr double kLatentContBin = 0.5013256549262001;  // 0.2 * sqrt(2*pi)
constexpr double kLatentBinBin = 0.5877852522924731;   // sin(0.2*pi)

const Eigen::MatrixXd& latent_cholesky() {
  static const Eigen::MatrixXd L = [] {
    Eigen::MatrixXd M(4, 4);
    M << 1.0, kLatentContCont, kLatentContBin, kLatentContBin,
        kLatentContCont, 1.0, kLatentContBin, kLatentContBin,
        kLatentContBin, kLatentContBin, 1.0, kLatentBinBin,
        kLatentContBin, kLatentContBin, kLatentBinBin, 1.0;
    return Eigen::MatrixXd(M.llt().matrixL());
  }();
  return L;
}

constexpr double kEtaGuard = 500.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Benchmark likelihoods. Each evaluates the log density of R (not of any
// transformed outcome), so values are comparable across methods.
// ---------------------------------------------------------------------------

double ln_row_loglik(double r, double mu, double sigma) {
  const double y = std::log(r);
  const double z = (y - mu) / sigma;
  return -0.5 * std::log(2.0 * M_PI) - std::log(sigma) - 0.5 * z * z - y;
}

double ga_row_loglik(double r, double mean, double shape) {
  const double rate = shape / mean;
  return shape * std::log(rate) + (shape - 1.0) * std::log(r) - rate * r - log_gamma(shape);
}

double benchmark_loglik(BenchmarkKind kind, const Eigen::VectorXd& params,
                        const Eigen::VectorXd& r, const Eigen::MatrixXd& X) {
  const int n = static_cast<int>(r.size());
  const int p1 = static_cast<int>(X.cols());
  double total = 0.0;
  switch (kind) {
    case BenchmarkKind::LN: {
      const Eigen::VectorXd eta = X * params.head(p1);
      const double sigma = params[p1];
      if (!(sigma > 0.0)) return -kInf;
      for (int i = 0; i < n; ++i) total += ln_row_loglik(r[i], eta[i], sigma);
      return total;
    }
    case BenchmarkKind::LN_LSS: {
      const Eigen::VectorXd eta_m = X * params.head(p1);
      const Eigen::VectorXd eta_s = X * params.segment(p1, p1);
      for (int i = 0; i < n; ++i) {
        if (std::abs(eta_s[i]) > 100.0) return -kInf;
        total += ln_row_loglik(r[i], eta_m[i], std::exp(eta_s[i]));
      }
      return total;
    }
    case BenchmarkKind::GA: {
      const Eigen::VectorXd eta = X * params.head(p1);
      const double log_shape = params[p1];
      if (std::abs(log_shape) > 30.0) return -kInf;
      const double shape = std::exp(log_shape);
      for (int i = 0; i < n; ++i) {
        if (std::abs(eta[i]) > kEtaGuard) return -kInf;
        total += ga_row_loglik(r[i], std::exp(eta[i]), shape);
      }
      return total;
    }
    case BenchmarkKind::GA_LSS: {
      const Eigen::VectorXd eta_m = X * params.head(p1);
      const Eigen::VectorXd eta_s = X * params.segment(p1, p1);
      for (int i = 0; i < n; ++i) {
        if (std::abs(eta_m[i]) > kEtaGuard || std::abs(eta_s[i]) > 15.0) return -kInf;
        const double sigma2 = std::exp(2.0 * eta_s[i]);
        total += ga_row_loglik(r[i], std::exp(eta_m[i]), 1.0 / sigma2);
      }
      return total;
    }
    case BenchmarkKind::GB2: {
      const Eigen::VectorXd eta = X * params.head(p1);
      const double zu = params[p1];
      const double zv = params[p1 + 1];
      if (std::abs(zu) > 15.0 || std::abs(zv) > 15.0) return -kInf;
      const RatioLaw base{1.0, std::exp(zu), std::exp(zv), 0.0};
      for (int i = 0; i < n; ++i) {
        if (std::abs(eta[i]) > kEtaGuard) return -kInf;
        RatioLaw law = base;
        law.capital_lambda = std::exp(eta[i]);
        total += gb2_log_pdf(law, r[i]);
      }
      return total;
    }
  }
  return -kInf;
}

BenchmarkFit fit_benchmark_bfgs(BenchmarkKind kind, const Eigen::VectorXd& start,
                                const Eigen::VectorXd& r, const Eigen::MatrixXd& X) {
  const Objective objective = [&](const Eigen::VectorXd& x) {
    return -benchmark_loglik(kind, x, r, X);
  };
  BfgsOptions opts;
  const BfgsResult res = minimize_bfgs(objective, start, opts);
  BenchmarkFit out;
  out.kind = kind;
  out.converged = res.converged;
  out.parameter_count = static_cast<int>(start.size());
  out.loglik = -res.f;
  out.params = res.x;
  return out;
}

struct MethodSpec {
  std::string name;
  bool is_fcgam = false;
  ThetaMode mode = ThetaMode::Constant;
  BenchmarkKind kind = BenchmarkKind::LN;
};

MethodSpec parse_method(const std::string& name) {
  if (name == "fcgam") return {name, true, ThetaMode::Constant, {}};
  if (name == "fcgam_modeled") return {name, true, ThetaMode::Modeled, {}};
  if (name == "ln") return {name, false, {}, BenchmarkKind::LN};
  if (name == "ln_lss") return {name, false, {}, BenchmarkKind::LN_LSS};
  if (name == "ga") return {name, false, {}, BenchmarkKind::GA};
  if (name == "ga_lss") return {name, false, {}, BenchmarkKind::GA_LSS};
  if (name == "gb2") return {name, false, {}, BenchmarkKind::GB2};
  throw ValidationError("unknown method: " + name);
}

// Conditional medians with the rate-ratio factored out: the p-quantile of
// the law scales as 1/Lambda, so one root solve per distinct theta suffices.
class MedianCache {
 public:
  MedianCache(double shape_u, double shape_v, const QuadratureConfig& quad)
      : shape_u_(shape_u), shape_v_(shape_v), quad_(quad) {}

  double median(double capital_lambda, double theta) {
    const std::uint64_t key = std::bit_cast<std::uint64_t>(theta);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      const double unit = ratio_median({1.0, shape_u_, shape_v_, theta}, quad_);
      it = cache_.emplace(key, unit).first;
    }
    return it->second / capital_lambda;
  }

 private:
  double shape_u_, shape_v_;
  QuadratureConfig quad_;
  std::unordered_map<std::uint64_t, double> cache_;
};

double rmse_of_medians(const CoefficientVector& truth, const CoefficientVector& fitted,
                       const DesignMatrix& x, const QuadratureConfig& quad) {
  MedianCache true_cache(truth.shape_u, truth.shape_v, quad);
  MedianCache fit_cache(fitted.shape_u, fitted.shape_v, quad);
  double sum_sq = 0.0;
  const int n = x.n();
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd row = x.values.row(i).transpose();
    const Predictors pt = predictors(truth, row);
    const Predictors pf = predictors(fitted, row);
    const double m_true = true_cache.median(pt.capital_lambda, pt.theta);
    const double m_fit = fit_cache.median(pf.capital_lambda, pf.theta);
    const double diff = m_fit - m_true;
    sum_sq += diff * diff;
  }
  return std::sqrt(sum_sq / n);
}

std::pair<double, double> mean_sd(const std::vector<double>& xs) {
  if (xs.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = xs.size() > 1 ? std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0))
                                  : 0.0;
  return {mean, sd};
}

}  // namespace

CoefficientVector SimConfig::truth() const {
  CoefficientVector gamma;
  gamma.beta_u = beta_u;
  gamma.beta_v = beta_v;
  gamma.beta_theta = beta_theta;
  gamma.shape_u = shape_u;
  gamma.shape_v = shape_v;
  const bool modeled =
      beta_theta.size() > 1 && beta_theta.tail(beta_theta.size() - 1).cwiseAbs().maxCoeff() > 0.0;
  gamma.theta_mode = modeled ? ThetaMode::Modeled : ThetaMode::Constant;
  return gamma;
}

void SimConfig::validate() const {
  if (n < 1 || replications < 1) throw ValidationError("sim config: n and replications must be positive");
  if (beta_u.size() != beta_v.size() || beta_u.size() != beta_theta.size() ||
      beta_u.size() < 1) {
    throw ValidationError("sim config: coefficient blocks must share length");
  }
  if (!(shape_u > 1.0) || !(shape_v > 1.0)) {
    throw ValidationError("sim config: shapes must exceed 1");
  }
}

SimConfig study_preset(const std::string& study_id, double theta0, int n, int replications,
                       std::uint64_t seed) {
  SimConfig cfg;
  cfg.n = n;
  cfg.replications = replications;
  cfg.seed = seed;
  cfg.study_id = study_id;
  cfg.beta_u = Eigen::VectorXd(5);
  cfg.beta_v = Eigen::VectorXd(5);
  cfg.beta_theta = Eigen::VectorXd::Zero(5);
  cfg.beta_u << 0.0, 0.4, -0.4, 0.2, -0.2;
  if (study_id == "1") {
    cfg.beta_v << 0.0, -0.2, 0.2, -0.4, 0.4;
    cfg.shape_u = 2.0;
    cfg.shape_v = 6.0;
    cfg.beta_theta[0] = theta0;
  } else if (study_id == "2") {
    cfg.beta_v << 0.0, 0.2, -0.2, 0.4, -0.4;
    cfg.shape_u = 2.0;
    cfg.shape_v = 2.0;
    cfg.beta_theta[0] = theta0;
  } else if (study_id == "3a") {
    cfg.beta_v << 0.0, -0.2, 0.2, -0.4, 0.4;
    cfg.shape_u = 2.0;
    cfg.shape_v = 6.0;
    cfg.beta_theta << 0.0, 1.0, -1.0, 0.5, -0.5;
  } else if (study_id == "3b") {
    cfg.beta_v << 0.0, -0.2, 0.2, -0.4, 0.4;
    cfg.shape_u = 2.0;
    cfg.shape_v = 6.0;
    cfg.beta_theta[0] = theta0;
  } else {
    throw ValidationError("unknown study id: " + study_id);
  }
  return cfg;
}

DesignMatrix generate_covariates(int n, Rng& rng) {
  if (n < 1) throw ValidationError("generate_covariates: n must be positive");
  const Eigen::MatrixXd& L = latent_cholesky();
  Eigen::MatrixXd covs(n, 4);
  Eigen::Vector4d z;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 4; ++j) z[j] = rng.normal();
    const Eigen::Vector4d latent = L * z;
    covs(i, 0) = latent[0];
    covs(i, 1) = latent[1];
    covs(i, 2) = latent[2] > 0.0 ? 1.0 : 0.0;
    covs(i, 3) = latent[3] > 0.0 ? 1.0 : 0.0;
  }
  return DesignMatrix::with_intercept(covs);
}

Dataset generate_dataset(const SimConfig& cfg, Rng& rng) {
  cfg.validate();
  const CoefficientVector truth = cfg.truth();
  Dataset data;
  data.x = generate_covariates(cfg.n, rng);
  data.u.resize(cfg.n);
  data.v.resize(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    const Predictors pred = predictors(truth, data.x.values.row(i).transpose());
    const auto [u, v] = sample_pair({pred.lambda_u, cfg.shape_u},
                                    {pred.lambda_v, cfg.shape_v}, {pred.theta}, rng);
    data.u[i] = u;
    data.v[i] = v;
  }
  return data;
}

std::string benchmark_name(BenchmarkKind kind) {
  switch (kind) {
    case BenchmarkKind::LN: return "ln";
    case BenchmarkKind::LN_LSS: return "ln_lss";
    case BenchmarkKind::GA: return "ga";
    case BenchmarkKind::GA_LSS: return "ga_lss";
    case BenchmarkKind::GB2: return "gb2";
  }
  return "?";
}

double BenchmarkFit::predictive_loglik(const Dataset& test) const {
  return benchmark_loglik(kind, params, test.ratios(), test.x.values);
}

BenchmarkFit fit_benchmark(BenchmarkKind kind, const Dataset& data) {
  data.validate();
  const Eigen::MatrixXd& X = data.x.values;
  const Eigen::VectorXd r = data.ratios();
  const int p1 = static_cast<int>(X.cols());
  const Eigen::VectorXd y = r.array().log();

  switch (kind) {
    case BenchmarkKind::LN: {
      // Closed form: Gaussian MLE on log r.
      const Eigen::VectorXd beta = detail::ols(X, y);
      const Eigen::VectorXd resid = y - X * beta;
      const double sigma = std::sqrt(resid.squaredNorm() / static_cast<double>(r.size()));
      Eigen::VectorXd params(p1 + 1);
      params.head(p1) = beta;
      params[p1] = sigma;
      BenchmarkFit out;
      out.kind = kind;
      out.converged = true;
      out.parameter_count = p1 + 1;
      out.params = params;
      out.loglik = benchmark_loglik(kind, params, r, X);
      return out;
    }
    case BenchmarkKind::LN_LSS: {
      const Eigen::VectorXd beta = detail::ols(X, y);
      const Eigen::VectorXd resid = y - X * beta;
      const double sigma = std::sqrt(resid.squaredNorm() / static_cast<double>(r.size()));
      Eigen::VectorXd start = Eigen::VectorXd::Zero(2 * p1);
      start.head(p1) = beta;
      start[p1] = std::log(std::max(sigma, 1e-6));
      return fit_benchmark_bfgs(kind, start, r, X);
    }
    case BenchmarkKind::GA: {
      const Eigen::VectorXd alpha = detail::gamma_glm_mean_coefficients(X, r);
      const double dispersion = detail::gamma_glm_dispersion(X, r, alpha);
      Eigen::VectorXd start(p1 + 1);
      start.head(p1) = alpha;
      start[p1] = -std::log(std::clamp(dispersion, 1e-6, 1e6));
      return fit_benchmark_bfgs(kind, start, r, X);
    }
    case BenchmarkKind::GA_LSS: {
      const Eigen::VectorXd alpha = detail::gamma_glm_mean_coefficients(X, r);
      const double dispersion = detail::gamma_glm_dispersion(X, r, alpha);
      Eigen::VectorXd start = Eigen::VectorXd::Zero(2 * p1);
      start.head(p1) = alpha;
      start[p1] = 0.5 * std::log(std::clamp(dispersion, 1e-6, 1e6));
      return fit_benchmark_bfgs(kind, start, r, X);
    }
    case BenchmarkKind::GB2: {
      // log(Lambda) moves opposite to the log median.
      Eigen::VectorXd start(p1 + 2);
      start.head(p1) = -detail::ols(X, y);
      start[p1] = std::log(2.0);
      start[p1 + 1] = std::log(2.0);
      return fit_benchmark_bfgs(kind, start, r, X);
    }
  }
  throw ValidationError("fit_benchmark: unknown benchmark kind");
}

SimMetrics run_study(const SimConfig& cfg, const StudyOptions& opts) {
  cfg.validate();
  if (opts.methods.empty()) throw ValidationError("run_study: no methods requested");
  std::vector<MethodSpec> methods;
  for (const std::string& m : opts.methods) methods.push_back(parse_method(m));
  if (!methods.front().is_fcgam) {
    throw ValidationError("run_study: the first method must be an fcgam variant");
  }

  const int p = cfg.covariate_count();
  const int test_n = opts.test_size > 0 ? opts.test_size : cfg.n;
  const CoefficientVector truth = cfg.truth();

  // Tracked coefficients: the slope blocks of beta_u and beta_v.
  std::vector<std::string> coef_names;
  std::vector<int> est_index;  // index into the natural-scale estimate vector
  Eigen::VectorXd true_values(2 * p);
  {
    const std::vector<std::string> covs = {"x1", "x2", "x3", "x4"};
    for (int j = 1; j <= p; ++j) {
      coef_names.push_back("beta_u." + (j <= 4 ? covs[j - 1] : "x" + std::to_string(j)));
      est_index.push_back(j);
      true_values[j - 1] = cfg.beta_u[j];
    }
    for (int j = 1; j <= p; ++j) {
      coef_names.push_back("beta_v." + (j <= 4 ? covs[j - 1] : "x" + std::to_string(j)));
      est_index.push_back(p + 1 + j);
      true_values[p + j - 1] = cfg.beta_v[j];
    }
  }

  std::vector<ReplicationRecord> records(cfg.replications);

  const auto run_one = [&](int rep) {
    ReplicationRecord rec;
    rec.replication = rep;
    try {
      Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(rep));
      const Dataset train = generate_dataset(cfg, rng);
      SimConfig test_cfg = cfg;
      test_cfg.n = test_n;
      const Dataset test = generate_dataset(test_cfg, rng);

      FitResult primary;
      bool primary_set = false;
      for (const MethodSpec& method : methods) {
        if (method.is_fcgam) {
          FitOptions fopts;
          fopts.compute_information =
              opts.compute_coverage && method.name == methods.front().name;
          FitResult fres = fit(train, method.mode, std::nullopt, fopts);
          if (!fres.converged) {
            throw NonConvergenceError("fcgam fit did not converge (" + fres.status + ")");
          }
          rec.pred_loglik[method.name] = predictive_loglik(fres, test);
          if (!primary_set) {
            primary = std::move(fres);
            primary_set = true;
          }
        } else {
          const BenchmarkFit bres = fit_benchmark(method.kind, train);
          if (bres.converged) {
            rec.pred_loglik[method.name] = bres.predictive_loglik(test);
          }
        }
      }

      // Natural-scale estimates of the primary fit.
      {
        const CoefficientVector& g = primary.gamma_hat;
        const int theta_len = g.theta_mode == ThetaMode::Modeled ? p + 1 : 1;
        Eigen::VectorXd est(2 * (p + 1) + theta_len + 2);
        est.segment(0, p + 1) = g.beta_u;
        est.segment(p + 1, p + 1) = g.beta_v;
        est.segment(2 * (p + 1), theta_len) = g.beta_theta.head(theta_len);
        est[2 * (p + 1) + theta_len] = g.shape_u;
        est[2 * (p + 1) + theta_len + 1] = g.shape_v;
        rec.estimates = est;
      }

      if (opts.compute_coverage) {
        const std::uint64_t post_seed =
            cfg.seed ^ (0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(rep));
        const PosteriorSample sample =
            posterior_sample(primary, opts.posterior_draws, post_seed);
        std::vector<NamedTransform> transforms;
        for (int j = 1; j <= p; ++j) {
          const int col = j;
          transforms.push_back({coef_names[j - 1],
                                [col](const Eigen::VectorXd& d) { return d[col]; }});
        }
        for (int j = 1; j <= p; ++j) {
          const int col = p + 1 + j;
          transforms.push_back({coef_names[p + j - 1],
                                [col](const Eigen::VectorXd& d) { return d[col]; }});
        }
        const auto intervals = credible_intervals(sample, opts.level, transforms);
        rec.covered.resize(intervals.size());
        for (size_t i = 0; i < intervals.size(); ++i) {
          const double truth_i = true_values[static_cast<Eigen::Index>(i)];
          rec.covered[i] =
              (intervals[i].lower <= truth_i && truth_i <= intervals[i].upper) ? 1 : 0;
        }
      }

      if (opts.compute_rmse) {
        rec.rmse_median =
            rmse_of_medians(truth, primary.gamma_hat, test.x, opts.quantile_quad);
      }
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    records[rep] = std::move(rec);
  };

  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    for (int rep = 0; rep < cfg.replications; ++rep) run_one(rep);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (int rep = next.fetch_add(1); rep < cfg.replications; rep = next.fetch_add(1)) {
          run_one(rep);
        }
      });
    }
    for (auto& t : workers) t.join();
  }

  // Deterministic aggregation in replication order.
  SimMetrics metrics;
  metrics.coef_names = coef_names;
  metrics.true_values = true_values;
  metrics.requested = cfg.replications;
  metrics.records = records;

  std::vector<double> rmse_values;
  std::map<std::string, std::vector<double>> pll_values;
  Eigen::VectorXd est_sum = Eigen::VectorXd::Zero(2 * p);
  Eigen::MatrixXd est_rows(cfg.replications, 2 * p);
  Eigen::VectorXd cover_sum = Eigen::VectorXd::Zero(2 * p);
  int completed = 0;
  int covered_count = 0;

  for (const ReplicationRecord& rec : records) {
    if (!rec.ok) continue;
    for (int i = 0; i < 2 * p; ++i) {
      est_rows(completed, i) = rec.estimates[est_index[i]];
      est_sum[i] += rec.estimates[est_index[i]];
    }
    if (!rec.covered.empty()) {
      for (int i = 0; i < 2 * p; ++i) cover_sum[i] += rec.covered[i];
      ++covered_count;
    }
    if (!std::isnan(rec.rmse_median)) rmse_values.push_back(rec.rmse_median);
    for (const auto& [name, value] : rec.pred_loglik) pll_values[name].push_back(value);
    ++completed;
  }
  metrics.completed = completed;
  metrics.excluded = cfg.replications - completed;

  if (completed > 0) {
    const Eigen::VectorXd mean = est_sum / completed;
    metrics.bias = mean - true_values;
    metrics.est_sd.resize(2 * p);
    for (int i = 0; i < 2 * p; ++i) {
      double ss = 0.0;
      for (int rix = 0; rix < completed; ++rix) {
        const double d = est_rows(rix, i) - mean[i];
        ss += d * d;
      }
      metrics.est_sd[i] = completed > 1 ? std::sqrt(ss / (completed - 1)) : 0.0;
    }
  }
  if (covered_count > 0) {
    metrics.coverage = cover_sum / covered_count;
  }
  std::tie(metrics.rmse_median_mean, metrics.rmse_median_sd) = mean_sd(rmse_values);
  for (const auto& [name, values] : pll_values) {
    metrics.pred_loglik[name] = mean_sd(values);
  }
  return metrics;
}

}  // namespace fcgam
