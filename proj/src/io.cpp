#include "fcgam/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fcgam/errors.hpp"
#include "fcgam/version.hpp"

namespace fcgam {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    j.push_back(row);
  }
  return j;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (j.empty()) return {};
  Eigen::MatrixXd m(j.size(), j[0].size());
  for (size_t i = 0; i < j.size(); ++i) {
    for (size_t c = 0; c < j[i].size(); ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c].get<double>();
    }
  }
  return m;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open CSV file: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty CSV file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split_csv_line(line);
  if (table.header.empty()) throw ValidationError("CSV header missing: " + path);

  int row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != table.header.size()) {
      throw ValidationError(path + ": row " + std::to_string(row_number) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(table.header.size()));
    }
    std::vector<double> row(fields.size());
    for (size_t c = 0; c < fields.size(); ++c) {
      const std::string& cell = fields[c];
      if (cell.empty()) {
        throw ValidationError(path + ": missing value at row " + std::to_string(row_number) +
                              ", column '" + table.header[c] + "'");
      }
      double value = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw ValidationError(path + ": non-numeric value '" + cell + "' at row " +
                              std::to_string(row_number) + ", column '" + table.header[c] +
                              "'");
      }
      row[c] = value;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write CSV file: " + path);
  out.precision(17);
  for (size_t c = 0; c < header.size(); ++c) {
    out << header[c] << (c + 1 < header.size() ? "," : "\n");
  }
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      out << row[c] << (c + 1 < row.size() ? "," : "\n");
    }
  }
}

Dataset dataset_from_csv(const CsvTable& table) {
  int u_col = -1, v_col = -1;
  std::vector<int> x_cols;
  std::vector<std::string> x_names;
  for (size_t c = 0; c < table.header.size(); ++c) {
    const std::string& name = table.header[c];
    if (name == "u") {
      u_col = static_cast<int>(c);
    } else if (name == "v") {
      v_col = static_cast<int>(c);
    } else if (!name.empty() && name[0] == 'x') {
      x_cols.push_back(static_cast<int>(c));
      x_names.push_back(name);
    } else {
      throw ValidationError("unexpected CSV column '" + name + "' (want u, v, x1..xp)");
    }
  }
  if (u_col < 0 || v_col < 0) throw ValidationError("CSV must contain columns u and v");
  const int n = static_cast<int>(table.rows.size());
  if (n == 0) throw ValidationError("CSV contains no data rows");

  Dataset data;
  data.u.resize(n);
  data.v.resize(n);
  Eigen::MatrixXd covs(n, static_cast<Eigen::Index>(x_cols.size()));
  for (int i = 0; i < n; ++i) {
    data.u[i] = table.rows[i][u_col];
    data.v[i] = table.rows[i][v_col];
    for (size_t c = 0; c < x_cols.size(); ++c) {
      covs(i, static_cast<Eigen::Index>(c)) = table.rows[i][x_cols[c]];
    }
  }
  data.x = DesignMatrix::with_intercept(covs, x_names);
  data.validate();
  return data;
}

nlohmann::json fit_to_json(const FitResult& fit) {
  const CoefficientVector& g = fit.gamma_hat;
  nlohmann::json j;
  j["model"] = "fcgam";
  j["version"] = kVersion;
  j["theta_mode"] = theta_mode_name(g.theta_mode);
  j["n"] = fit.n_obs;
  j["p"] = g.covariate_count();
  j["covariates"] = fit.covariate_names;
  j["beta_u"] = vector_to_json(g.beta_u);
  j["beta_v"] = vector_to_json(g.beta_v);
  j["beta_theta"] = vector_to_json(g.beta_theta);
  j["shape_u"] = g.shape_u;
  j["shape_v"] = g.shape_v;
  j["loglik"] = fit.loglik;
  j["bic"] = fit.bic;
  j["free_parameter_count"] = g.free_parameter_count();
  j["free_parameter_names"] = fit.parameter_names;
  if (fit.neg_hessian_inv.size() > 0) {
    nlohmann::json se = nlohmann::json::array();
    for (Eigen::Index i = 0; i < fit.neg_hessian_inv.rows(); ++i) {
      se.push_back(std::sqrt(std::max(0.0, fit.neg_hessian_inv(i, i))));
    }
    j["standard_errors"] = se;
    j["neg_hessian_inv"] = matrix_to_json(fit.neg_hessian_inv);
  }
  j["convergence"] = {{"converged", fit.converged},
                      {"iterations", fit.iterations},
                      {"gradient_norm", fit.gradient_norm},
                      {"status", fit.status}};
  return j;
}

FitResult fit_from_json(const nlohmann::json& j) {
  if (!j.contains("model") || j["model"] != "fcgam") {
    throw ValidationError("fit JSON: not an fcgam fit document");
  }
  FitResult fit;
  CoefficientVector& g = fit.gamma_hat;
  g.theta_mode = theta_mode_from_name(j["theta_mode"].get<std::string>());
  g.beta_u = vector_from_json(j["beta_u"]);
  g.beta_v = vector_from_json(j["beta_v"]);
  g.beta_theta = vector_from_json(j["beta_theta"]);
  g.shape_u = j["shape_u"].get<double>();
  g.shape_v = j["shape_v"].get<double>();
  fit.n_obs = j["n"].get<int>();
  fit.loglik = j["loglik"].get<double>();
  fit.bic = j["bic"].get<double>();
  fit.covariate_names = j["covariates"].get<std::vector<std::string>>();
  fit.parameter_names = j["free_parameter_names"].get<std::vector<std::string>>();
  if (j.contains("neg_hessian_inv")) {
    fit.neg_hessian_inv = matrix_from_json(j["neg_hessian_inv"]);
  }
  const auto& conv = j["convergence"];
  fit.converged = conv["converged"].get<bool>();
  fit.iterations = conv["iterations"].get<int>();
  fit.gradient_norm = conv["gradient_norm"].get<double>();
  fit.status = conv.value("status", "");
  g.validate();
  return fit;
}

void write_intervals_csv(const std::string& path,
                         const std::vector<CredibleInterval>& intervals) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write CSV file: " + path);
  out.precision(17);
  out << "name,estimate,lower,upper,level\n";
  for (const CredibleInterval& ci : intervals) {
    out << ci.name << ',' << ci.estimate << ',' << ci.lower << ',' << ci.upper << ','
        << ci.level << '\n';
  }
}

std::string config_hash(const nlohmann::json& config) {
  const std::string dump = config.dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void write_manifest(const std::string& output_path, const std::string& command,
                    const nlohmann::json& config, std::uint64_t seed) {
  nlohmann::json manifest;
  manifest["command"] = command;
  manifest["config"] = config;
  manifest["config_hash"] = config_hash(config);
  manifest["seed"] = seed;
  manifest["version"] = kVersion;
  std::ofstream out(output_path + ".manifest.json");
  if (!out) throw ValidationError("cannot write manifest for: " + output_path);
  out << manifest.dump(2) << '\n';
}

void write_study_records_csv(const std::string& path, const std::string& study_id,
                             const SimMetrics& metrics) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write CSV file: " + path);
  out.precision(17);
  out << "study,replication,method,metric,value\n";
  const auto emit = [&](int rep, const std::string& method, const std::string& metric,
                        double value) {
    out << study_id << ',' << rep << ',' << method << ',' << metric << ',' << value << '\n';
  };
  const int p = static_cast<int>(metrics.coef_names.size()) / 2;
  for (const ReplicationRecord& rec : metrics.records) {
    if (!rec.ok) {
      out << study_id << ',' << rec.replication << ",none,failed,1\n";
      continue;
    }
    // Estimate layout: [beta_u (p+1); beta_v (p+1); theta block; shapes].
    for (size_t i = 0; i < metrics.coef_names.size() && rec.estimates.size() > 0; ++i) {
      const int idx = static_cast<int>(i) < p ? static_cast<int>(i) + 1
                                              : static_cast<int>(i) + 2;
      emit(rec.replication, "fcgam", "estimate." + metrics.coef_names[i],
           rec.estimates[idx]);
    }
    if (!rec.covered.empty()) {
      for (size_t i = 0; i < metrics.coef_names.size() && i < rec.covered.size(); ++i) {
        emit(rec.replication, "fcgam", "covered." + metrics.coef_names[i], rec.covered[i]);
      }
    }
    if (!std::isnan(rec.rmse_median)) {
      emit(rec.replication, "fcgam", "rmse_median", rec.rmse_median);
    }
    for (const auto& [method, value] : rec.pred_loglik) {
      emit(rec.replication, method, "pred_loglik", value);
    }
  }
}

nlohmann::json study_summary_json(const SimConfig& cfg, const StudyOptions& opts,
                                  const SimMetrics& metrics) {
  nlohmann::json j;
  j["study"] = cfg.study_id;
  j["n"] = cfg.n;
  j["replications"] = {{"requested", metrics.requested},
                       {"completed", metrics.completed},
                       {"excluded", metrics.excluded}};
  j["seed"] = cfg.seed;
  j["methods"] = opts.methods;
  nlohmann::json coef = nlohmann::json::array();
  for (size_t i = 0; i < metrics.coef_names.size(); ++i) {
    nlohmann::json entry;
    entry["name"] = metrics.coef_names[i];
    entry["truth"] = metrics.true_values[static_cast<Eigen::Index>(i)];
    if (metrics.bias.size()) entry["bias"] = metrics.bias[static_cast<Eigen::Index>(i)];
    if (metrics.est_sd.size()) entry["sd"] = metrics.est_sd[static_cast<Eigen::Index>(i)];
    if (metrics.coverage.size()) {
      entry["coverage"] = metrics.coverage[static_cast<Eigen::Index>(i)];
    }
    coef.push_back(entry);
  }
  j["coefficients"] = coef;
  if (!std::isnan(metrics.rmse_median_mean)) {
    j["rmse_median"] = {{"mean", metrics.rmse_median_mean}, {"sd", metrics.rmse_median_sd}};
  }
  nlohmann::json pll;
  for (const auto& [name, ms] : metrics.pred_loglik) {
    pll[name] = {{"mean", ms.first}, {"sd", ms.second}};
  }
  j["pred_loglik"] = pll;
  return j;
}

}  // namespace fcgam
