#pragma once

#include <string>
#include <vector>

#include "fcgam/inference.hpp"
#include "fcgam/model.hpp"
#include "fcgam/simlab.hpp"
#include "json.hpp"

namespace fcgam {

/// Numeric table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Strict CSV reader: comma separated, '.' decimal point, header required,
/// every cell numeric. Empty or non-numeric cells raise ValidationError
/// naming the row and column.
CsvTable read_csv(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Builds a Dataset from columns u, v, x1..xp (in any order; extra columns
/// are rejected).
Dataset dataset_from_csv(const CsvTable& table);

/// Fit report serialization. Carries everything needed to predict, sample
/// the posterior or compute residuals from the file alone; doubles
/// round-trip exactly. Schema documented in the README.
nlohmann::json fit_to_json(const FitResult& fit);
FitResult fit_from_json(const nlohmann::json& j);

void write_intervals_csv(const std::string& path,
                         const std::vector<CredibleInterval>& intervals);

/// Every CLI run writes <output>.manifest.json recording the command, the
/// full configuration, its hash, the seed and the library version.
void write_manifest(const std::string& output_path, const std::string& command,
                    const nlohmann::json& config, std::uint64_t seed);

/// FNV-1a hash of a canonical JSON dump, as a hex string.
std::string config_hash(const nlohmann::json& config);

/// Tidy per-replication records: study, replication, method, metric, value.
void write_study_records_csv(const std::string& path, const std::string& study_id,
                             const SimMetrics& metrics);

/// Aggregate summary of a study run.
nlohmann::json study_summary_json(const SimConfig& cfg, const StudyOptions& opts,
                                  const SimMetrics& metrics);

}  // namespace fcgam
