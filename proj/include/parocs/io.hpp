#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "parocs/experiments.hpp"

namespace parocs {

using json = nlohmann::json;

/// 17-significant-digit decimal form; round-trips exactly.
std::string format_double(double v);

/// Write atomically: temp file in the same directory, then rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Field as CSV, one row per sample: i, j, x[, x2], t, value.
std::string field_to_csv(const Field& f);
/// Compact JSON form carrying the grid, the role and the raw values.
json field_to_json(const Field& f);
Field field_from_json(const json& j);

std::string iter_log_to_csv(const std::vector<IterRecord>& log);
std::string sweep_to_csv(const StabilityReport& rep);
std::string tikhonov_to_csv(const TikhonovPathReport& rep);

json check_report_to_json(const CheckReport& rep);
json fit_to_json(const FitResult& fit);
json stability_report_to_json(const StabilityReport& rep);
json tikhonov_report_to_json(const TikhonovPathReport& rep);

}  // namespace parocs
