#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "jointcheck/dataset.hpp"
#include "jointcheck/ecdf.hpp"

namespace jointcheck {

inline constexpr const char* kArtifactVersion = "0.1.0";

// FNV-1a over the canonical (sorted-key) dump of a config; identifies a run.
std::string config_hash(const nlohmann::json& config);

// Shortest round-trip decimal formatting, stable across runs.
std::string format_double(double x);

// CSV with one comment header line carrying the config hash and version.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows,
               const std::string& hash);

void write_ecdf_csv(const std::filesystem::path& path, const EmpiricalCDF& cdf,
                    const std::string& hash);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

// Datasets serialize to CSV: a single "value" column for scalar samples, or
// y followed by x1..xd columns for regression data.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& path);

// Strict-schema helper: rejects keys outside `allowed` (spec'd configs fail
// fast on typos).
void reject_unknown_keys(const nlohmann::json& object,
                         const std::vector<std::string>& allowed,
                         const std::string& context);

}  // namespace jointcheck
