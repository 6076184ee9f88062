#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/config.hpp"

namespace speclab {

struct ArtifactEntry {
  std::string path;      // relative to the run's output directory
  std::string checksum;  // fnv1a64 of the file content
};

struct RunReport {
  std::string preset;
  std::uint64_t seed = 0;
  nlohmann::json resolved_config;
  std::map<std::string, double> metrics;
  std::vector<ArtifactEntry> artifacts;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string failure_stage;
};

const std::vector<std::string>& preset_names();

/// Fully resolved configuration of a named preset at the given seed.
RunConfig preset_config(const std::string& id, std::uint64_t seed);

/// Executes the preset end to end, emitting artifacts under out_dir and
/// report.json alongside them. Module errors mark the report failed (with the
/// failing stage named) instead of throwing; partial artifacts are retained
/// next to a FAILED marker.
RunReport run_experiment(const RunConfig& config, const std::filesystem::path& out_dir,
                         bool emit_svg = false);

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);
void emit_report(const RunReport& report, const std::filesystem::path& out_dir);

/// Spearman rank correlation with average ranks on ties. NaN entries rank
/// behind every finite value ("never converged" sorts last).
double spearman_rank_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace speclab
