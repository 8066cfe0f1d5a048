#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "lpeval/evaluate.hpp"

namespace lpeval {

inline constexpr const char* kToolName = "lpeval";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kReportSchema = "report_v1";

std::string format_percent(double ratio);  // "84.7"
std::string format_ratio(double ratio);    // "0.8472"
std::string utc_timestamp();

struct ReportMeta {
  std::string command;
  std::string created_utc;
  std::string config_digest;
  std::string manifest_digest;
  nlohmann::json options = nlohmann::json::object();
};

// All numeric fields keep full precision in the JSON report; the rendered
// tables show ratios to four decimals and aggregates as one-decimal
// percentages.
struct MetricReport {
  ReportMeta meta;
  const ClassMap* class_map = nullptr;
  std::optional<SemanticOutcome> semantic;
  std::optional<PanopticOutcome> panoptic;
  std::optional<TrackingOutcome> tracking;
};

nlohmann::json report_to_json(const MetricReport& report);
std::string render_report(const MetricReport& report);

/// Serializes the full report, then writes and renames in one step so a
/// partial report never lands at `path`.
void write_report(const std::filesystem::path& path, const MetricReport& report);

}  // namespace lpeval
