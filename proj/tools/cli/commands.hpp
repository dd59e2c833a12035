#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "rfvqa/eval.hpp"

namespace rfvqa::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Fixed layout of an experiment folder.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path resolved_config() const { return root / "config.resolved.json"; }
  std::filesystem::path manifest() const { return root / "manifest.csv"; }
  std::filesystem::path checksums() const { return root / "assets.sha256"; }
  std::filesystem::path episodes() const { return root / "episodes.jsonl"; }
  std::filesystem::path responses() const { return root / "responses.jsonl"; }
  std::filesystem::path reports() const { return root / "reports"; }
  std::filesystem::path summary(const std::string& command) const { return root / "summaries" / (command + ".json"); }
};

struct RunSummary {
  std::string command;
  std::size_t assets = 0;
  std::size_t episodes = 0;
  std::size_t responses = 0;
  double wall_time_s = 0.0;
  std::string config_hash;
  std::string tool_version = kToolVersion;
  bool up_to_date = false;
};

/// TSV: name, family, order ("-" when the class has no alphabet size).
void cmd_classes(std::ostream& out);

/// Assets, manifest.csv and assets.sha256. A second run with the same
/// configuration verifies every checksum and regenerates nothing.
RunSummary cmd_gen(const RunConfig& cfg, std::ostream& log);
RunSummary cmd_build(const RunConfig& cfg, std::ostream& log);
RunSummary cmd_infer(const RunConfig& cfg, bool resume, std::ostream& log);
RunSummary cmd_score(const RunConfig& cfg, std::ostream& out);

/// With no `reports`, sweeps the facet inside reports/report.json;
/// otherwise one row per (label, report file) pair and mode.
RunSummary cmd_sweep(const RunConfig& cfg, SweepFacet facet,
                     const std::vector<std::pair<std::string, std::filesystem::path>>& reports, std::ostream& out);

/// Nearest-centroid accuracy on the train/eval pools of manifest.csv.
RunSummary cmd_baseline(const RunConfig& cfg, std::ostream& out);

/// "label=path" as accepted by `sweep --report`.
std::pair<std::string, std::filesystem::path> parse_report_arg(const std::string& text);

/// Gen-relevant digest stored in summaries/gen.json for the up-to-date check.
std::string assets_digest(const RunConfig& cfg);

}  // namespace rfvqa::cli
