#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rfvqa/inference.hpp"
#include "rfvqa/pipeline.hpp"
#include "rfvqa/vqa.hpp"

namespace rfvqa::cli {

using ojson = nlohmann::ordered_json;

/// Everything one experiment folder is derived from.
struct RunConfig {
  PipelineConfig pipeline;
  DatasetSpec dataset;
  /// When > 0 and dataset.oov_excluded is empty, that many classes are
  /// withheld from train, drawn from the master seed.
  std::size_t oov_count = 0;
  InferenceConfig inference;
  std::filesystem::path output_dir = "rfvqa-out";
  std::uint64_t master_seed = 0;
  unsigned workers = 0;  // 0 = hardware concurrency
};

/// Dump with every key, in documented order; the inverse of config_from_json.
ojson config_to_json(const RunConfig& cfg);

/// Strict conversion: unknown keys and type errors throw ConfigError naming
/// the key path (e.g. "dataset.n_way").
RunConfig config_from_json(const ojson& doc);

struct Overrides {
  std::optional<std::filesystem::path> file;
  std::vector<std::string> sets;  // "section.key=value"; value parsed as JSON, else taken as a string
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  std::optional<unsigned> workers;
};

/// Precedence, lowest first: built-in defaults, config file, --set entries
/// in order, dedicated flags (--seed, --output-dir, --workers).
RunConfig resolve_config(const Overrides& overrides);

/// SHA-256 of the canonical resolved dump.
std::string config_hash(const RunConfig& cfg);

}  // namespace rfvqa::cli
