#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfvqa/modem.hpp"
#include "rfvqa/pipeline.hpp"
#include "rfvqa/render.hpp"

namespace rfvqa {

enum class Split { Train, Eval };
std::string_view split_name(Split split);
Split parse_split(std::string_view name);
inline Split opposite(Split s) { return s == Split::Train ? Split::Eval : Split::Train; }

enum class PromptTemplate { Classify, Explain };
std::string_view template_name(PromptTemplate t);
PromptTemplate parse_template(std::string_view name);

/// SNR label used in file names and CSV cells: "noiseless" or the shortest
/// round-trip decimal ("20", "12.5").
std::string snr_label(std::optional<double> snr_db);
std::optional<double> parse_snr_label(std::string_view text);

struct DatasetSpec {
  std::vector<std::string> classes;  // empty = full taxonomy
  std::vector<ImageMode> modes{ImageMode::Spec, ImageMode::IQ, ImageMode::Joint};
  int n_way = 10;
  int shots = 0;
  std::size_t records_per_mode = 1000;      // eval-split episodes per mode
  std::size_t train_records_per_mode = 0;   // train-split episodes per mode
  std::size_t seeds_per_class = 4;          // even seed index -> train, odd -> eval
  std::vector<std::optional<double>> snr_grid{std::nullopt};
  std::set<std::string> oov_excluded;
  PromptTemplate prompt = PromptTemplate::Classify;
  std::uint64_t master_seed = 0;

  /// Classes in taxonomy order.
  std::vector<ModulationClass> label_space() const;
  /// label_space() minus oov_excluded.
  std::vector<ModulationClass> train_label_space() const;
  void validate() const;
};

/// Asset seed for (class, seed index): derive_seed(derive_seed(master, class), index).
std::uint64_t asset_seed(std::uint64_t master_seed, std::string_view class_name, std::size_t seed_index);
inline Split split_for_seed_index(std::size_t seed_index) { return seed_index % 2 == 0 ? Split::Train : Split::Eval; }

/// {split}/{class}/{mode}_{seed}_{snr}.png, under "assets/".
std::string asset_relative_path(Split split, std::string_view cls, ImageMode mode, std::uint64_t seed,
                                std::optional<double> snr_db);

struct AssetRecord {
  std::string class_name;
  Family family = Family::Tone;
  ImageMode mode = ImageMode::Spec;
  std::optional<double> snr_db;
  std::uint64_t seed = 0;
  Split split = Split::Train;
  std::string path;  // relative to the dataset root

  bool operator==(const AssetRecord&) const = default;
};

struct SplitManifest {
  std::vector<AssetRecord> rows;

  std::vector<const AssetRecord*> pool(Split split, std::string_view cls, ImageMode mode,
                                       std::optional<double> snr_db) const;
};

/// Runs modem -> transform -> render for every (class, seed index, SNR) and
/// writes PNGs below `root`. Train-split assets of OOV classes are skipped.
/// `workers` = 0 uses the hardware concurrency. Output order and bytes do not
/// depend on the worker count.
SplitManifest generate_assets(const DatasetSpec& spec, const PipelineConfig& pipeline,
                              const std::filesystem::path& root, unsigned workers = 0);

/// CSV with header class,family,mode,snr_db,seed,split,path.
void write_manifest_csv(const SplitManifest& manifest, const std::filesystem::path& path);
SplitManifest read_manifest_csv(const std::filesystem::path& path);

struct ContentPart {
  enum class Kind { Text, Image };
  Kind kind = Kind::Text;
  std::string value;  // text, or an image path relative to the dataset root

  static ContentPart text(std::string t) { return {Kind::Text, std::move(t)}; }
  static ContentPart image(std::string path) { return {Kind::Image, std::move(path)}; }
  bool operator==(const ContentPart&) const = default;
};

struct ChatMessage {
  std::string role;  // "system" | "user"
  std::vector<ContentPart> content;
  bool operator==(const ChatMessage&) const = default;
};

struct ShotBlock {
  std::string class_name;
  std::vector<std::string> images;
  bool operator==(const ShotBlock&) const = default;
};

struct VqaRecord {
  std::string id;
  Split split = Split::Eval;
  ImageMode mode = ImageMode::Spec;
  int n_way = 0;
  int shots = 0;
  PromptTemplate prompt = PromptTemplate::Classify;
  std::vector<std::string> candidates;
  std::string gold;
  bool oov = false;  // gold was withheld from the train split
  std::optional<double> snr_db;
  std::uint64_t seed = 0;  // query asset seed
  std::string query_image;
  std::vector<ShotBlock> shot_images;  // candidate order
  std::vector<ChatMessage> messages;

  bool operator==(const VqaRecord&) const = default;
};

/// Episodes for the train split (train_records_per_mode) then the eval split
/// (records_per_mode), mode by mode.
///
/// Gold labels follow a shuffled round-robin over the split's label space.
/// The leftover partial cycle of each mode block continues a circular walk
/// over one fixed permutation, so per-class gold counts differ by at most one
/// both within a mode and across all modes of the split. Distractors are n-1
/// classes drawn without replacement from the rest of the label space; the
/// gold's position is shuffled in. Few-shot examples come from the opposite
/// split at the query's SNR.
std::vector<VqaRecord> build_episodes(const SplitManifest& manifest, const DatasetSpec& spec);

std::string_view system_prompt();
/// "['a', 'b', 'c']"
std::string format_candidate_list(std::span<const std::string> candidates);
/// Per-mode note inserted into the classification instruction.
std::string_view mode_note(ImageMode mode);

/// Chat transcript for the record's template (classification or rationale).
std::vector<ChatMessage> render_prompt(const VqaRecord& record);

/// Same candidates and gold, rationale instruction; scored by containment.
VqaRecord build_explanation_variant(const VqaRecord& record);

std::string record_to_json_line(const VqaRecord& record);
/// `line` is used in error messages.
VqaRecord record_from_json_line(std::string_view text, std::size_t line = 0);
void write_jsonl(std::span<const VqaRecord> records, const std::filesystem::path& path);
std::vector<VqaRecord> read_jsonl(const std::filesystem::path& path);

}  // namespace rfvqa
