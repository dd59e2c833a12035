#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rfvqa/modem.hpp"
#include "rfvqa/pipeline.hpp"
#include "rfvqa/render.hpp"
#include "rfvqa/vqa.hpp"

namespace rfvqa {

/// Maps a model answer onto a candidate; nullopt means Invalid.
///
/// Classification: lowercase, trim, strip surrounding quotes and punctuation,
/// then require an exact candidate match. Rationale: the candidate whose name
/// occurs last in the text wins; a match must not be embedded in a longer
/// token (letters, digits and '-' are token characters), so "16psk" never
/// matches inside "16pskx" and "8psk" not inside "128psk".
std::optional<std::string> parse_prediction(std::string_view raw_text, std::span<const std::string> candidates,
                                            bool rationale_mode);

enum class ResponseStatus { Ok, Failed };

/// Failed = the endpoint never produced a usable body. Invalid = a body whose
/// text did not name a candidate (status Ok, prediction empty).
struct ResponseRecord {
  std::string id;
  std::string raw_text;
  std::optional<std::string> prediction;
  ResponseStatus status = ResponseStatus::Ok;
  double latency_ms = 0.0;
  int attempts = 0;
  std::string error;  // cause for Failed

  bool operator==(const ResponseRecord&) const = default;
};

std::string response_to_json_line(const ResponseRecord& r);
ResponseRecord response_from_json_line(std::string_view text, std::size_t line = 0);
std::vector<ResponseRecord> read_responses(const std::filesystem::path& path);
void write_responses(std::span<const ResponseRecord> responses, const std::filesystem::path& path);

struct Tally {
  std::size_t correct = 0;
  std::size_t total = 0;

  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
  void add(bool ok) {
    ++total;
    correct += ok ? 1 : 0;
  }
  bool operator==(const Tally&) const = default;
};

using SnrKey = std::optional<double>;

struct EvalReport {
  std::string model;
  std::string system_prompt_sha256;
  Tally overall;
  std::size_t invalid = 0;  // answered, but no candidate named
  std::size_t failed = 0;   // transport failure after retries
  std::size_t missing = 0;  // dataset records without a response
  std::map<std::string, Tally> per_class;
  std::map<Family, Tally> per_family;
  std::map<ImageMode, Tally> by_mode;
  std::map<std::pair<ImageMode, SnrKey>, Tally> by_snr;
  std::map<std::pair<ImageMode, int>, Tally> by_nway;
  std::map<std::pair<ImageMode, bool>, Tally> by_oov;
  /// (gold family, predicted family); nullopt prediction = Invalid or Failed.
  std::map<std::pair<Family, std::optional<Family>>, std::size_t> family_confusion;

  double invalid_rate() const;
  double failed_rate() const;
  bool operator==(const EvalReport&) const = default;
};

/// Verdicts re-parse raw_text against each record's candidates and template.
/// Missing, Invalid and Failed all count as incorrect and are also counted
/// separately. Throws on duplicate or unknown response ids.
EvalReport score(std::span<const VqaRecord> dataset, std::span<const ResponseRecord> responses,
                 std::string model = "");

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(std::string_view text);
/// Aligned text: overall, rates, per-mode, per-family, per-class, confusion.
std::string report_to_text(const EvalReport& report);

enum class SweepFacet { Snr, NWay, Oov };
std::string_view facet_name(SweepFacet facet);
SweepFacet parse_facet(std::string_view name);

struct SweepRow {
  std::string facet_value;
  ImageMode mode = ImageMode::Spec;
  Tally tally;
  bool operator==(const SweepRow&) const = default;
};

struct SweepTable {
  SweepFacet facet = SweepFacet::Snr;
  std::string model;
  std::vector<SweepRow> rows;

  /// Header: <facet>,mode,correct,total,accuracy
  std::string to_csv() const;
  std::string to_text() const;
};

/// One row per (facet value, mode), for separately scored runs such as OOV
/// exclusion counts. Reports must share their mode set and model.
SweepTable sweep_from_reports(SweepFacet facet, std::span<const std::pair<std::string, EvalReport>> reports);
/// Facet breakdown already present in one report (snr_db, n_way, or the oov flag).
SweepTable sweep_within_report(SweepFacet facet, const EvalReport& report);

struct BaselineResult {
  Tally overall;
  std::map<Family, Tally> per_family;
  std::map<std::string, Tally> per_class;
};

/// Rows of `manifest` belonging to `split`.
SplitManifest filter_split(const SplitManifest& manifest, Split split);

/// Nearest-centroid classifier on normalized dB spectrograms. Matrices are
/// re-synthesized from each row's (class, seed, snr); rows are de-duplicated
/// across image modes. Only ImageMode::Spec is supported.
BaselineResult nearest_centroid_baseline(const SplitManifest& train, const SplitManifest& eval,
                                         const PipelineConfig& pipeline, ImageMode mode = ImageMode::Spec);

}  // namespace rfvqa
