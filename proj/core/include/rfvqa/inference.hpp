#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>

#include "rfvqa/vqa.hpp"

namespace rfvqa {

struct RetryPolicy {
  int max_attempts = 4;
  double backoff_base_ms = 500.0;  // delay before attempt k+1 is base * 2^(k-1)
  double backoff_max_ms = 8000.0;
};

/// OpenAI-style chat completions client settings.
struct InferenceConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8000/v1/chat/completions
  std::string token_env = "RFVQA_API_KEY";
  std::string model;
  int concurrency = 4;
  double timeout_s = 60.0;
  RetryPolicy retry;
  double temperature = 0.0;
  int max_tokens = 256;

  void validate() const;
};

/// Request JSON for one record; images are inlined as base64 data URLs read
/// from `dataset_root`. Deterministic for a given dataset and config.
std::string build_request_body(const VqaRecord& record, const InferenceConfig& cfg,
                               const std::filesystem::path& dataset_root);

/// Extracts choices[0].message.content; throws ParseError on anything else.
std::string parse_completion_body(std::string_view body);

struct InferenceStats {
  std::size_t skipped = 0;    // already present (resume)
  std::size_t requested = 0;  // records sent this run
  std::size_t ok = 0;
  std::size_t failed = 0;
  std::size_t http_requests = 0;  // including retries
};

/// One response line per record appended to `responses_path`. With `resume`
/// ids already in the file are skipped; otherwise the file is replaced.
/// Transport errors, 429/5xx and malformed bodies are retried with
/// exponential backoff and finally recorded as Failed; 401/403 throws
/// AuthError. The dataset file is only read.
InferenceStats run_inference(const std::filesystem::path& dataset_jsonl, const std::filesystem::path& dataset_root,
                             const std::filesystem::path& responses_path, const InferenceConfig& cfg, bool resume);

}  // namespace rfvqa
