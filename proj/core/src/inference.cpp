#include "rfvqa/inference.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "rfvqa/error.hpp"
#include "rfvqa/eval.hpp"

namespace rfvqa {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

void InferenceConfig::validate() const {
  if (endpoint.empty()) throw ConfigError("inference.endpoint is required");
  if (concurrency < 1) throw ConfigError("inference.concurrency must be >= 1");
  if (!(timeout_s > 0.0)) throw ConfigError("inference.timeout_s must be positive");
  if (retry.max_attempts < 1) throw ConfigError("inference.max_attempts must be >= 1");
  if (retry.backoff_base_ms < 0.0 || retry.backoff_max_ms < 0.0) throw ConfigError("inference backoff must be >= 0");
  if (max_tokens < 1) throw ConfigError("inference.max_tokens must be >= 1");
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw ConfigError("inference.endpoint is not an http(s) URL: " + url);
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

std::string read_binary(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw MissingArtifact(p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

std::string build_request_body(const VqaRecord& record, const InferenceConfig& cfg, const fs::path& dataset_root) {
  ojson msgs = ojson::array();
  for (const auto& m : record.messages) {
    ojson parts = ojson::array();
    for (const auto& p : m.content) {
      if (p.kind == ContentPart::Kind::Text) {
        parts.push_back({{"type", "text"}, {"text", p.value}});
      } else {
        const std::string url =
            "data:image/png;base64," + httplib::detail::base64_encode(read_binary(dataset_root / p.value));
        parts.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
      }
    }
    msgs.push_back({{"role", m.role}, {"content", parts}});
  }
  ojson body;
  body["model"] = cfg.model;
  body["messages"] = msgs;
  body["temperature"] = cfg.temperature;
  body["max_tokens"] = cfg.max_tokens;
  return body.dump();
}

std::string parse_completion_body(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    if (content.is_array()) {
      std::string out;
      for (const auto& part : content) {
        if (part.value("type", "") == "text") out += part.at("text").get<std::string>();
      }
      return out;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("malformed completion body: ") + e.what());
  }
  throw ParseError(0, "malformed completion body: content is neither text nor parts");
}

namespace {

/// Existing response ids. A trailing line without its newline (interrupted
/// write) is dropped from the file.
std::set<std::string> load_existing(const fs::path& path) {
  std::set<std::string> ids;
  if (!fs::exists(path)) return ids;
  std::string text = read_binary(path);
  const auto last_nl = text.rfind('\n');
  const std::size_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
  if (keep != text.size()) {
    text.resize(keep);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << text;
  }
  std::istringstream is(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (!line.empty()) ids.insert(response_from_json_line(line, n).id);
  }
  return ids;
}

struct Outcome {
  ResponseRecord rec;
  std::size_t http_requests = 0;
};

Outcome query_one(httplib::Client& client, const Endpoint& ep, const VqaRecord& record, const std::string& body,
                  const InferenceConfig& cfg) {
  Outcome out;
  out.rec.id = record.id;
  const auto t0 = std::chrono::steady_clock::now();
  std::string cause;
  for (int attempt = 1; attempt <= cfg.retry.max_attempts; ++attempt) {
    if (attempt > 1) {
      const double delay =
          std::min(cfg.retry.backoff_max_ms, cfg.retry.backoff_base_ms * std::pow(2.0, attempt - 2));
      std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay));
    }
    out.rec.attempts = attempt;
    ++out.http_requests;
    auto res = client.Post(ep.path, body, "application/json");
    if (!res) {
      cause = "transport: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status != 200) {
      cause = "HTTP " + std::to_string(res->status);
      if (res->status == 429 || res->status >= 500) continue;
      break;  // other 4xx will not improve on retry
    }
    try {
      out.rec.raw_text = parse_completion_body(res->body);
    } catch (const ParseError& e) {
      cause = e.what();
      continue;
    }
    out.rec.status = ResponseStatus::Ok;
    out.rec.prediction =
        parse_prediction(out.rec.raw_text, record.candidates, record.prompt == PromptTemplate::Explain);
    out.rec.error.clear();
    out.rec.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }
  out.rec.status = ResponseStatus::Failed;
  out.rec.error = cause;
  out.rec.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace

InferenceStats run_inference(const fs::path& dataset_jsonl, const fs::path& dataset_root, const fs::path& responses_path,
                             const InferenceConfig& cfg, bool resume) {
  cfg.validate();
  const Endpoint ep = split_endpoint(cfg.endpoint);
  const auto records = read_jsonl(dataset_jsonl);
  for (const auto& r : records) {
    for (const auto& m : r.messages) {
      for (const auto& p : m.content) {
        if (p.kind == ContentPart::Kind::Image && !fs::exists(dataset_root / p.value)) {
          throw MissingArtifact((dataset_root / p.value).string());
        }
      }
    }
  }

  InferenceStats stats;
  std::set<std::string> done;
  if (resume) {
    done = load_existing(responses_path);
  } else if (fs::exists(responses_path)) {
    fs::remove(responses_path);
  }
  std::vector<const VqaRecord*> todo;
  for (const auto& r : records) {
    if (done.count(r.id)) {
      ++stats.skipped;
    } else {
      todo.push_back(&r);
    }
  }
  if (todo.empty()) return stats;

  if (responses_path.has_parent_path()) fs::create_directories(responses_path.parent_path());
  std::ofstream out(responses_path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot open " + responses_path.string() + " for appending");

  const char* token = std::getenv(cfg.token_env.c_str());
  std::mutex mu;  // guards `out`, `stats` and `failure`
  std::exception_ptr failure;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};

  auto worker = [&] {
    httplib::Client client(ep.origin);
    const auto secs = static_cast<time_t>(cfg.timeout_s);
    const auto usecs = static_cast<time_t>((cfg.timeout_s - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    if (token && *token) client.set_bearer_token_auth(token);
    while (!abort) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      try {
        const std::string body = build_request_body(*todo[i], cfg, dataset_root);
        Outcome o = query_one(client, ep, *todo[i], body, cfg);
        std::lock_guard lock(mu);
        out << response_to_json_line(o.rec) << '\n';
        out.flush();
        ++stats.requested;
        stats.http_requests += o.http_requests;
        (o.rec.status == ResponseStatus::Ok ? stats.ok : stats.failed) += 1;
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        abort = true;
        return;
      }
    }
  };

  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(cfg.concurrency), todo.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  if (!out) throw IoError("write failed for " + responses_path.string());
  return stats;
}

}  // namespace rfvqa
