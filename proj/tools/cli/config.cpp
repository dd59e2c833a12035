#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "rfvqa/error.hpp"
#include "rfvqa/hash.hpp"
#include "rfvqa/rng.hpp"

namespace rfvqa::cli {

namespace {

std::string type_word(const ojson& j) { return j.type_name(); }

/// Strict reader over one JSON object; remembers which keys were consumed.
class Section {
 public:
  Section(const ojson& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("'" + display() + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    const ojson* v = take(key);
    if (v) out = convert<T>(*v, key_path(key));
  }

  template <typename T>
  void get_opt(const char* key, std::optional<T>& out) {
    const ojson* v = take(key);
    if (!v) return;
    if (v->is_null()) {
      out.reset();
    } else {
      out = convert<T>(*v, key_path(key));
    }
  }

  template <typename T>
  void get_list(const char* key, std::vector<T>& out) {
    const ojson* v = take(key);
    if (!v) return;
    if (!v->is_array()) throw ConfigError("'" + key_path(key) + "' must be an array");
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      out.push_back(convert<T>((*v)[i], key_path(key) + "[" + std::to_string(i) + "]"));
    }
  }

  const ojson* raw(const char* key) { return take(key); }

  Section sub(const char* key) {
    const ojson* v = take(key);
    static const ojson empty = ojson::object();
    return Section(v ? *v : empty, key_path(key));
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError("unknown config key '" + key_path(k) + "'");
    }
  }

 private:
  std::string display() const { return path_.empty() ? "<root>" : path_; }

  const ojson* take(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  static T convert(const ojson& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("'" + path + "' must be a boolean, got " + type_word(v));
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("'" + path + "' must be an integer, got " + type_word(v));
      if constexpr (std::is_unsigned_v<T>) {
        if (!v.is_number_unsigned()) throw ConfigError("'" + path + "' must be non-negative");
      }
      return v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("'" + path + "' must be a number, got " + type_word(v));
      return v.get<T>();
    } else {
      if (!v.is_string()) throw ConfigError("'" + path + "' must be a string, got " + type_word(v));
      return v.get<std::string>();
    }
  }

  const ojson& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
auto as_config(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("'" + key + "': " + e.what());
  }
}

constexpr std::uint64_t kOovStream = 0x4F4F56ULL;

}  // namespace

ojson config_to_json(const RunConfig& c) {
  const auto& p = c.pipeline;
  const auto& d = c.dataset;
  const auto& inf = c.inference;
  ojson j;
  j["synthesis"] = {
      {"num_samples", p.synthesis.num_samples},
      {"sample_rate", p.synthesis.sample_rate},
      {"samples_per_symbol", p.synthesis.samples_per_symbol},
      {"carrier_offset", p.synthesis.carrier_offset},
      {"excess_bandwidth", p.synthesis.excess_bandwidth},
      {"ofdm_fft_size", p.synthesis.ofdm_fft_size ? ojson(*p.synthesis.ofdm_fft_size) : ojson(nullptr)},
  };
  j["segmentation"] = {
      {"eps", p.hysteresis_eps ? ojson(*p.hysteresis_eps) : ojson(nullptr)},
      {"p_min", p.p_min},
      {"p_max", p.p_max},
  };
  j["stft"] = {{"K", p.stft.fft_size}, {"H", p.stft.hop}};
  j["render"] = {
      {"iq_width", p.iq_panel.width},
      {"iq_height", p.iq_panel.height},
      {"lo_pct", p.lo_pct},
      {"hi_pct", p.hi_pct},
  };
  ojson modes = ojson::array();
  for (auto m : d.modes) modes.push_back(mode_name(m));
  ojson grid = ojson::array();
  for (const auto& s : d.snr_grid) grid.push_back(s ? ojson(*s) : ojson("noiseless"));
  j["dataset"] = {
      {"classes", d.classes},
      {"modes", modes},
      {"n_way", d.n_way},
      {"shots", d.shots},
      {"records", d.records_per_mode},
      {"train_records", d.train_records_per_mode},
      {"seeds_per_class", d.seeds_per_class},
      {"snr_grid", grid},
      {"oov_excluded", std::vector<std::string>(d.oov_excluded.begin(), d.oov_excluded.end())},
      {"oov_count", c.oov_count},
      {"template", template_name(d.prompt)},
  };
  j["inference"] = {
      {"endpoint", inf.endpoint},
      {"token_env", inf.token_env},
      {"model", inf.model},
      {"concurrency", inf.concurrency},
      {"timeout_s", inf.timeout_s},
      {"max_attempts", inf.retry.max_attempts},
      {"backoff_base_ms", inf.retry.backoff_base_ms},
      {"backoff_max_ms", inf.retry.backoff_max_ms},
      {"temperature", inf.temperature},
      {"max_tokens", inf.max_tokens},
  };
  j["output_dir"] = c.output_dir.string();
  j["master_seed"] = c.master_seed;
  j["workers"] = c.workers;
  return j;
}

RunConfig config_from_json(const ojson& doc) {
  RunConfig c;
  Section root(doc, "");
  {
    auto s = root.sub("synthesis");
    auto& syn = c.pipeline.synthesis;
    s.get("num_samples", syn.num_samples);
    s.get("sample_rate", syn.sample_rate);
    s.get("samples_per_symbol", syn.samples_per_symbol);
    s.get("carrier_offset", syn.carrier_offset);
    s.get("excess_bandwidth", syn.excess_bandwidth);
    s.get_opt("ofdm_fft_size", syn.ofdm_fft_size);
    s.finish();
  }
  {
    auto s = root.sub("segmentation");
    s.get_opt("eps", c.pipeline.hysteresis_eps);
    s.get("p_min", c.pipeline.p_min);
    s.get("p_max", c.pipeline.p_max);
    s.finish();
  }
  {
    auto s = root.sub("stft");
    s.get("K", c.pipeline.stft.fft_size);
    s.get("H", c.pipeline.stft.hop);
    s.finish();
  }
  {
    auto s = root.sub("render");
    s.get("iq_width", c.pipeline.iq_panel.width);
    s.get("iq_height", c.pipeline.iq_panel.height);
    s.get("lo_pct", c.pipeline.lo_pct);
    s.get("hi_pct", c.pipeline.hi_pct);
    s.finish();
  }
  {
    auto s = root.sub("dataset");
    auto& d = c.dataset;
    std::vector<std::string> classes;
    s.get_list("classes", classes);
    d.classes.clear();
    for (const auto& n : classes) {
      d.classes.push_back(as_config(s.key_path("classes"), [&] { return parse_class(n).canonical_name; }));
    }
    std::vector<std::string> modes;
    s.get_list("modes", modes);
    if (s.raw("modes") || !modes.empty()) {
      d.modes.clear();
      for (const auto& m : modes) d.modes.push_back(as_config(s.key_path("modes"), [&] { return parse_mode(m); }));
    }
    s.get("n_way", d.n_way);
    s.get("shots", d.shots);
    s.get("records", d.records_per_mode);
    s.get("train_records", d.train_records_per_mode);
    s.get("seeds_per_class", d.seeds_per_class);
    if (const ojson* g = s.raw("snr_grid")) {
      if (!g->is_array()) throw ConfigError("'dataset.snr_grid' must be an array");
      d.snr_grid.clear();
      for (std::size_t i = 0; i < g->size(); ++i) {
        const auto& v = (*g)[i];
        const std::string key = "dataset.snr_grid[" + std::to_string(i) + "]";
        if (v.is_number()) {
          d.snr_grid.push_back(v.get<double>());
        } else if (v.is_string()) {
          d.snr_grid.push_back(as_config(key, [&] { return parse_snr_label(v.get<std::string>()); }));
        } else {
          throw ConfigError("'" + key + "' must be a number or \"noiseless\"");
        }
      }
    }
    std::vector<std::string> oov;
    s.get_list("oov_excluded", oov);
    d.oov_excluded.clear();
    for (const auto& n : oov) {
      d.oov_excluded.insert(as_config(s.key_path("oov_excluded"), [&] { return parse_class(n).canonical_name; }));
    }
    s.get("oov_count", c.oov_count);
    std::string tmpl(template_name(d.prompt));
    s.get("template", tmpl);
    d.prompt = as_config(s.key_path("template"), [&] { return parse_template(tmpl); });
    s.finish();
  }
  {
    auto s = root.sub("inference");
    auto& inf = c.inference;
    s.get("endpoint", inf.endpoint);
    s.get("token_env", inf.token_env);
    s.get("model", inf.model);
    s.get("concurrency", inf.concurrency);
    s.get("timeout_s", inf.timeout_s);
    s.get("max_attempts", inf.retry.max_attempts);
    s.get("backoff_base_ms", inf.retry.backoff_base_ms);
    s.get("backoff_max_ms", inf.retry.backoff_max_ms);
    s.get("temperature", inf.temperature);
    s.get("max_tokens", inf.max_tokens);
    s.finish();
  }
  std::string out = c.output_dir.string();
  root.get("output_dir", out);
  c.output_dir = out;
  root.get("master_seed", c.master_seed);
  root.get("workers", c.workers);
  root.finish();

  c.dataset.master_seed = c.master_seed;
  if (c.oov_count > 0) {
    if (c.dataset.oov_excluded.empty()) {
      std::vector<std::string> names;
      for (const auto& cls : as_config("dataset.classes", [&] { return c.dataset.label_space(); })) {
        names.push_back(cls.canonical_name);
      }
      if (c.oov_count >= names.size()) throw ConfigError("'dataset.oov_count' must be below the number of classes");
      Rng rng(derive_seed(c.master_seed, kOovStream));
      rng.shuffle(std::span(names));
      c.dataset.oov_excluded.insert(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(c.oov_count));
    } else if (c.dataset.oov_excluded.size() != c.oov_count) {
      throw ConfigError("'dataset.oov_count' disagrees with the size of 'dataset.oov_excluded'");
    }
  }
  as_config("synthesis/segmentation/stft/render", [&] {
    c.pipeline.validate();
    return 0;
  });
  as_config("dataset", [&] {
    c.dataset.validate();
    return 0;
  });
  return c;
}

namespace {

void merge_into(ojson& base, const ojson& patch, const std::string& path) {
  if (!patch.is_object()) throw ConfigError("'" + (path.empty() ? std::string("<root>") : path) + "' must be an object");
  for (const auto& [k, v] : patch.items()) {
    const std::string key = path.empty() ? k : path + "." + k;
    auto it = base.find(k);
    if (it == base.end()) throw ConfigError("unknown config key '" + key + "'");
    if (it->is_object()) {
      merge_into(*it, v, key);
    } else {
      *it = v;
    }
  }
}

void apply_set(ojson& doc, const std::string& entry) {
  const auto eq = entry.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + entry + "'");
  const std::string key = entry.substr(0, eq);
  const std::string text = entry.substr(eq + 1);
  ojson* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) throw ConfigError("unknown config key '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) throw ConfigError("'" + key + "' is a section; set one of its keys");
  ojson value;
  try {
    value = ojson::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    value = text;
  }
  *node = value;
}

}  // namespace

RunConfig resolve_config(const Overrides& o) {
  ojson doc = config_to_json(RunConfig{});
  if (o.file) {
    std::ifstream is(*o.file);
    if (!is) throw MissingArtifact(o.file->string());
    ojson file;
    try {
      file = ojson::parse(is, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(o.file->string() + ": " + e.what());
    }
    merge_into(doc, file, "");
  }
  for (const auto& s : o.sets) apply_set(doc, s);
  if (o.seed) doc["master_seed"] = *o.seed;
  if (o.output_dir) doc["output_dir"] = o.output_dir->string();
  if (o.workers) doc["workers"] = *o.workers;
  return config_from_json(doc);
}

std::string config_hash(const RunConfig& cfg) {
  ojson j = config_to_json(cfg);
  // Where and how fast a run happens does not change what it produces.
  j.erase("output_dir");
  j.erase("workers");
  return sha256_hex(j.dump());
}

}  // namespace rfvqa::cli
