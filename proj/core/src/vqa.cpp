#include "rfvqa/vqa.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "rfvqa/error.hpp"
#include "rfvqa/rng.hpp"

namespace rfvqa {

namespace fs = std::filesystem;

std::string_view split_name(Split split) { return split == Split::Train ? "train" : "eval"; }

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "eval") return Split::Eval;
  throw InvalidArgument("unknown split '" + std::string(name) + "'");
}

std::string_view template_name(PromptTemplate t) { return t == PromptTemplate::Classify ? "classify" : "explain"; }

PromptTemplate parse_template(std::string_view name) {
  if (name == "classify") return PromptTemplate::Classify;
  if (name == "explain") return PromptTemplate::Explain;
  throw InvalidArgument("unknown prompt template '" + std::string(name) + "'");
}

std::string snr_label(std::optional<double> snr_db) {
  if (!snr_db) return "noiseless";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, *snr_db);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_snr_label(std::string_view text) {
  if (text == "noiseless") return std::nullopt;
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw InvalidArgument("invalid SNR value '" + std::string(text) + "'");
  }
  return v;
}

std::vector<ModulationClass> DatasetSpec::label_space() const {
  std::vector<ModulationClass> out;
  if (classes.empty()) return list_classes();
  std::vector<std::size_t> idx;
  for (const auto& c : classes) idx.push_back(class_index(c));
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  for (auto i : idx) out.push_back(list_classes()[i]);
  return out;
}

std::vector<ModulationClass> DatasetSpec::train_label_space() const {
  auto all = label_space();
  std::erase_if(all, [&](const ModulationClass& c) { return oov_excluded.count(c.canonical_name) != 0; });
  return all;
}

void DatasetSpec::validate() const {
  const auto labels = label_space();
  if (modes.empty()) throw InvalidArgument("dataset needs at least one image mode");
  if (n_way < 2) throw InvalidArgument("n_way must be >= 2");
  if (shots < 0) throw InvalidArgument("shots must be >= 0");
  if (seeds_per_class < 2) throw InvalidArgument("seeds_per_class must be >= 2 (one train and one eval seed)");
  if (snr_grid.empty()) throw InvalidArgument("snr_grid must not be empty");
  for (const auto& s : snr_grid) {
    if (s && !std::isfinite(*s)) throw InvalidArgument("SNR grid values must be finite");
  }
  for (const auto& c : oov_excluded) {
    bool found = std::any_of(labels.begin(), labels.end(), [&](const auto& l) { return l.canonical_name == c; });
    if (!found) throw InvalidArgument("OOV class '" + c + "' is not in the class set");
  }
  if (oov_excluded.size() >= labels.size()) throw InvalidArgument("OOV exclusion leaves no training classes");
  if (static_cast<std::size_t>(n_way) > labels.size()) {
    throw InvalidArgument("n_way " + std::to_string(n_way) + " exceeds the label space of " +
                          std::to_string(labels.size()) + " classes");
  }
  if (train_records_per_mode > 0 && static_cast<std::size_t>(n_way) > train_label_space().size()) {
    throw InvalidArgument("n_way " + std::to_string(n_way) + " exceeds the training label space of " +
                          std::to_string(train_label_space().size()) + " classes");
  }
}

std::uint64_t asset_seed(std::uint64_t master_seed, std::string_view class_name, std::size_t seed_index) {
  return derive_seed(derive_seed(master_seed, class_index(class_name)), seed_index);
}

std::string asset_relative_path(Split split, std::string_view cls, ImageMode mode, std::uint64_t seed,
                                std::optional<double> snr_db) {
  std::string out = "assets/";
  out += split_name(split);
  out += '/';
  out += cls;
  out += '/';
  out += mode_name(mode);
  out += '_' + std::to_string(seed) + '_' + snr_label(snr_db) + ".png";
  return out;
}

std::vector<const AssetRecord*> SplitManifest::pool(Split split, std::string_view cls, ImageMode mode,
                                                    std::optional<double> snr_db) const {
  std::vector<const AssetRecord*> out;
  for (const auto& r : rows) {
    if (r.split == split && r.mode == mode && r.snr_db == snr_db && r.class_name == cls) out.push_back(&r);
  }
  return out;
}

namespace {

struct AssetJob {
  const ModulationClass* cls;
  std::size_t seed_index;
  std::uint64_t seed;
  Split split;
};

std::vector<AssetRecord> run_asset_job(const AssetJob& job, const DatasetSpec& spec, const PipelineConfig& cfg,
                                       const fs::path& root) {
  std::vector<AssetRecord> rows;
  for (const auto& snr : spec.snr_grid) {
    try {
      const IqSignal signal = asset_signal(*job.cls, job.seed, snr, cfg);
      const AssetImages images = render_asset(signal, job.seed, spec.modes, cfg);
      for (ImageMode mode : spec.modes) {
        AssetRecord row{job.cls->canonical_name, job.cls->family, mode, snr, job.seed, job.split,
                        asset_relative_path(job.split, job.cls->canonical_name, mode, job.seed, snr)};
        write_png(images.get(mode).pixels, root / row.path);
        rows.push_back(std::move(row));
      }
    } catch (const Error& e) {
      throw Error(e.category(), "asset " + job.cls->canonical_name + " seed#" + std::to_string(job.seed_index) +
                                    " snr=" + snr_label(snr) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace

SplitManifest generate_assets(const DatasetSpec& spec, const PipelineConfig& pipeline, const fs::path& root,
                              unsigned workers) {
  spec.validate();
  pipeline.validate();
  const auto labels = spec.label_space();
  std::vector<ModulationClass> owned = labels;
  std::vector<AssetJob> jobs;
  for (const auto& cls : owned) {
    const bool excluded = spec.oov_excluded.count(cls.canonical_name) != 0;
    for (std::size_t i = 0; i < spec.seeds_per_class; ++i) {
      const Split split = split_for_seed_index(i);
      if (excluded && split == Split::Train) continue;
      jobs.push_back({&cls, i, asset_seed(spec.master_seed, cls.canonical_name, i), split});
    }
  }
  for (const auto& job : jobs) fs::create_directories(root / "assets" / split_name(job.split) / job.cls->canonical_name);

  std::vector<std::vector<AssetRecord>> results(jobs.size());
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(jobs.size(), 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        results[i] = run_asset_job(jobs[i], spec, pipeline, root);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs.size());
        return;
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  SplitManifest manifest;
  for (auto& r : results) {
    for (auto& row : r) manifest.rows.push_back(std::move(row));
  }
  return manifest;
}

void write_manifest_csv(const SplitManifest& manifest, const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "class,family,mode,snr_db,seed,split,path\n";
  for (const auto& r : manifest.rows) {
    os << r.class_name << ',' << family_name(r.family) << ',' << mode_name(r.mode) << ',' << snr_label(r.snr_db)
       << ',' << r.seed << ',' << split_name(r.split) << ',' << r.path << '\n';
  }
  if (!os) throw IoError("write failed for " + path.string());
}

SplitManifest read_manifest_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw MissingArtifact(path.string());
  std::string line;
  std::getline(is, line);
  if (line != "class,family,mode,snr_db,seed,split,path") throw ParseError(1, "unexpected manifest header");
  SplitManifest m;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw ParseError(lineno, "expected 7 manifest columns, found " + std::to_string(f.size()));
    try {
      AssetRecord r;
      r.class_name = parse_class(f[0]).canonical_name;
      r.family = parse_family(f[1]);
      r.mode = parse_mode(f[2]);
      r.snr_db = parse_snr_label(f[3]);
      auto res = std::from_chars(f[4].data(), f[4].data() + f[4].size(), r.seed);
      if (res.ec != std::errc() || res.ptr != f[4].data() + f[4].size()) throw InvalidArgument("invalid seed");
      r.split = parse_split(f[5]);
      r.path = f[6];
      m.rows.push_back(std::move(r));
    } catch (const InvalidArgument& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Episodes

namespace {

std::vector<std::string> names_of(const std::vector<ModulationClass>& classes) {
  std::vector<std::string> out;
  out.reserve(classes.size());
  for (const auto& c : classes) out.push_back(c.canonical_name);
  return out;
}

// Gold sequence for one mode block; `cursor` walks `ring` across blocks.
std::vector<std::string> gold_sequence(const std::vector<std::string>& labels, const std::vector<std::string>& ring,
                                       std::size_t& cursor, std::size_t count, Rng& rng) {
  std::vector<std::string> seq;
  seq.reserve(count);
  const std::size_t cycles = count / labels.size();
  const std::size_t rest = count % labels.size();
  for (std::size_t c = 0; c < cycles; ++c) {
    std::vector<std::string> cycle = labels;
    rng.shuffle(std::span(cycle));
    seq.insert(seq.end(), cycle.begin(), cycle.end());
  }
  std::vector<std::string> partial;
  for (std::size_t i = 0; i < rest; ++i) partial.push_back(ring[(cursor + i) % ring.size()]);
  cursor = (cursor + rest) % ring.size();
  rng.shuffle(std::span(partial));
  seq.insert(seq.end(), partial.begin(), partial.end());
  return seq;
}

std::vector<std::string> sample_without_replacement(std::vector<std::string> pool, std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

std::string record_id(Split split, ImageMode mode, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", index);
  return std::string(split_name(split)) + "-" + std::string(mode_name(mode)) + "-" + buf;
}

}  // namespace

std::vector<VqaRecord> build_episodes(const SplitManifest& manifest, const DatasetSpec& spec) {
  spec.validate();
  if (spec.shots > 0 && manifest.rows.empty()) throw InvalidArgument("few-shot build with an empty manifest");

  // Pool index: (split, class, mode, snr) -> asset rows, in manifest order.
  using PoolKey = std::tuple<Split, std::string, ImageMode, std::optional<double>>;
  std::map<PoolKey, std::vector<const AssetRecord*>> pools;
  for (const auto& r : manifest.rows) pools[{r.split, r.class_name, r.mode, r.snr_db}].push_back(&r);
  auto pool_for = [&](Split s, const std::string& c, ImageMode m, std::optional<double> snr)
      -> const std::vector<const AssetRecord*>& {
    static const std::vector<const AssetRecord*> empty;
    auto it = pools.find({s, c, m, snr});
    return it == pools.end() ? empty : it->second;
  };

  Rng rng(derive_seed(spec.master_seed, 0x45504953ULL));
  std::vector<VqaRecord> out;
  const std::size_t n = static_cast<std::size_t>(spec.n_way);
  for (Split split : {Split::Train, Split::Eval}) {
    const std::size_t per_mode = split == Split::Train ? spec.train_records_per_mode : spec.records_per_mode;
    if (per_mode == 0) continue;
    const auto labels = names_of(split == Split::Train ? spec.train_label_space() : spec.label_space());
    if (n > labels.size()) throw InvalidArgument("n_way exceeds the label space of the " + std::string(split_name(split)) + " split");
    std::vector<std::string> ring = labels;
    rng.shuffle(std::span(ring));
    std::size_t cursor = 0;
    for (ImageMode mode : spec.modes) {
      const auto golds = gold_sequence(labels, ring, cursor, per_mode, rng);
      for (std::size_t i = 0; i < per_mode; ++i) {
        VqaRecord rec;
        rec.id = record_id(split, mode, i);
        rec.split = split;
        rec.mode = mode;
        rec.n_way = spec.n_way;
        rec.shots = spec.shots;
        rec.prompt = spec.prompt;
        rec.gold = golds[i];
        rec.oov = spec.oov_excluded.count(rec.gold) != 0;
        rec.snr_db = spec.snr_grid[i % spec.snr_grid.size()];

        std::vector<std::string> others;
        for (const auto& l : labels) {
          if (l != rec.gold) others.push_back(l);
        }
        rec.candidates = sample_without_replacement(std::move(others), n - 1, rng);
        rec.candidates.push_back(rec.gold);
        rng.shuffle(std::span(rec.candidates));

        const auto& query_pool = pool_for(split, rec.gold, mode, rec.snr_db);
        if (query_pool.empty()) {
          throw InvalidArgument("no " + std::string(split_name(split)) + " asset for class " + rec.gold + " mode " +
                                std::string(mode_name(mode)) + " snr " + snr_label(rec.snr_db));
        }
        const AssetRecord* query = query_pool[rng.below(query_pool.size())];
        rec.query_image = query->path;
        rec.seed = query->seed;

        if (spec.shots > 0) {
          const Split shot_split = opposite(split);
          for (const auto& cand : rec.candidates) {
            const auto& shot_pool = pool_for(shot_split, cand, mode, rec.snr_db);
            if (shot_pool.size() < static_cast<std::size_t>(spec.shots)) {
              throw InvalidArgument("missing example images: class " + cand + " has " +
                                    std::to_string(shot_pool.size()) + " " + std::string(split_name(shot_split)) +
                                    " assets for mode " + std::string(mode_name(mode)) + " snr " +
                                    snr_label(rec.snr_db) + ", need " + std::to_string(spec.shots));
            }
            std::vector<std::string> paths;
            for (const auto* a : shot_pool) paths.push_back(a->path);
            rec.shot_images.push_back(
                {cand, sample_without_replacement(std::move(paths), static_cast<std::size_t>(spec.shots), rng)});
          }
        }
        rec.messages = render_prompt(rec);
        out.push_back(std::move(rec));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prompts

std::string_view system_prompt() {
  return "You are a helpful assistant with expertise in recognizing patterns and identifying RF modulations "
         "from visual inputs.";
}

std::string format_candidate_list(std::span<const std::string> candidates) {
  std::string out = "[";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i) out += ", ";
    out += '\'' + candidates[i] + '\'';
  }
  return out + "]";
}

std::string_view mode_note(ImageMode mode) {
  switch (mode) {
    case ImageMode::Spec:
      return "Note: this image includes only the spectrogram magnitude (in dB), without phase information or "
             "time-domain waveform.";
    case ImageMode::IQ:
      return "Note: this image includes a short IQ time-series panel showing real part (blue) and imaginary part "
             "(red) of the signal plotted over time, without spectrogram views. The time-series corresponds to a "
             "segment down converted from the RF waveform.";
    case ImageMode::Joint:
      return "Note: this image has two horizontal panels. LEFT: magnitude spectrogram (dB), RIGHT: a short IQ "
             "time-series panel showing real part (blue) and imaginary part (red) of the signal plotted over time. "
             "The time-series corresponds to a segment down converted from the RF waveform.";
  }
  return "";
}

namespace {

constexpr std::string_view kFewShotIntro =
    "You will see examples for several classes, followed by a query image. Use frequency patterns (spectrogram) "
    "and temporal dynamics (IQ waveforms) as appropriate.";

std::string classify_instruction(const VqaRecord& r) {
  return "Your task is to analyze an RF visualization and determine the most likely modulation class from a given "
         "list. " +
         std::string(mode_note(r.mode)) + " Here are the classes: " + format_candidate_list(r.candidates) +
         ". Your response must contain the exact name of the class only. Here is the IMAGE:";
}

std::string explain_instruction(const VqaRecord& r) {
  return "Select the correct modulation class in " + format_candidate_list(r.candidates) +
         " for following RF signal with your rationale:";
}

}  // namespace

std::vector<ChatMessage> render_prompt(const VqaRecord& record) {
  ChatMessage system{"system", {ContentPart::text(std::string(system_prompt()))}};
  ChatMessage user{"user", {}};
  if (!record.shot_images.empty()) {
    user.content.push_back(ContentPart::text(std::string(kFewShotIntro)));
    for (const auto& block : record.shot_images) {
      user.content.push_back(ContentPart::text("Spectrogram (and/or time-series panels) for " + block.class_name + ":"));
      for (const auto& img : block.images) user.content.push_back(ContentPart::image(img));
    }
  }
  user.content.push_back(ContentPart::text(record.prompt == PromptTemplate::Classify ? classify_instruction(record)
                                                                                     : explain_instruction(record)));
  user.content.push_back(ContentPart::image(record.query_image));
  return {std::move(system), std::move(user)};
}

VqaRecord build_explanation_variant(const VqaRecord& record) {
  VqaRecord out = record;
  out.prompt = PromptTemplate::Explain;
  out.messages = render_prompt(out);
  return out;
}

}  // namespace rfvqa
