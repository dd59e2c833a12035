#include "commands.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rfvqa/error.hpp"
#include "rfvqa/hash.hpp"

namespace rfvqa::cli {

namespace fs = std::filesystem;

namespace {

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingArtifact(path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void require(const fs::path& path) {
  if (!fs::exists(path)) throw MissingArtifact(path.string());
}

Layout prepare(const RunConfig& cfg) {
  Layout l{cfg.output_dir};
  fs::create_directories(l.root);
  write_text(l.resolved_config(), config_to_json(cfg).dump(2) + "\n");
  return l;
}

void finish(const Layout& l, RunSummary& s, const Timer& t, ojson extra = ojson::object()) {
  s.wall_time_s = t.seconds();
  ojson j;
  j["command"] = s.command;
  j["assets"] = s.assets;
  j["episodes"] = s.episodes;
  j["responses"] = s.responses;
  j["wall_time_s"] = s.wall_time_s;
  j["config_hash"] = s.config_hash;
  j["tool_version"] = s.tool_version;
  j["up_to_date"] = s.up_to_date;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  write_text(l.summary(s.command), j.dump(2) + "\n");
}

RunSummary start(const std::string& command, const RunConfig& cfg) {
  RunSummary s;
  s.command = command;
  s.config_hash = config_hash(cfg);
  return s;
}

/// Number of verified entries, or nullopt when anything is missing or stale.
std::optional<std::size_t> verify_assets(const Layout& l, const std::string& digest) {
  if (!fs::exists(l.summary("gen")) || !fs::exists(l.manifest()) || !fs::exists(l.checksums())) return std::nullopt;
  try {
    const auto summary = ojson::parse(read_text(l.summary("gen")));
    if (summary.value("assets_digest", std::string()) != digest) return std::nullopt;
    const auto manifest = read_manifest_csv(l.manifest());
    std::istringstream is(read_text(l.checksums()));
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const auto sep = line.find("  ");
      if (sep == std::string::npos) return std::nullopt;
      const fs::path p = l.root / line.substr(sep + 2);
      if (!fs::exists(p) || sha256_file(p) != line.substr(0, sep)) return std::nullopt;
      ++n;
    }
    if (n != manifest.rows.size()) return std::nullopt;
    return n;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::string assets_digest(const RunConfig& cfg) {
  const auto j = config_to_json(cfg);
  ojson d;
  d["pipeline"] = cfg.pipeline.digest();
  d["classes"] = j["dataset"]["classes"];
  d["modes"] = j["dataset"]["modes"];
  d["seeds_per_class"] = j["dataset"]["seeds_per_class"];
  d["snr_grid"] = j["dataset"]["snr_grid"];
  d["oov_excluded"] = j["dataset"]["oov_excluded"];
  d["master_seed"] = cfg.master_seed;
  return sha256_hex(d.dump());
}

void cmd_classes(std::ostream& out) {
  for (const auto& c : list_classes()) {
    out << c.canonical_name << '\t' << family_name(c.family) << '\t'
        << (c.order ? std::to_string(*c.order) : std::string("-")) << '\n';
  }
}

RunSummary cmd_gen(const RunConfig& cfg, std::ostream& log) {
  Timer t;
  const Layout l = prepare(cfg);
  RunSummary s = start("gen", cfg);
  const std::string digest = assets_digest(cfg);
  if (auto verified = verify_assets(l, digest)) {
    s.assets = *verified;
    s.up_to_date = true;
    log << "up to date: " << *verified << " assets verified against " << l.checksums().string() << "\n";
    finish(l, s, t, {{"assets_digest", digest}});
    return s;
  }
  const SplitManifest manifest = generate_assets(cfg.dataset, cfg.pipeline, l.root, cfg.workers);
  write_manifest_csv(manifest, l.manifest());
  std::string sums;
  for (const auto& r : manifest.rows) sums += sha256_file(l.root / r.path) + "  " + r.path + "\n";
  write_text(l.checksums(), sums);
  s.assets = manifest.rows.size();
  log << "generated " << s.assets << " assets into " << l.root.string() << "\n";
  finish(l, s, t, {{"assets_digest", digest}});
  return s;
}

RunSummary cmd_build(const RunConfig& cfg, std::ostream& log) {
  Timer t;
  const Layout l = prepare(cfg);
  RunSummary s = start("build", cfg);
  require(l.manifest());
  const auto manifest = read_manifest_csv(l.manifest());
  const auto records = build_episodes(manifest, cfg.dataset);
  write_jsonl(records, l.episodes());
  s.assets = manifest.rows.size();
  s.episodes = records.size();
  log << "wrote " << s.episodes << " episodes to " << l.episodes().string() << "\n";
  finish(l, s, t);
  return s;
}

RunSummary cmd_infer(const RunConfig& cfg, bool resume, std::ostream& log) {
  Timer t;
  const Layout l = prepare(cfg);
  RunSummary s = start("infer", cfg);
  require(l.episodes());
  const auto stats = run_inference(l.episodes(), l.root, l.responses(), cfg.inference, resume);
  s.responses = stats.skipped + stats.requested;
  log << "responses: " << stats.ok << " ok, " << stats.failed << " failed, " << stats.skipped
      << " already present (" << stats.http_requests << " HTTP requests)\n";
  finish(l, s, t,
         {{"skipped", stats.skipped}, {"requested", stats.requested}, {"ok", stats.ok}, {"failed", stats.failed}});
  if (stats.requested > 0 && stats.ok == 0) {
    throw TransportError("every request failed; see the error field in " + l.responses().string());
  }
  return s;
}

RunSummary cmd_score(const RunConfig& cfg, std::ostream& out) {
  Timer t;
  const Layout l = prepare(cfg);
  RunSummary s = start("score", cfg);
  require(l.episodes());
  require(l.responses());
  const auto records = read_jsonl(l.episodes());
  const auto responses = read_responses(l.responses());
  const EvalReport report = score(records, responses, cfg.inference.model);
  write_text(l.reports() / "report.json", report_to_json(report));
  const std::string text = report_to_text(report);
  write_text(l.reports() / "report.txt", text);
  out << text;
  s.episodes = records.size();
  s.responses = responses.size();
  finish(l, s, t);
  return s;
}

RunSummary cmd_sweep(const RunConfig& cfg, SweepFacet facet,
                     const std::vector<std::pair<std::string, fs::path>>& reports, std::ostream& out) {
  Timer t;
  const Layout l = prepare(cfg);
  RunSummary s = start("sweep", cfg);
  SweepTable table;
  if (reports.empty()) {
    const fs::path p = l.reports() / "report.json";
    table = sweep_within_report(facet, report_from_json(read_text(p)));
  } else {
    std::vector<std::pair<std::string, EvalReport>> loaded;
    for (const auto& [label, path] : reports) loaded.emplace_back(label, report_from_json(read_text(path)));
    table = sweep_from_reports(facet, loaded);
  }
  const std::string stem = "sweep_" + std::string(facet_name(facet));
  write_text(l.reports() / (stem + ".csv"), table.to_csv());
  write_text(l.reports() / (stem + ".txt"), table.to_text());
  out << table.to_text();
  finish(l, s, t, {{"rows", table.rows.size()}});
  return s;
}

RunSummary cmd_baseline(const RunConfig& cfg, std::ostream& out) {
  Timer t;
  const Layout l = prepare(cfg);
  RunSummary s = start("baseline", cfg);
  require(l.manifest());
  const auto manifest = read_manifest_csv(l.manifest());
  const auto res = nearest_centroid_baseline(filter_split(manifest, Split::Train), filter_split(manifest, Split::Eval),
                                             cfg.pipeline);
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof buf, "nearest-centroid accuracy %.2f%% (%zu/%zu)\n", 100.0 * res.overall.accuracy(),
                res.overall.correct, res.overall.total);
  os << buf;
  for (Family f : all_families()) {
    auto it = res.per_family.find(f);
    if (it == res.per_family.end()) continue;
    std::snprintf(buf, sizeof buf, "  %-10s %6.2f%% (%zu/%zu)\n", std::string(family_name(f)).c_str(),
                  100.0 * it->second.accuracy(), it->second.correct, it->second.total);
    os << buf;
  }
  write_text(l.reports() / "baseline.txt", os.str());
  out << os.str();
  s.assets = manifest.rows.size();
  finish(l, s, t, {{"correct", res.overall.correct}, {"total", res.overall.total}});
  return s;
}

std::pair<std::string, fs::path> parse_report_arg(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw ConfigError("--report expects label=path, got '" + text + "'");
  }
  return {text.substr(0, eq), fs::path(text.substr(eq + 1))};
}

}  // namespace rfvqa::cli
