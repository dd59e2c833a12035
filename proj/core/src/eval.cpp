#include "rfvqa/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "rfvqa/error.hpp"
#include "rfvqa/hash.hpp"

namespace rfvqa {

using ojson = nlohmann::ordered_json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool token_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-'; }

bool strippable(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isspace(u) || (std::ispunct(u) && c != '-') || c == '-';
}

}  // namespace

std::optional<std::string> parse_prediction(std::string_view raw_text, std::span<const std::string> candidates,
                                            bool rationale_mode) {
  const std::string text = lower(raw_text);
  if (!rationale_mode) {
    std::size_t b = 0, e = text.size();
    while (b < e && strippable(text[b])) ++b;
    while (e > b && strippable(text[e - 1])) --e;
    const std::string_view core(text.data() + b, e - b);
    for (const auto& c : candidates) {
      if (lower(c) == core) return c;
    }
    return std::nullopt;
  }

  std::optional<std::string> best;
  std::size_t best_pos = 0;
  for (const auto& c : candidates) {
    const std::string needle = lower(c);
    if (needle.empty()) continue;
    for (std::size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
      const std::size_t end = pos + needle.size();
      const bool left_ok = pos == 0 || !token_char(text[pos - 1]);
      const bool right_ok = end == text.size() || !token_char(text[end]);
      if (left_ok && right_ok && (!best || pos >= best_pos)) {
        best = c;
        best_pos = pos;
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Response I/O

std::string response_to_json_line(const ResponseRecord& r) {
  ojson j;
  j["id"] = r.id;
  j["raw_text"] = r.raw_text;
  j["prediction"] = r.prediction ? ojson(*r.prediction) : ojson(nullptr);
  j["status"] = r.status == ResponseStatus::Ok ? "ok" : "failed";
  j["latency_ms"] = r.latency_ms;
  j["attempts"] = r.attempts;
  j["error"] = r.error;
  return j.dump();
}

ResponseRecord response_from_json_line(std::string_view text, std::size_t line) {
  ResponseRecord r;
  try {
    const ojson j = ojson::parse(text);
    auto need = [&](const char* key) -> const ojson& {
      if (!j.contains(key)) throw ParseError(line, std::string("missing field '") + key + "'");
      return j.at(key);
    };
    r.id = need("id").get<std::string>();
    r.raw_text = need("raw_text").get<std::string>();
    const auto& p = need("prediction");
    if (!p.is_null()) r.prediction = p.get<std::string>();
    const auto status = need("status").get<std::string>();
    if (status == "ok") {
      r.status = ResponseStatus::Ok;
    } else if (status == "failed") {
      r.status = ResponseStatus::Failed;
    } else {
      throw ParseError(line, "unknown status '" + status + "'");
    }
    r.latency_ms = need("latency_ms").get<double>();
    r.attempts = need("attempts").get<int>();
    r.error = need("error").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line, std::string("invalid response record: ") + e.what());
  }
  return r;
}

std::vector<ResponseRecord> read_responses(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingArtifact(path.string());
  std::vector<ResponseRecord> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(is, text)) {
    ++line;
    if (!text.empty()) out.push_back(response_from_json_line(text, line));
  }
  return out;
}

void write_responses(std::span<const ResponseRecord> responses, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& r : responses) os << response_to_json_line(r) << '\n';
  if (!os) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Scoring

double EvalReport::invalid_rate() const {
  return overall.total ? static_cast<double>(invalid) / static_cast<double>(overall.total) : 0.0;
}

double EvalReport::failed_rate() const {
  return overall.total ? static_cast<double>(failed) / static_cast<double>(overall.total) : 0.0;
}

EvalReport score(std::span<const VqaRecord> dataset, std::span<const ResponseRecord> responses, std::string model) {
  std::unordered_map<std::string, const VqaRecord*> by_id;
  for (const auto& r : dataset) {
    if (!by_id.emplace(r.id, &r).second) throw InvalidArgument("duplicate dataset record id '" + r.id + "'");
  }
  std::unordered_map<std::string, const ResponseRecord*> answers;
  for (const auto& r : responses) {
    if (!by_id.count(r.id)) throw InvalidArgument("response for unknown record id '" + r.id + "'");
    if (!answers.emplace(r.id, &r).second) throw InvalidArgument("duplicate response id '" + r.id + "'");
  }

  EvalReport rep;
  rep.model = std::move(model);
  rep.system_prompt_sha256 = sha256_hex(system_prompt());
  for (const auto& rec : dataset) {
    std::optional<std::string> pred;
    auto it = answers.find(rec.id);
    if (it == answers.end()) {
      ++rep.missing;
    } else if (it->second->status == ResponseStatus::Failed) {
      ++rep.failed;
    } else {
      pred = parse_prediction(it->second->raw_text, rec.candidates, rec.prompt == PromptTemplate::Explain);
      if (!pred) ++rep.invalid;
    }
    const bool ok = pred && *pred == rec.gold;
    const Family fam = parse_class(rec.gold).family;
    rep.overall.add(ok);
    rep.per_class[rec.gold].add(ok);
    rep.per_family[fam].add(ok);
    rep.by_mode[rec.mode].add(ok);
    rep.by_snr[{rec.mode, rec.snr_db}].add(ok);
    rep.by_nway[{rec.mode, rec.n_way}].add(ok);
    rep.by_oov[{rec.mode, rec.oov}].add(ok);
    std::optional<Family> pf;
    if (pred) pf = parse_class(*pred).family;
    ++rep.family_confusion[{fam, pf}];
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Report serialization

namespace {

ojson tally_json(const Tally& t) { return {{"correct", t.correct}, {"total", t.total}}; }
Tally tally_from(const ojson& j) { return {j.at("correct").get<std::size_t>(), j.at("total").get<std::size_t>()}; }
ojson snr_json(const SnrKey& s) { return s ? ojson(*s) : ojson(nullptr); }
SnrKey snr_from(const ojson& j) { return j.is_null() ? SnrKey{} : SnrKey{j.get<double>()}; }

std::string pct(const Tally& t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%6.2f%%", 100.0 * t.accuracy());
  return buf;
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

}  // namespace

std::string report_to_json(const EvalReport& r) {
  ojson j;
  j["model"] = r.model;
  j["system_prompt_sha256"] = r.system_prompt_sha256;
  j["overall"] = tally_json(r.overall);
  j["invalid"] = r.invalid;
  j["failed"] = r.failed;
  j["missing"] = r.missing;
  j["per_class"] = ojson::object();
  for (const auto& [k, t] : r.per_class) j["per_class"][k] = tally_json(t);
  j["per_family"] = ojson::object();
  for (const auto& [k, t] : r.per_family) j["per_family"][std::string(family_name(k))] = tally_json(t);
  j["by_mode"] = ojson::object();
  for (const auto& [k, t] : r.by_mode) j["by_mode"][std::string(mode_name(k))] = tally_json(t);
  j["by_snr"] = ojson::array();
  for (const auto& [k, t] : r.by_snr) {
    j["by_snr"].push_back({{"mode", mode_name(k.first)}, {"snr_db", snr_json(k.second)}, {"tally", tally_json(t)}});
  }
  j["by_nway"] = ojson::array();
  for (const auto& [k, t] : r.by_nway) {
    j["by_nway"].push_back({{"mode", mode_name(k.first)}, {"n_way", k.second}, {"tally", tally_json(t)}});
  }
  j["by_oov"] = ojson::array();
  for (const auto& [k, t] : r.by_oov) {
    j["by_oov"].push_back({{"mode", mode_name(k.first)}, {"oov", k.second}, {"tally", tally_json(t)}});
  }
  j["family_confusion"] = ojson::array();
  for (const auto& [k, n] : r.family_confusion) {
    j["family_confusion"].push_back({{"gold", family_name(k.first)},
                                     {"predicted", k.second ? ojson(family_name(*k.second)) : ojson(nullptr)},
                                     {"count", n}});
  }
  return j.dump(2) + "\n";
}

EvalReport report_from_json(std::string_view text) {
  EvalReport r;
  try {
    const ojson j = ojson::parse(text);
    r.model = j.at("model").get<std::string>();
    r.system_prompt_sha256 = j.at("system_prompt_sha256").get<std::string>();
    r.overall = tally_from(j.at("overall"));
    r.invalid = j.at("invalid").get<std::size_t>();
    r.failed = j.at("failed").get<std::size_t>();
    r.missing = j.at("missing").get<std::size_t>();
    for (const auto& [k, t] : j.at("per_class").items()) r.per_class[k] = tally_from(t);
    for (const auto& [k, t] : j.at("per_family").items()) r.per_family[parse_family(k)] = tally_from(t);
    for (const auto& [k, t] : j.at("by_mode").items()) r.by_mode[parse_mode(k)] = tally_from(t);
    for (const auto& e : j.at("by_snr")) {
      r.by_snr[{parse_mode(e.at("mode").get<std::string>()), snr_from(e.at("snr_db"))}] = tally_from(e.at("tally"));
    }
    for (const auto& e : j.at("by_nway")) {
      r.by_nway[{parse_mode(e.at("mode").get<std::string>()), e.at("n_way").get<int>()}] = tally_from(e.at("tally"));
    }
    for (const auto& e : j.at("by_oov")) {
      r.by_oov[{parse_mode(e.at("mode").get<std::string>()), e.at("oov").get<bool>()}] = tally_from(e.at("tally"));
    }
    for (const auto& e : j.at("family_confusion")) {
      std::optional<Family> pf;
      if (!e.at("predicted").is_null()) pf = parse_family(e.at("predicted").get<std::string>());
      r.family_confusion[{parse_family(e.at("gold").get<std::string>()), pf}] = e.at("count").get<std::size_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("invalid report: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(0, std::string("invalid report: ") + e.what());
  }
  return r;
}

std::string report_to_text(const EvalReport& r) {
  std::ostringstream os;
  auto line = [&](const std::string& label, const Tally& t) {
    os << "  " << pad(label, 16) << pct(t) << "  (" << t.correct << "/" << t.total << ")\n";
  };
  os << "model: " << (r.model.empty() ? "-" : r.model) << "\n";
  os << "system prompt sha256: " << r.system_prompt_sha256 << "\n";
  line("overall", r.overall);
  char buf[96];
  std::snprintf(buf, sizeof buf, "  invalid %zu (%.2f%%), failed %zu (%.2f%%), missing %zu\n", r.invalid,
                100.0 * r.invalid_rate(), r.failed, 100.0 * r.failed_rate(), r.missing);
  os << buf;
  os << "by mode:\n";
  for (const auto& [m, t] : r.by_mode) line(std::string(mode_name(m)), t);
  os << "by family:\n";
  for (Family f : all_families()) {
    auto it = r.per_family.find(f);
    if (it != r.per_family.end()) line(std::string(family_name(f)), it->second);
  }
  os << "by class:\n";
  for (const auto& c : list_classes()) {
    auto it = r.per_class.find(c.canonical_name);
    if (it != r.per_class.end()) line(c.canonical_name, it->second);
  }
  os << "family confusion (gold -> predicted: count):\n";
  for (const auto& [k, n] : r.family_confusion) {
    os << "  " << pad(std::string(family_name(k.first)), 10) << " -> "
       << pad(k.second ? std::string(family_name(*k.second)) : std::string("invalid"), 10) << " " << n << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Sweeps

std::string_view facet_name(SweepFacet facet) {
  switch (facet) {
    case SweepFacet::Snr:
      return "snr";
    case SweepFacet::NWay:
      return "nway";
    case SweepFacet::Oov:
      return "oov";
  }
  return "";
}

SweepFacet parse_facet(std::string_view name) {
  if (name == "snr") return SweepFacet::Snr;
  if (name == "nway") return SweepFacet::NWay;
  if (name == "oov") return SweepFacet::Oov;
  throw InvalidArgument("unknown sweep facet '" + std::string(name) + "' (expected snr, nway or oov)");
}

std::string SweepTable::to_csv() const {
  std::ostringstream os;
  os << facet_name(facet) << ",mode,correct,total,accuracy\n";
  for (const auto& r : rows) {
    char acc[32];
    std::snprintf(acc, sizeof acc, "%.6f", r.tally.accuracy());
    os << r.facet_value << ',' << mode_name(r.mode) << ',' << r.tally.correct << ',' << r.tally.total << ',' << acc
       << '\n';
  }
  return os.str();
}

std::string SweepTable::to_text() const {
  std::size_t w = facet_name(facet).size();
  for (const auto& r : rows) w = std::max(w, r.facet_value.size());
  std::ostringstream os;
  os << pad(std::string(facet_name(facet)), w + 2) << pad("mode", 7) << pad("correct", 9) << pad("total", 7)
     << "accuracy\n";
  for (const auto& r : rows) {
    os << pad(r.facet_value, w + 2) << pad(std::string(mode_name(r.mode)), 7)
       << pad(std::to_string(r.tally.correct), 9) << pad(std::to_string(r.tally.total), 7) << pct(r.tally) << '\n';
  }
  return os.str();
}

SweepTable sweep_from_reports(SweepFacet facet, std::span<const std::pair<std::string, EvalReport>> reports) {
  SweepTable table;
  table.facet = facet;
  if (reports.empty()) return table;
  std::set<ImageMode> modes;
  for (const auto& [m, t] : reports.front().second.by_mode) modes.insert(m);
  table.model = reports.front().second.model;
  for (const auto& [value, rep] : reports) {
    std::set<ImageMode> these;
    for (const auto& [m, t] : rep.by_mode) these.insert(m);
    if (these != modes) throw InvalidArgument("sweep inputs cover different image modes (report '" + value + "')");
    if (rep.model != table.model) throw InvalidArgument("sweep inputs come from different models (report '" + value + "')");
  }
  for (ImageMode m : modes) {
    for (const auto& [value, rep] : reports) table.rows.push_back({value, m, rep.by_mode.at(m)});
  }
  return table;
}

SweepTable sweep_within_report(SweepFacet facet, const EvalReport& report) {
  SweepTable table;
  table.facet = facet;
  table.model = report.model;
  switch (facet) {
    case SweepFacet::Snr:
      for (const auto& [k, t] : report.by_snr) table.rows.push_back({snr_label(k.second), k.first, t});
      break;
    case SweepFacet::NWay:
      for (const auto& [k, t] : report.by_nway) table.rows.push_back({std::to_string(k.second), k.first, t});
      break;
    case SweepFacet::Oov:
      for (const auto& [k, t] : report.by_oov) table.rows.push_back({k.second ? "oov" : "in-vocab", k.first, t});
      break;
  }
  return table;
}

}  // namespace rfvqa
