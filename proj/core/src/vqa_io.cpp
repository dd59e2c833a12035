#include <fstream>

#include "json.hpp"

#include "rfvqa/error.hpp"
#include "rfvqa/vqa.hpp"

namespace rfvqa {

using ojson = nlohmann::ordered_json;

std::string record_to_json_line(const VqaRecord& r) {
  ojson j;
  j["id"] = r.id;
  j["split"] = split_name(r.split);
  j["mode"] = mode_name(r.mode);
  j["n_way"] = r.n_way;
  j["shots"] = r.shots;
  j["template"] = template_name(r.prompt);
  j["candidates"] = r.candidates;
  j["gold"] = r.gold;
  j["oov"] = r.oov;
  j["snr_db"] = r.snr_db ? ojson(*r.snr_db) : ojson(nullptr);
  j["seed"] = r.seed;
  j["query_image"] = r.query_image;
  ojson shots = ojson::object();
  for (const auto& b : r.shot_images) shots[b.class_name] = b.images;
  j["shot_images"] = shots;
  ojson msgs = ojson::array();
  for (const auto& m : r.messages) {
    ojson parts = ojson::array();
    for (const auto& p : m.content) {
      if (p.kind == ContentPart::Kind::Text) {
        parts.push_back({{"type", "text"}, {"text", p.value}});
      } else {
        parts.push_back({{"type", "image"}, {"image", p.value}});
      }
    }
    msgs.push_back({{"role", m.role}, {"content", parts}});
  }
  j["messages"] = msgs;
  return j.dump();
}

namespace {

const ojson& field(const ojson& j, const char* name, std::size_t line) {
  auto it = j.find(name);
  if (it == j.end()) throw ParseError(line, std::string("missing field '") + name + "'");
  return *it;
}

template <typename T>
T get_as(const ojson& j, const char* name, std::size_t line) {
  try {
    return field(j, name, line).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(line, std::string("field '") + name + "' has the wrong type");
  }
}

}  // namespace

VqaRecord record_from_json_line(std::string_view text, std::size_t line) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line, "record is not a JSON object");
  VqaRecord r;
  try {
    r.id = get_as<std::string>(j, "id", line);
    r.split = parse_split(get_as<std::string>(j, "split", line));
    r.mode = parse_mode(get_as<std::string>(j, "mode", line));
    r.n_way = get_as<int>(j, "n_way", line);
    r.shots = get_as<int>(j, "shots", line);
    r.prompt = parse_template(get_as<std::string>(j, "template", line));
    r.candidates = get_as<std::vector<std::string>>(j, "candidates", line);
    r.gold = get_as<std::string>(j, "gold", line);
    r.oov = get_as<bool>(j, "oov", line);
    const auto& snr = field(j, "snr_db", line);
    if (!snr.is_null()) {
      if (!snr.is_number()) throw ParseError(line, "field 'snr_db' has the wrong type");
      r.snr_db = snr.get<double>();
    }
    r.seed = get_as<std::uint64_t>(j, "seed", line);
    r.query_image = get_as<std::string>(j, "query_image", line);
    const auto& shots = field(j, "shot_images", line);
    if (!shots.is_object()) throw ParseError(line, "field 'shot_images' has the wrong type");
    for (const auto& [cls, imgs] : shots.items()) {
      if (!imgs.is_array()) throw ParseError(line, "field 'shot_images' has the wrong type");
      r.shot_images.push_back({cls, imgs.get<std::vector<std::string>>()});
    }
    const auto& msgs = field(j, "messages", line);
    if (!msgs.is_array()) throw ParseError(line, "field 'messages' has the wrong type");
    for (const auto& m : msgs) {
      ChatMessage cm;
      cm.role = get_as<std::string>(m, "role", line);
      const auto& content = field(m, "content", line);
      if (!content.is_array()) throw ParseError(line, "field 'content' has the wrong type");
      for (const auto& p : content) {
        const auto type = get_as<std::string>(p, "type", line);
        if (type == "text") {
          cm.content.push_back(ContentPart::text(get_as<std::string>(p, "text", line)));
        } else if (type == "image") {
          cm.content.push_back(ContentPart::image(get_as<std::string>(p, "image", line)));
        } else {
          throw ParseError(line, "unknown content part type '" + type + "'");
        }
      }
      r.messages.push_back(std::move(cm));
    }
  } catch (const InvalidArgument& e) {
    throw ParseError(line, e.what());
  }
  return r;
}

void write_jsonl(std::span<const VqaRecord> records, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& r : records) os << record_to_json_line(r) << '\n';
  if (!os) throw IoError("write failed for " + path.string());
}

std::vector<VqaRecord> read_jsonl(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingArtifact(path.string());
  std::vector<VqaRecord> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(is, text)) {
    ++line;
    if (text.empty()) continue;
    out.push_back(record_from_json_line(text, line));
  }
  return out;
}

}  // namespace rfvqa
