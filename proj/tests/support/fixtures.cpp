#include "fixtures.hpp"

namespace rfvqa::fixture {

SplitManifest synthetic_manifest(const DatasetSpec& spec) {
  SplitManifest m;
  for (const auto& cls : spec.label_space()) {
    const bool excluded = spec.oov_excluded.count(cls.canonical_name) != 0;
    for (std::size_t i = 0; i < spec.seeds_per_class; ++i) {
      const Split split = split_for_seed_index(i);
      if (excluded && split == Split::Train) continue;
      const auto seed = asset_seed(spec.master_seed, cls.canonical_name, i);
      for (const auto& snr : spec.snr_grid) {
        for (auto mode : spec.modes) {
          m.rows.push_back({cls.canonical_name, cls.family, mode, snr, seed, split,
                            asset_relative_path(split, cls.canonical_name, mode, seed, snr)});
        }
      }
    }
  }
  return m;
}

VqaRecord record(const std::string& id, const std::string& gold, std::vector<std::string> candidates, ImageMode mode,
                 std::optional<double> snr, int n_way) {
  VqaRecord r;
  r.id = id;
  r.gold = gold;
  r.candidates = std::move(candidates);
  r.mode = mode;
  r.snr_db = snr;
  r.n_way = n_way ? n_way : static_cast<int>(r.candidates.size());
  r.query_image = "assets/eval/" + gold + "/q.png";
  r.messages = render_prompt(r);
  return r;
}

ResponseRecord answer(const std::string& id, const std::string& text) {
  ResponseRecord r;
  r.id = id;
  r.raw_text = text;
  r.attempts = 1;
  return r;
}

ResponseRecord failure(const std::string& id) {
  ResponseRecord r;
  r.id = id;
  r.status = ResponseStatus::Failed;
  r.attempts = 3;
  r.error = "HTTP 503";
  return r;
}

}  // namespace rfvqa::fixture
