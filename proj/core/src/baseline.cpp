#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "rfvqa/error.hpp"
#include "rfvqa/eval.hpp"

namespace rfvqa {

SplitManifest filter_split(const SplitManifest& manifest, Split split) {
  SplitManifest out;
  for (const auto& r : manifest.rows) {
    if (r.split == split) out.rows.push_back(r);
  }
  return out;
}

namespace {

struct Item {
  std::string cls;
  std::uint64_t seed;
  std::optional<double> snr;
  bool operator<(const Item& o) const { return std::tie(cls, seed, snr) < std::tie(o.cls, o.seed, o.snr); }
};

std::vector<Item> unique_items(const SplitManifest& m) {
  std::set<Item> seen;
  std::vector<Item> out;
  for (const auto& r : m.rows) {
    Item it{r.class_name, r.seed, r.snr_db};
    if (seen.insert(it).second) out.push_back(it);
  }
  return out;
}

std::vector<double> features(const Item& it, const PipelineConfig& cfg) {
  const IqSignal sig = asset_signal(parse_class(it.cls), it.seed, it.snr, cfg);
  return asset_spectrogram(sig, cfg).values;
}

}  // namespace

BaselineResult nearest_centroid_baseline(const SplitManifest& train, const SplitManifest& eval,
                                         const PipelineConfig& pipeline, ImageMode mode) {
  if (mode != ImageMode::Spec) throw InvalidArgument("nearest-centroid baseline supports the Spec mode only");
  pipeline.validate();
  const auto train_items = unique_items(train);
  const auto eval_items = unique_items(eval);
  if (train_items.empty() || eval_items.empty()) throw InvalidArgument("baseline needs non-empty train and eval sets");

  std::map<std::string, std::pair<std::vector<double>, std::size_t>> sums;
  for (const auto& it : train_items) {
    auto f = features(it, pipeline);
    auto& [sum, n] = sums[it.cls];
    if (sum.empty()) sum.assign(f.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) sum[i] += f[i];
    ++n;
  }
  for (const auto& it : eval_items) {
    if (!sums.count(it.cls)) throw InvalidArgument("class '" + it.cls + "' is in the eval set but absent from train");
  }
  for (auto& [cls, entry] : sums) {
    for (auto& v : entry.first) v /= static_cast<double>(entry.second);
  }

  BaselineResult res;
  for (const auto& it : eval_items) {
    const auto f = features(it, pipeline);
    const std::string* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& [cls, entry] : sums) {
      double d = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        const double e = f[i] - entry.first[i];
        d += e * e;
      }
      if (d < best_d) {
        best_d = d;
        best = &cls;
      }
    }
    const bool ok = *best == it.cls;
    res.overall.add(ok);
    res.per_class[it.cls].add(ok);
    res.per_family[parse_class(it.cls).family].add(ok);
  }
  return res;
}

}  // namespace rfvqa
