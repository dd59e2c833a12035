#pragma once

#include <string>
#include <vector>

#include "rfvqa/eval.hpp"
#include "rfvqa/vqa.hpp"

namespace rfvqa::fixture {

/// The rows generate_assets() would emit for `spec`, without rendering.
SplitManifest synthetic_manifest(const DatasetSpec& spec);

/// Minimal eval-split record; candidates default to {gold, others...}.
VqaRecord record(const std::string& id, const std::string& gold, std::vector<std::string> candidates,
                 ImageMode mode = ImageMode::Spec, std::optional<double> snr = std::nullopt, int n_way = 0);

ResponseRecord answer(const std::string& id, const std::string& text);
ResponseRecord failure(const std::string& id);

}  // namespace rfvqa::fixture
