#include "rfvqa/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rfvqa/error.hpp"
#include "rfvqa/hash.hpp"
#include "rfvqa/rng.hpp"

namespace rfvqa {

namespace {
constexpr std::uint64_t kNoiseStream = 0x4e4f495345ULL;     // "NOISE"
constexpr std::uint64_t kSegmentStream = 0x5345474d454eULL;  // "SEGMEN"
}  // namespace

std::size_t PipelineConfig::analysis_length() const {
  return synthesis.num_samples != 0 ? synthesis.num_samples : stft.square_length();
}

void PipelineConfig::validate() const {
  SynthesisParams p = synthesis;
  p.num_samples = analysis_length();
  p.validate();
  stft.validate();
  SegmentationConfig seg{hysteresis_eps.value_or(0.0), p_min, p_max};
  seg.validate();
  if (p.num_samples < stft.fft_size) throw InvalidArgument("analysis length shorter than one STFT frame");
  if (!(lo_pct >= 0.0 && hi_pct <= 100.0 && lo_pct < hi_pct)) {
    throw InvalidArgument("normalization percentiles require 0 <= lo < hi <= 100");
  }
  if (iq_panel.width == 0 || iq_panel.height == 0) throw InvalidArgument("IQ panel size must be positive");
}

std::string PipelineConfig::digest() const {
  std::ostringstream os;
  os.precision(17);
  os << "n=" << analysis_length() << ";fs=" << synthesis.sample_rate << ";sps=" << synthesis.samples_per_symbol
     << ";cfo=" << synthesis.carrier_offset << ";beta=" << synthesis.excess_bandwidth
     << ";ofdm=" << (synthesis.ofdm_fft_size ? std::to_string(*synthesis.ofdm_fft_size) : "auto")
     << ";eps=";
  if (hysteresis_eps) {
    os << *hysteresis_eps;
  } else {
    os << "auto";
  }
  os << ";p=" << p_min << "-" << p_max
     << ";K=" << stft.fft_size << ";H=" << stft.hop << ";pct=" << lo_pct << "-" << hi_pct
     << ";iq=" << iq_panel.width << "x" << iq_panel.height;
  return sha256_hex(std::string_view(os.str()));
}

IqSignal asset_signal(const ModulationClass& cls, std::uint64_t asset_seed, std::optional<double> snr_db,
                      const PipelineConfig& cfg) {
  SynthesisParams p = cfg.synthesis;
  p.num_samples = cfg.analysis_length();
  p.seed = asset_seed;
  IqSignal clean = synthesize(cls, p);
  if (!snr_db) return clean;
  return add_awgn(clean, *snr_db, derive_seed(asset_seed, kNoiseStream));
}

SegmentationConfig segmentation_for(const IqSignal& signal, const PipelineConfig& cfg) {
  SegmentationConfig seg{0.0, cfg.p_min, cfg.p_max};
  if (cfg.hysteresis_eps) {
    seg.hysteresis_eps = *cfg.hysteresis_eps;
  } else if (signal.snr_db) {
    double acc = 0.0;
    for (const auto& v : signal.samples) acc += v.real() * v.real();
    seg.hysteresis_eps = 0.1 * std::sqrt(acc / static_cast<double>(signal.samples.size()));
  }
  return seg;
}

IqSegment asset_segment(const IqSignal& signal, std::uint64_t asset_seed, const PipelineConfig& cfg) {
  const auto seg = segmentation_for(signal, cfg);
  const std::uint64_t seed = derive_seed(asset_seed, kSegmentStream);
  try {
    return extract_segment(signal, seg, seed);
  } catch (const InsufficientCrossings&) {
    double mean = 0.0;
    for (const auto& v : signal.samples) mean += v.real();
    mean /= static_cast<double>(signal.samples.size());
    if (!(mean > 0.0)) throw;
    SegmentationConfig raised = seg;
    raised.hysteresis_eps = seg.hysteresis_eps + mean;
    return extract_segment(signal, raised, seed);
  }
}

NormalizedMatrix asset_spectrogram(const IqSignal& signal, const PipelineConfig& cfg) {
  return normalize_db(stft(signal.samples, cfg.stft), cfg.lo_pct, cfg.hi_pct);
}

const RenderedImage& AssetImages::get(ImageMode mode) const {
  const std::optional<RenderedImage>* slot = nullptr;
  switch (mode) {
    case ImageMode::Spec: slot = &spec; break;
    case ImageMode::IQ: slot = &iq; break;
    case ImageMode::Joint: slot = &joint; break;
  }
  if (!slot || !*slot) throw InvalidArgument("image mode " + std::string(mode_name(mode)) + " was not rendered");
  return **slot;
}

AssetImages render_asset(const IqSignal& signal, std::uint64_t asset_seed, std::span<const ImageMode> modes,
                         const PipelineConfig& cfg) {
  auto wants = [&](ImageMode m) { return std::find(modes.begin(), modes.end(), m) != modes.end(); };
  const bool joint = wants(ImageMode::Joint);
  const Provenance prov{signal.label.canonical_name, signal.snr_db, asset_seed, cfg.digest()};
  AssetImages out;
  std::optional<RenderedImage> spec_img;
  if (joint || wants(ImageMode::Spec)) {
    spec_img = render_spectrogram(asset_spectrogram(signal, cfg));
    spec_img->provenance = prov;
  }
  if (joint || wants(ImageMode::IQ)) {
    const auto segment = asset_segment(signal, asset_seed, cfg);
    if (wants(ImageMode::IQ)) {
      out.iq = render_iq_panel(segment, cfg.iq_panel);
      out.iq->provenance = prov;
    }
    if (joint) {
      // Height-matched at render time, never by resampling.
      PanelSize joint_panel = cfg.iq_panel;
      joint_panel.height = spec_img->pixels.height;
      RenderedImage iq_panel = render_iq_panel(segment, joint_panel);
      out.joint = render_joint(*spec_img, iq_panel);
      out.joint->provenance = prov;
    }
  }
  if (wants(ImageMode::Spec)) out.spec = std::move(spec_img);
  return out;
}

}  // namespace rfvqa
