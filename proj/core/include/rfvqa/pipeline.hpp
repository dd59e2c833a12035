#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "rfvqa/modem.hpp"
#include "rfvqa/render.hpp"
#include "rfvqa/transform.hpp"

namespace rfvqa {

/// Everything needed to turn (class, asset seed, SNR) into images.
struct PipelineConfig {
  SynthesisParams synthesis;  // seed is ignored; num_samples 0 = stft.square_length()
  /// nullopt picks 0 for noiseless signals and 0.1 x RMS(real part) otherwise.
  std::optional<double> hysteresis_eps;
  int p_min = 20;
  int p_max = 25;
  StftConfig stft;
  double lo_pct = 2.0;
  double hi_pct = 98.0;
  PanelSize iq_panel;

  PipelineConfig() { synthesis.num_samples = 0; }

  std::size_t analysis_length() const;
  void validate() const;
  /// Stable SHA-256 of every field, recorded as image provenance.
  std::string digest() const;
};

/// Noiseless synthesis from `asset_seed`, then AWGN when snr_db is set.
IqSignal asset_signal(const ModulationClass& cls, std::uint64_t asset_seed, std::optional<double> snr_db,
                      const PipelineConfig& cfg);

/// Segmentation settings after resolving the automatic hysteresis.
SegmentationConfig segmentation_for(const IqSignal& signal, const PipelineConfig& cfg);

/// extract_segment() with the asset's segment seed. If the real trace never
/// rises through eps (a carrier-dominated trace such as am-dsb), retries once
/// with the threshold raised by the trace mean.
IqSegment asset_segment(const IqSignal& signal, std::uint64_t asset_seed, const PipelineConfig& cfg);

NormalizedMatrix asset_spectrogram(const IqSignal& signal, const PipelineConfig& cfg);

struct AssetImages {
  std::optional<RenderedImage> spec;
  std::optional<RenderedImage> iq;
  std::optional<RenderedImage> joint;

  const RenderedImage& get(ImageMode mode) const;
};

/// Renders the requested modes from one signal; Joint reuses the Spec and IQ
/// panels, so the IQ panel height is forced to K.
AssetImages render_asset(const IqSignal& signal, std::uint64_t asset_seed, std::span<const ImageMode> modes,
                         const PipelineConfig& cfg);

}  // namespace rfvqa
