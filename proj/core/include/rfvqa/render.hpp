#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfvqa/transform.hpp"

namespace rfvqa {

enum class ImageMode { Spec, IQ, Joint };

/// "spec", "iq", "joint".
std::string_view mode_name(ImageMode mode);
/// Case-insensitive inverse of mode_name().
ImageMode parse_mode(std::string_view name);

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

inline constexpr Rgb kBackground{255, 255, 255};
inline constexpr Rgb kRealTrace{0, 0, 255};
inline constexpr Rgb kImagTrace{255, 0, 0};

/// Reference 256-entry viridis table (matplotlib data rounded to 8 bits).
std::span<const Rgb, 256> viridis();

/// 8-bit RGB raster, row 0 at the top, no alpha.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(std::size_t w, std::size_t h, Rgb fill = kBackground);

  Rgb pixel(std::size_t x, std::size_t y) const {
    const std::size_t i = 3 * (y * width + x);
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
  }
  void set(std::size_t x, std::size_t y, Rgb c) {
    const std::size_t i = 3 * (y * width + x);
    rgb[i] = c.r;
    rgb[i + 1] = c.g;
    rgb[i + 2] = c.b;
  }
  bool operator==(const Image&) const = default;
};

struct Provenance {
  std::string class_label;
  std::optional<double> snr_db;
  std::uint64_t seed = 0;
  std::string config_hash;
};

struct RenderedImage {
  Image pixels;
  ImageMode mode = ImageMode::Spec;
  Provenance provenance;
};

struct PanelSize {
  std::size_t width = 512;
  std::size_t height = 512;
};

/// One pixel per matrix cell: K rows tall, T columns wide. Matrix row 0
/// (lowest shifted frequency) is the bottom pixel row; value v picks
/// viridis[round(255 v)]. Throws InvalidArgument on values outside [0, 1].
RenderedImage render_spectrogram(const NormalizedMatrix& matrix);

/// Real (blue) then imaginary (red) traces as 1-px Bresenham polylines on
/// white. Both traces share one vertical scale mapping [min, max] to
/// [95%, 5%] of the height; a flat segment sits at mid-height.
RenderedImage render_iq_panel(const IqSegment& segment, PanelSize size);

/// Horizontal concatenation, spectrogram on the left. Heights must match.
RenderedImage render_joint(const RenderedImage& spec, const RenderedImage& iq);

/// Lossless 8-bit RGB PNG with no ancillary chunks (no time stamps).
std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(std::span<const std::uint8_t> bytes);
void write_png(const Image& image, const std::filesystem::path& path);
Image read_png(const std::filesystem::path& path);

/// SHA-256 over "width x height" plus the raw RGB bytes.
std::string pixel_digest(const Image& image);

}  // namespace rfvqa
