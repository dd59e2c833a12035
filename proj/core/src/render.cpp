#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>

#include "rfvqa/error.hpp"
#include "rfvqa/hash.hpp"
#include "rfvqa/render.hpp"

namespace rfvqa {

Image::Image(std::size_t w, std::size_t h, Rgb fill) : width(w), height(h), rgb(3 * w * h) {
  for (std::size_t i = 0; i < w * h; ++i) {
    rgb[3 * i] = fill.r;
    rgb[3 * i + 1] = fill.g;
    rgb[3 * i + 2] = fill.b;
  }
}

std::string_view mode_name(ImageMode mode) {
  switch (mode) {
    case ImageMode::Spec: return "spec";
    case ImageMode::IQ: return "iq";
    case ImageMode::Joint: return "joint";
  }
  return "?";
}

ImageMode parse_mode(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "spec") return ImageMode::Spec;
  if (lower == "iq") return ImageMode::IQ;
  if (lower == "joint") return ImageMode::Joint;
  throw InvalidArgument("unknown image mode '" + std::string(name) + "'");
}

RenderedImage render_spectrogram(const NormalizedMatrix& matrix) {
  if (matrix.rows == 0 || matrix.cols == 0) throw InvalidArgument("empty spectrogram matrix");
  const auto lut = viridis();
  RenderedImage out;
  out.mode = ImageMode::Spec;
  out.pixels = Image(matrix.cols, matrix.rows);
  for (std::size_t k = 0; k < matrix.rows; ++k) {
    const std::size_t y = matrix.rows - 1 - k;
    for (std::size_t t = 0; t < matrix.cols; ++t) {
      const double v = matrix.at(k, t);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidArgument("normalized spectrogram value " + std::to_string(v) + " outside [0, 1]");
      }
      out.pixels.set(t, y, lut[static_cast<std::size_t>(std::lround(v * 255.0))]);
    }
  }
  return out;
}

namespace {

void draw_line(Image& img, long x0, long y0, long x1, long y1, Rgb color) {
  const long dx = std::labs(x1 - x0);
  const long dy = -std::labs(y1 - y0);
  const long sx = x0 < x1 ? 1 : -1;
  const long sy = y0 < y1 ? 1 : -1;
  long err = dx + dy;
  for (;;) {
    img.set(static_cast<std::size_t>(x0), static_cast<std::size_t>(y0), color);
    if (x0 == x1 && y0 == y1) break;
    const long e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace

RenderedImage render_iq_panel(const IqSegment& segment, PanelSize size) {
  if (segment.samples.empty()) throw InvalidArgument("cannot render an empty IQ segment");
  if (size.width == 0 || size.height == 0) throw InvalidArgument("IQ panel size must be positive");
  double lo = segment.samples.front().real();
  double hi = lo;
  for (const auto& v : segment.samples) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw InvalidArgument("IQ segment contains non-finite samples");
    }
    lo = std::min({lo, v.real(), v.imag()});
    hi = std::max({hi, v.real(), v.imag()});
  }
  const double span_px = static_cast<double>(size.height - 1);
  const bool flat = !(hi > lo);
  auto to_y = [&](double v) -> long {
    if (flat) return static_cast<long>((size.height - 1) / 2);
    const double frac = (v - lo) / (hi - lo);
    return std::lround(span_px * (0.95 - 0.9 * frac));
  };
  const std::size_t count = segment.samples.size();
  auto to_x = [&](std::size_t i) -> long {
    if (count == 1) return 0;
    const std::size_t num = 2 * i * (size.width - 1) + (count - 1);
    return static_cast<long>(num / (2 * (count - 1)));
  };

  RenderedImage out;
  out.mode = ImageMode::IQ;
  out.pixels = Image(size.width, size.height);
  for (int pass = 0; pass < 2; ++pass) {
    const Rgb color = pass == 0 ? kRealTrace : kImagTrace;
    auto value = [&](std::size_t i) { return pass == 0 ? segment.samples[i].real() : segment.samples[i].imag(); };
    long px = to_x(0);
    long py = to_y(value(0));
    out.pixels.set(static_cast<std::size_t>(px), static_cast<std::size_t>(py), color);
    for (std::size_t i = 1; i < count; ++i) {
      const long x = to_x(i);
      const long y = to_y(value(i));
      draw_line(out.pixels, px, py, x, y, color);
      px = x;
      py = y;
    }
  }
  return out;
}

RenderedImage render_joint(const RenderedImage& spec, const RenderedImage& iq) {
  const Image& a = spec.pixels;
  const Image& b = iq.pixels;
  if (a.height != b.height) {
    throw InvalidArgument("joint panels need equal heights (" + std::to_string(a.height) + " vs " +
                          std::to_string(b.height) + ")");
  }
  RenderedImage out;
  out.mode = ImageMode::Joint;
  out.provenance = spec.provenance;
  out.pixels = Image(a.width + b.width, a.height);
  for (std::size_t y = 0; y < a.height; ++y) {
    auto dst = out.pixels.rgb.begin() + static_cast<std::ptrdiff_t>(3 * y * out.pixels.width);
    auto row_a = a.rgb.begin() + static_cast<std::ptrdiff_t>(3 * y * a.width);
    auto row_b = b.rgb.begin() + static_cast<std::ptrdiff_t>(3 * y * b.width);
    dst = std::copy(row_a, row_a + static_cast<std::ptrdiff_t>(3 * a.width), dst);
    std::copy(row_b, row_b + static_cast<std::ptrdiff_t>(3 * b.width), dst);
  }
  return out;
}

std::string pixel_digest(const Image& image) {
  std::string header = std::to_string(image.width) + "x" + std::to_string(image.height) + "\n";
  std::string buf = header;
  buf.append(reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
  return sha256_hex(std::string_view(buf));
}

}  // namespace rfvqa
