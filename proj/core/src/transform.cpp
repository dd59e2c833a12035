#include "rfvqa/transform.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "rfvqa/error.hpp"
#include "rfvqa/rng.hpp"

namespace rfvqa {

void SegmentationConfig::validate() const {
  if (!(hysteresis_eps >= 0.0) || !std::isfinite(hysteresis_eps)) {
    throw InvalidArgument("hysteresis eps must be finite and >= 0");
  }
  if (p_min < 1 || p_max < p_min) throw InvalidArgument("period counts require 1 <= p_min <= p_max");
}

std::vector<std::size_t> zero_crossings(std::span<const double> r, double eps) {
  std::vector<std::size_t> out;
  for (std::size_t n = 1; n < r.size(); ++n) {
    if (r[n - 1] <= eps && r[n] > eps) out.push_back(n);
  }
  return out;
}

std::vector<double> real_part(std::span<const cf64> samples) {
  std::vector<double> r(samples.size());
  std::transform(samples.begin(), samples.end(), r.begin(), [](const cf64& v) { return v.real(); });
  return r;
}

IqSegment extract_segment(const IqSignal& signal, const SegmentationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto crossings = zero_crossings(real_part(signal.samples), cfg.hysteresis_eps);
  Rng rng(seed);
  const auto periods = static_cast<int>(rng.between(cfg.p_min, cfg.p_max));
  const auto needed = static_cast<std::size_t>(periods) + 1;
  if (crossings.size() < needed) throw InsufficientCrossings(needed, crossings.size());
  const auto j = static_cast<std::size_t>(rng.below(crossings.size() - needed + 1));
  const std::size_t first = crossings[j] - 1;
  const std::size_t last = crossings[j + static_cast<std::size_t>(periods)];
  IqSegment seg;
  seg.samples.assign(signal.samples.begin() + static_cast<std::ptrdiff_t>(first),
                     signal.samples.begin() + static_cast<std::ptrdiff_t>(last + 1));
  seg.start_index = first;
  seg.period_count = periods;
  return seg;
}

void StftConfig::validate() const {
  if (fft_size < 1 || hop < 1 || hop > fft_size) throw InvalidArgument("STFT requires 1 <= hop <= fft_size");
  if (centered) throw InvalidArgument("centered STFT frames are not supported");
  if (!fft_shift) throw InvalidArgument("the frequency axis must be FFT-shifted");
}

std::size_t StftConfig::frame_count(std::size_t n) const noexcept {
  if (n < fft_size) return 0;
  return 1 + (n - fft_size) / hop;
}

double db_floor() { return 20.0 * std::log10(kDbEpsilon); }

Grid<cf64> stft_complex(std::span<const cf64> x, const StftConfig& cfg) {
  cfg.validate();
  const std::size_t k_size = cfg.fft_size;
  if (x.size() < k_size) {
    throw InvalidArgument("signal of " + std::to_string(x.size()) + " samples is shorter than one frame (" +
                          std::to_string(k_size) + ")");
  }
  const std::size_t frames = cfg.frame_count(x.size());
  const auto window = blackman_window(k_size);
  const Fft fft(k_size);
  Grid<cf64> out{k_size, frames, std::vector<cf64>(k_size * frames)};
  std::vector<cf64> buf(k_size);
  std::vector<cf64> phase(k_size);
  for (std::size_t m = 0; m < k_size; ++m) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(k_size);
    phase[m] = {std::cos(angle), std::sin(angle)};
  }
  const std::size_t shift = k_size / 2;
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * cfg.hop;
    for (std::size_t n = 0; n < k_size; ++n) buf[n] = x[start + n] * window[n];
    fft.forward(buf);
    // The kernel uses absolute time, so the frame-local DFT picks up
    // exp(-j 2 pi k tH / K).
    const std::size_t offset = start % k_size;
    for (std::size_t k = 0; k < k_size; ++k) {
      const std::size_t phase_index = (k * offset) % k_size;
      cf64 v = buf[k];
      if (phase_index != 0) v *= phase[phase_index];
      const std::size_t row = (k + shift) % k_size;
      out.at(row, t) = v;
    }
  }
  return out;
}

SpectrogramMatrix stft(std::span<const cf64> x, const StftConfig& cfg) {
  const auto s = stft_complex(x, cfg);
  SpectrogramMatrix out;
  out.db.rows = s.rows;
  out.db.cols = s.cols;
  out.db.values.resize(s.values.size());
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    out.db.values[i] = 20.0 * std::log10(std::abs(s.values[i]) + kDbEpsilon);
  }
  out.floor_db = db_floor();
  return out;
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw InvalidArgument("percentile of an empty set");
  if (!(pct >= 0.0 && pct <= 100.0)) throw InvalidArgument("percentile must lie in [0, 100]");
  const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double v_lo = values[lo];
  double v_hi = v_lo;
  if (hi != lo) {
    v_hi = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  }
  return v_lo + (pos - static_cast<double>(lo)) * (v_hi - v_lo);
}

NormalizedMatrix normalize_db(const SpectrogramMatrix& spec, double lo_pct, double hi_pct) {
  if (!(lo_pct >= 0.0 && hi_pct <= 100.0 && lo_pct < hi_pct)) {
    throw InvalidArgument("normalization percentiles require 0 <= lo < hi <= 100");
  }
  const double p_lo = percentile(spec.db.values, lo_pct);
  const double p_hi = percentile(spec.db.values, hi_pct);
  NormalizedMatrix out{spec.db.rows, spec.db.cols, std::vector<double>(spec.db.values.size(), 0.0)};
  if (!(p_hi > p_lo)) return out;
  const double range = p_hi - p_lo;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double v = std::clamp(spec.db.values[i], p_lo, p_hi);
    out.values[i] = std::clamp((v - p_lo) / range, 0.0, 1.0);
  }
  return out;
}

namespace {

constexpr std::array<char, 8> kDumpMagic = {'R', 'F', 'V', 'Q', 'A', 'S', 'P', 'G'};

void put_u32(std::ostream& os, std::uint32_t v) {
  const std::array<unsigned char, 4> b = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b.data()), 4);
}

std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  is.read(reinterpret_cast<char*>(b.data()), 4);
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

}  // namespace

void write_spectrogram_dump(const SpectrogramMatrix& spec, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(kDumpMagic.data(), kDumpMagic.size());
  put_u32(os, static_cast<std::uint32_t>(spec.db.rows));
  put_u32(os, static_cast<std::uint32_t>(spec.db.cols));
  for (double v : spec.db.values) put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  if (!os) throw IoError("write failed for " + path.string());
}

SpectrogramMatrix read_spectrogram_dump(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingArtifact(path.string());
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kDumpMagic) throw ParseError(0, path.string() + ": not a spectrogram dump");
  SpectrogramMatrix out;
  out.db.rows = get_u32(is);
  out.db.cols = get_u32(is);
  out.db.values.resize(out.db.rows * out.db.cols);
  for (auto& v : out.db.values) v = std::bit_cast<float>(get_u32(is));
  if (!is) throw ParseError(0, path.string() + ": truncated spectrogram dump");
  out.floor_db = db_floor();
  return out;
}

}  // namespace rfvqa
