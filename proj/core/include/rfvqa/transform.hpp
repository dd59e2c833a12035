#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rfvqa/dsp.hpp"
#include "rfvqa/modem.hpp"

namespace rfvqa {

struct SegmentationConfig {
  double hysteresis_eps = 0.0;
  int p_min = 20;
  int p_max = 25;

  void validate() const;
};

/// Rising crossings with hysteresis: every n >= 1 with r[n-1] <= eps and
/// r[n] > eps, ascending.
std::vector<std::size_t> zero_crossings(std::span<const double> real_series, double eps);

/// Real part of a complex sequence.
std::vector<double> real_part(std::span<const cf64> samples);

/// Contiguous IQ window holding exactly `period_count` crossing intervals.
///
/// For crossings c_j .. c_{j+P} the window is samples [c_j - 1, c_{j+P}],
/// so the first rising transition is visible inside the window and running
/// zero_crossings() on its real part yields P + 1 crossings.
struct IqSegment {
  std::vector<cf64> samples;
  std::size_t start_index = 0;
  int period_count = 0;
};

/// Draws P ~ U{p_min..p_max} and a uniformly random start crossing j from the
/// seed. Throws InsufficientCrossings when fewer than P + 1 crossings exist.
IqSegment extract_segment(const IqSignal& signal, const SegmentationConfig& cfg, std::uint64_t seed);

enum class WindowKind { Blackman };

struct StftConfig {
  std::size_t fft_size = 512;
  std::size_t hop = 256;
  WindowKind window = WindowKind::Blackman;
  bool centered = false;
  bool fft_shift = true;

  void validate() const;
  /// 1 + floor((n - K)/H), zero when n < K.
  std::size_t frame_count(std::size_t n) const noexcept;
  /// Samples needed for a square K x K spectrogram: K + (K - 1) H.
  std::size_t square_length() const noexcept { return fft_size + (fft_size - 1) * hop; }
};

/// Magnitude floor: |S| + 1e-12 before the log, i.e. -240 dB.
inline constexpr double kDbEpsilon = 1e-12;
double db_floor();

/// Dense row-major matrix; row = shifted frequency bin, column = frame.
template <typename T>
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> values;

  T& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  const T& at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Complex STFT, S[k,t] = sum_n x[n] w[n - tH] exp(-j 2 pi k n / K), with the
/// absolute sample index n in the kernel. Rows are FFT-shifted: row r holds
/// bin (r - floor(K/2)) mod K, so row 0 is -0.5 cycles/sample for even K.
Grid<cf64> stft_complex(std::span<const cf64> x, const StftConfig& cfg);

struct SpectrogramMatrix {
  Grid<double> db;  // K x T
  bool freq_axis_shifted = true;
  double floor_db = -240.0;

  std::size_t fft_size() const noexcept { return db.rows; }
  std::size_t frames() const noexcept { return db.cols; }
};

/// 20 log10(|S| + 1e-12) of stft_complex().
SpectrogramMatrix stft(std::span<const cf64> x, const StftConfig& cfg);

/// Linear-interpolated percentile (numpy "linear" rule), pct in [0, 100].
double percentile(std::vector<double> values, double pct);

/// Values in [0, 1] after robust per-image scaling.
using NormalizedMatrix = Grid<double>;

/// Clips to the [lo_pct, hi_pct] percentiles and maps affinely onto [0, 1].
/// A constant matrix (p_lo == p_hi) maps to all zeros.
NormalizedMatrix normalize_db(const SpectrogramMatrix& spec, double lo_pct = 2.0, double hi_pct = 98.0);

/// Debug dump: 8-byte magic "RFVQASPG", u32 K, u32 T (little endian),
/// then K*T float32 values row-major.
void write_spectrogram_dump(const SpectrogramMatrix& spec, const std::filesystem::path& path);
SpectrogramMatrix read_spectrogram_dump(const std::filesystem::path& path);

}  // namespace rfvqa
