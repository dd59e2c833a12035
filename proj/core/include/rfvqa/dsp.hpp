#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace rfvqa {

using cf64 = std::complex<double>;

/// In-place DFT of a fixed size.
///
/// Forward: X[k] = sum_n x[n] exp(-j 2 pi k n / N), no scaling.
/// Inverse: x[n] = sum_k X[k] exp(+j 2 pi k n / N), no scaling.
/// Power-of-two sizes use an iterative radix-2 kernel with precomputed
/// twiddles; other sizes fall back to a direct O(N^2) transform.
class Fft {
 public:
  explicit Fft(std::size_t size);

  std::size_t size() const noexcept { return size_; }
  void forward(std::span<cf64> data) const { transform(data, false); }
  void inverse(std::span<cf64> data) const { transform(data, true); }

 private:
  void transform(std::span<cf64> data, bool inverse) const;

  std::size_t size_;
  bool radix2_;
  std::vector<cf64> twiddles_;  // exp(-j 2 pi k / N), k < N/2 (all N for direct)
  std::vector<std::size_t> bitrev_;
};

bool is_power_of_two(std::size_t n) noexcept;
std::size_t next_power_of_two(std::size_t n) noexcept;

/// Periodic Blackman window (the DFT-even form used for spectral analysis).
std::vector<double> blackman_window(std::size_t length);

/// Unit-energy root-raised-cosine taps spanning `span_symbols` symbols,
/// length span_symbols * sps + 1, centred on the middle tap.
std::vector<double> rrc_taps(double rolloff, int sps, int span_symbols);

/// Gaussian-smoothed rectangular frequency pulse for GFSK/GMSK.
/// Length (span_symbols + 1) * sps taps normalised to sum to sps.
std::vector<double> gaussian_frequency_pulse(double bt, int sps, int span_symbols);

/// Blackman-windowed sinc lowpass with unit DC gain. `cutoff` is in
/// cycles/sample (0, 0.5); `length` should be odd.
std::vector<double> lowpass_taps(double cutoff, std::size_t length);

/// Full linear convolution, length x.size() + h.size() - 1.
std::vector<double> convolve(std::span<const double> x, std::span<const double> h);
std::vector<cf64> convolve(std::span<const cf64> x, std::span<const cf64> h);

/// Full convolution via FFT overlap-add; same result as convolve() to
/// rounding, faster for long filters.
std::vector<cf64> fast_convolve(std::span<const cf64> x, std::span<const cf64> h);

/// Mean of |x|^2. Zero for an empty span.
double mean_power(std::span<const cf64> x) noexcept;

}  // namespace rfvqa
