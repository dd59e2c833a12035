#include "rfvqa/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rfvqa/error.hpp"

namespace rfvqa {

namespace {
constexpr double kPi = std::numbers::pi;
}

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

Fft::Fft(std::size_t size) : size_(size), radix2_(is_power_of_two(size)) {
  if (size == 0) throw InvalidArgument("FFT size must be positive");
  const std::size_t count = radix2_ ? size / 2 : size;
  twiddles_.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double angle = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(size);
    twiddles_[k] = {std::cos(angle), std::sin(angle)};
  }
  if (radix2_) {
    bitrev_.resize(size);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < size) ++bits;
    for (std::size_t i = 0; i < size; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) {
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      }
      bitrev_[i] = r;
    }
  }
}

void Fft::transform(std::span<cf64> data, bool inverse) const {
  if (data.size() != size_) throw InvalidArgument("FFT input length does not match plan size");
  const std::size_t n = size_;
  if (!radix2_) {
    std::vector<cf64> out(n);
    for (std::size_t k = 0; k < n; ++k) {
      cf64 acc{0.0, 0.0};
      for (std::size_t m = 0; m < n; ++m) {
        cf64 w = twiddles_[(k * m) % n];
        if (inverse) w = std::conj(w);
        acc += data[m] * w;
      }
      out[k] = acc;
    }
    std::copy(out.begin(), out.end(), data.begin());
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        cf64 w = twiddles_[j * stride];
        if (inverse) w = std::conj(w);
        const cf64 u = data[start + j];
        const cf64 v = data[start + j + half] * w;
        data[start + j] = u + v;
        data[start + j + half] = u - v;
      }
    }
  }
}

std::vector<double> blackman_window(std::size_t length) {
  std::vector<double> w(length);
  const double n = static_cast<double>(length);
  for (std::size_t i = 0; i < length; ++i) {
    const double x = static_cast<double>(i) / n;
    w[i] = 0.42 - 0.5 * std::cos(2.0 * kPi * x) + 0.08 * std::cos(4.0 * kPi * x);
  }
  return w;
}

std::vector<double> rrc_taps(double rolloff, int sps, int span_symbols) {
  if (sps < 1 || span_symbols < 1 || rolloff <= 0.0 || rolloff > 1.0) {
    throw InvalidArgument("rrc_taps: invalid pulse parameters");
  }
  const int length = span_symbols * sps + 1;
  const int mid = length / 2;
  std::vector<double> h(static_cast<std::size_t>(length));
  const double b = rolloff;
  for (int i = 0; i < length; ++i) {
    const double t = static_cast<double>(i - mid) / sps;  // in symbol periods
    double v;
    if (i == mid) {
      v = 1.0 - b + 4.0 * b / kPi;
    } else if (std::abs(std::abs(t) - 1.0 / (4.0 * b)) < 1e-12) {
      v = (b / std::sqrt(2.0)) * ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * b)) +
                                  (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * b)));
    } else {
      const double num = std::sin(kPi * t * (1.0 - b)) + 4.0 * b * t * std::cos(kPi * t * (1.0 + b));
      const double den = kPi * t * (1.0 - (4.0 * b * t) * (4.0 * b * t));
      v = num / den;
    }
    h[static_cast<std::size_t>(i)] = v;
  }
  const double energy = std::inner_product(h.begin(), h.end(), h.begin(), 0.0);
  const double scale = 1.0 / std::sqrt(energy);
  for (auto& v : h) v *= scale;
  return h;
}

std::vector<double> gaussian_frequency_pulse(double bt, int sps, int span_symbols) {
  if (sps < 1 || span_symbols < 1 || bt <= 0.0) {
    throw InvalidArgument("gaussian_frequency_pulse: invalid parameters");
  }
  // Gaussian impulse response h(t) = exp(-2 pi^2 BT^2 t^2 / ln 2), t in symbols.
  const int glen = span_symbols * sps + 1;
  const int gmid = glen / 2;
  std::vector<double> gauss(static_cast<std::size_t>(glen));
  const double k = 2.0 * kPi * kPi * bt * bt / std::numbers::ln2;
  for (int i = 0; i < glen; ++i) {
    const double t = static_cast<double>(i - gmid) / sps;
    gauss[static_cast<std::size_t>(i)] = std::exp(-k * t * t);
  }
  const std::vector<double> rect(static_cast<std::size_t>(sps), 1.0);
  std::vector<double> pulse = convolve(rect, gauss);
  const double sum = std::accumulate(pulse.begin(), pulse.end(), 0.0);
  for (auto& v : pulse) v *= static_cast<double>(sps) / sum;
  return pulse;
}

std::vector<double> lowpass_taps(double cutoff, std::size_t length) {
  if (cutoff <= 0.0 || cutoff >= 0.5 || length < 3) {
    throw InvalidArgument("lowpass_taps: cutoff must be in (0, 0.5) and length >= 3");
  }
  std::vector<double> h(length);
  const double mid = static_cast<double>(length - 1) / 2.0;
  const double denom = static_cast<double>(length - 1);
  for (std::size_t i = 0; i < length; ++i) {
    const double t = static_cast<double>(i) - mid;
    const double sinc = t == 0.0 ? 2.0 * cutoff : std::sin(2.0 * kPi * cutoff * t) / (kPi * t);
    const double x = static_cast<double>(i) / denom;
    const double w = 0.42 - 0.5 * std::cos(2.0 * kPi * x) + 0.08 * std::cos(4.0 * kPi * x);
    h[i] = sinc * w;
  }
  const double sum = std::accumulate(h.begin(), h.end(), 0.0);
  for (auto& v : h) v /= sum;
  return h;
}

namespace {
template <typename T, typename U>
std::vector<T> convolve_impl(std::span<const T> x, std::span<const U> h) {
  if (x.empty() || h.empty()) return {};
  std::vector<T> y(x.size() + h.size() - 1, T{});
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T xi = x[i];
    for (std::size_t j = 0; j < h.size(); ++j) y[i + j] += xi * h[j];
  }
  return y;
}
}  // namespace

std::vector<double> convolve(std::span<const double> x, std::span<const double> h) {
  return convolve_impl(x, h);
}

std::vector<cf64> convolve(std::span<const cf64> x, std::span<const cf64> h) {
  return convolve_impl(x, h);
}

std::vector<cf64> fast_convolve(std::span<const cf64> x, std::span<const cf64> h) {
  if (x.empty() || h.empty()) return {};
  const std::size_t block = next_power_of_two(std::max<std::size_t>(4 * h.size(), 256));
  const std::size_t step = block - h.size() + 1;
  const Fft fft(block);
  std::vector<cf64> hf(block, cf64{});
  std::copy(h.begin(), h.end(), hf.begin());
  fft.forward(hf);
  std::vector<cf64> y(x.size() + h.size() - 1, cf64{});
  std::vector<cf64> buf(block);
  const double inv = 1.0 / static_cast<double>(block);
  for (std::size_t start = 0; start < x.size(); start += step) {
    const std::size_t len = std::min(step, x.size() - start);
    std::fill(buf.begin(), buf.end(), cf64{});
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(start),
              x.begin() + static_cast<std::ptrdiff_t>(start + len), buf.begin());
    fft.forward(buf);
    for (std::size_t k = 0; k < block; ++k) buf[k] *= hf[k];
    fft.inverse(buf);
    const std::size_t out_len = std::min(block, y.size() - start);
    for (std::size_t i = 0; i < out_len; ++i) y[start + i] += buf[i] * inv;
  }
  return y;
}

double mean_power(std::span<const cf64> x) noexcept {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& v : x) acc += std::norm(v);
  return acc / static_cast<double>(x.size());
}

}  // namespace rfvqa
