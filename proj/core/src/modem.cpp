#include "rfvqa/modem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "rfvqa/error.hpp"
#include "rfvqa/rng.hpp"

namespace rfvqa {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr int kRrcSpanSymbols = 10;
constexpr double kGaussianBt = 0.35;
constexpr int kGaussianSpanSymbols = 4;
constexpr double kFskModIndex = 1.0;
constexpr double kMskModIndex = 0.5;
constexpr double kMessageCutoff = 0.025;  // 5% of Nyquist
constexpr std::size_t kMessageTaps = 257;
constexpr std::size_t kSsbTaps = 1025;
constexpr double kAmIndex = 0.8;
constexpr double kFmDeviation = 5.0 * kMessageCutoff;
constexpr double kChirpBandwidth = 0.25;  // 50% of Nyquist
constexpr std::size_t kRadarPulse = 4096;
constexpr std::size_t kRadarPeriod = 2 * kRadarPulse;
constexpr int kChirpSsSpreading = 128;

constexpr std::array<Family, kFamilyCount> kFamilies = {
    Family::OFDM, Family::QAM, Family::PSK, Family::ASK,      Family::FSK, Family::GFSK, Family::MSK,
    Family::GMSK, Family::AM,  Family::ChirpLFM, Family::FM, Family::OOK, Family::Tone};

std::vector<ModulationClass> build_taxonomy() {
  std::vector<ModulationClass> out;
  out.reserve(kClassCount);
  for (int m : {64, 72, 128, 180, 256, 300, 512, 600, 900, 1024, 1200, 2048}) {
    out.push_back({"ofdm-" + std::to_string(m), Family::OFDM, m});
  }
  out.push_back({"16qam", Family::QAM, 16});
  out.push_back({"32qam", Family::QAM, 32});
  out.push_back({"32qam-cross", Family::QAM, 32});
  out.push_back({"64qam", Family::QAM, 64});
  out.push_back({"128qam-cross", Family::QAM, 128});
  out.push_back({"256qam", Family::QAM, 256});
  out.push_back({"512qam-cross", Family::QAM, 512});
  out.push_back({"1024qam", Family::QAM, 1024});
  out.push_back({"bpsk", Family::PSK, 2});
  out.push_back({"qpsk", Family::PSK, 4});
  for (int m : {8, 16, 32, 64}) out.push_back({std::to_string(m) + "psk", Family::PSK, m});
  for (int m : {4, 8, 16, 32, 64}) out.push_back({std::to_string(m) + "ask", Family::ASK, m});
  for (int m : {2, 4, 8, 16}) out.push_back({std::to_string(m) + "fsk", Family::FSK, m});
  for (int m : {2, 4, 8, 16}) out.push_back({std::to_string(m) + "gfsk", Family::GFSK, m});
  for (int m : {2, 4, 8, 16}) out.push_back({std::to_string(m) + "msk", Family::MSK, m});
  for (int m : {2, 4, 8, 16}) out.push_back({std::to_string(m) + "gmsk", Family::GMSK, m});
  for (const char* n : {"am-dsb", "am-dsb-sc", "am-usb", "am-lsb"}) {
    out.push_back({n, Family::AM, std::nullopt});
  }
  for (const char* n : {"lfm-data", "lfm-radar", "chirp-ss"}) {
    out.push_back({n, Family::ChirpLFM, std::nullopt});
  }
  out.push_back({"fm", Family::FM, std::nullopt});
  out.push_back({"ook", Family::OOK, 2});
  out.push_back({"tone", Family::Tone, std::nullopt});
  return out;
}

const std::unordered_map<std::string, std::size_t>& name_index() {
  static const auto index = [] {
    std::unordered_map<std::string, std::size_t> m;
    const auto& classes = list_classes();
    for (std::size_t i = 0; i < classes.size(); ++i) m.emplace(classes[i].canonical_name, i);
    return m;
  }();
  return index;
}

// Symbol shaping by sparse upsample-and-filter. Output sample n sits at
// filter-output index n + delay.
std::vector<cf64> shape_symbols(std::span<const cf64> symbols, std::span<const double> taps, int sps,
                                std::size_t delay, std::size_t count) {
  std::vector<cf64> out(count);
  const auto tap_count = static_cast<std::int64_t>(taps.size());
  for (std::size_t n = 0; n < count; ++n) {
    const auto m = static_cast<std::int64_t>(n + delay);
    // symbols k with 0 <= m - k*sps < tap_count
    std::int64_t k_hi = m / sps;
    std::int64_t k_lo = (m - tap_count + sps) / sps;
    if (k_lo < 0) k_lo = 0;
    if (k_hi >= static_cast<std::int64_t>(symbols.size())) {
      k_hi = static_cast<std::int64_t>(symbols.size()) - 1;
    }
    cf64 acc{0.0, 0.0};
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
      const std::int64_t t = m - k * sps;
      if (t >= 0 && t < tap_count) acc += symbols[static_cast<std::size_t>(k)] * taps[static_cast<std::size_t>(t)];
    }
    out[n] = acc;
  }
  return out;
}

std::vector<cf64> synth_linear(const ModulationClass& cls, const SynthesisParams& p, Rng& rng) {
  const auto table = constellation(cls);
  const int sps = p.samples_per_symbol;
  const auto taps = rrc_taps(p.excess_bandwidth, sps, kRrcSpanSymbols);
  const std::size_t delay = static_cast<std::size_t>(kRrcSpanSymbols * sps);
  const std::size_t nsym = (p.num_samples + delay) / static_cast<std::size_t>(sps) + kRrcSpanSymbols + 2;
  std::vector<cf64> symbols(nsym);
  for (auto& s : symbols) s = table[rng.below(table.size())];
  return shape_symbols(symbols, taps, sps, delay, p.num_samples);
}

// Continuous-phase modulation from an instantaneous-frequency sequence.
std::vector<cf64> cpm_waveform(int order, double mod_index, int sps, bool gaussian, std::size_t count,
                               Rng& rng) {
  std::vector<double> pulse;
  if (gaussian) {
    pulse = gaussian_frequency_pulse(kGaussianBt, sps, kGaussianSpanSymbols);
  } else {
    pulse.assign(static_cast<std::size_t>(sps), 1.0);
  }
  const std::size_t delay = pulse.size();
  const std::size_t nsym = (count + delay) / static_cast<std::size_t>(sps) + 2;
  std::vector<cf64> levels(nsym);
  for (auto& a : levels) {
    a = static_cast<double>(2 * static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(order))) -
                            (order - 1));
  }
  const auto freq = shape_symbols(levels, pulse, sps, delay, count);
  const double scale = mod_index / (2.0 * sps);
  double phase = rng.uniform(0.0, kTwoPi);
  std::vector<cf64> out(count);
  for (std::size_t n = 0; n < count; ++n) {
    phase += kTwoPi * scale * freq[n].real();
    phase = std::remainder(phase, kTwoPi);
    out[n] = std::polar(1.0, phase);
  }
  return out;
}

std::vector<cf64> synth_ofdm(const ModulationClass& cls, const SynthesisParams& p, Rng& rng) {
  const auto m = static_cast<std::size_t>(*cls.order);
  const std::size_t nfft = p.ofdm_fft_size ? *p.ofdm_fft_size : next_power_of_two((m * 5 + 3) / 4);
  if (nfft < m) throw InvalidArgument("OFDM IFFT size smaller than subcarrier count for " + cls.canonical_name);
  const std::size_t cp = nfft / 4;
  const std::size_t symbol_len = nfft + cp;
  if (p.num_samples < symbol_len) {
    throw InvalidArgument(cls.canonical_name + ": num_samples " + std::to_string(p.num_samples) +
                          " is shorter than one OFDM symbol (" + std::to_string(symbol_len) + ")");
  }
  const std::size_t start = static_cast<std::size_t>(rng.below(symbol_len));
  const std::size_t nsym = (start + p.num_samples + symbol_len - 1) / symbol_len;
  const Fft fft(nfft);
  const double a = 1.0 / std::sqrt(2.0);
  std::vector<cf64> stream;
  stream.reserve(nsym * symbol_len);
  std::vector<cf64> bins(nfft);
  const auto half = static_cast<std::int64_t>(m / 2);
  for (std::size_t s = 0; s < nsym; ++s) {
    std::fill(bins.begin(), bins.end(), cf64{});
    for (std::int64_t k = -half; k < static_cast<std::int64_t>(m) - half; ++k) {
      const auto bin = static_cast<std::size_t>((k + static_cast<std::int64_t>(nfft)) % static_cast<std::int64_t>(nfft));
      const std::uint64_t q = rng.below(4);
      bins[bin] = {(q & 1) ? -a : a, (q & 2) ? -a : a};
    }
    fft.inverse(bins);
    stream.insert(stream.end(), bins.end() - static_cast<std::ptrdiff_t>(cp), bins.end());
    stream.insert(stream.end(), bins.begin(), bins.end());
  }
  return {stream.begin() + static_cast<std::ptrdiff_t>(start),
          stream.begin() + static_cast<std::ptrdiff_t>(start + p.num_samples)};
}

// Valid-mode FIR filtering of fresh noise: output n sees noise[n .. n + taps).
std::vector<cf64> filtered_noise(std::size_t count, std::span<const cf64> taps, bool complex_noise, Rng& rng) {
  std::vector<cf64> noise(count + taps.size() - 1);
  for (auto& v : noise) {
    const double re = rng.normal();
    v = complex_noise ? cf64{re, rng.normal()} : cf64{re, 0.0};
  }
  auto full = fast_convolve(noise, taps);
  std::vector<cf64> out(full.begin() + static_cast<std::ptrdiff_t>(taps.size() - 1),
                        full.begin() + static_cast<std::ptrdiff_t>(taps.size() - 1 + count));
  double peak = 0.0;
  for (const auto& v : out) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (auto& v : out) v /= peak;
  }
  return out;
}

std::vector<double> message_signal(std::size_t count, Rng& rng) {
  const auto proto = lowpass_taps(kMessageCutoff, kMessageTaps);
  const std::vector<cf64> taps(proto.begin(), proto.end());
  const auto filtered = filtered_noise(count, taps, false, rng);
  std::vector<double> msg(count);
  for (std::size_t n = 0; n < count; ++n) msg[n] = filtered[n].real();
  return msg;
}

// Analytic (upper-sideband) band-limited message: complex noise through a
// complex bandpass covering [0.002, 0.025] cycles/sample.
std::vector<cf64> analytic_message(std::size_t count, Rng& rng) {
  constexpr double lo = 0.002;
  const double centre = 0.5 * (lo + kMessageCutoff);
  const double half_width = 0.5 * (kMessageCutoff - lo);
  const auto proto = lowpass_taps(half_width, kSsbTaps);
  const double mid = static_cast<double>(kSsbTaps - 1) / 2.0;
  std::vector<cf64> taps(kSsbTaps);
  for (std::size_t i = 0; i < kSsbTaps; ++i) {
    taps[i] = proto[i] * std::polar(1.0, kTwoPi * centre * (static_cast<double>(i) - mid));
  }
  return filtered_noise(count, taps, true, rng);
}

std::vector<cf64> synth_am(const ModulationClass& cls, const SynthesisParams& p, Rng& rng) {
  const auto& name = cls.canonical_name;
  std::vector<cf64> out(p.num_samples);
  if (name == "am-usb" || name == "am-lsb") {
    out = analytic_message(p.num_samples, rng);
    if (name == "am-lsb") {
      for (auto& v : out) v = std::conj(v);
    }
    return out;
  }
  const auto msg = message_signal(p.num_samples, rng);
  const bool with_carrier = name == "am-dsb";
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = with_carrier ? 1.0 + kAmIndex * msg[n] : msg[n];
  }
  return out;
}

std::vector<cf64> synth_fm(const SynthesisParams& p, Rng& rng) {
  const auto msg = message_signal(p.num_samples, rng);
  double phase = rng.uniform(0.0, kTwoPi);
  std::vector<cf64> out(p.num_samples);
  for (std::size_t n = 0; n < out.size(); ++n) {
    phase = std::remainder(phase + kTwoPi * kFmDeviation * msg[n], kTwoPi);
    out[n] = std::polar(1.0, phase);
  }
  return out;
}

// Phase-continuous chirp stream driven by a per-sample frequency law.
template <typename FreqLaw>
std::vector<cf64> chirp_stream(std::size_t count, double phase, FreqLaw&& freq_at) {
  std::vector<cf64> out(count);
  for (std::size_t n = 0; n < count; ++n) {
    out[n] = std::polar(1.0, phase);
    phase = std::remainder(phase + kTwoPi * freq_at(n), kTwoPi);
  }
  return out;
}

std::vector<cf64> synth_chirp(const ModulationClass& cls, const SynthesisParams& p, Rng& rng) {
  const auto& name = cls.canonical_name;
  const double b = kChirpBandwidth;
  const double phase0 = rng.uniform(0.0, kTwoPi);
  if (name == "lfm-radar") {
    // Start inside the first half of a pulse so every window carries energy.
    const std::size_t offset = static_cast<std::size_t>(rng.below(kRadarPulse / 2));
    auto out = chirp_stream(p.num_samples, phase0, [&](std::size_t n) {
      const std::size_t pos = (n + offset) % kRadarPeriod;
      return -b / 2.0 + b * static_cast<double>(pos) / static_cast<double>(kRadarPulse);
    });
    for (std::size_t n = 0; n < out.size(); ++n) {
      if ((n + offset) % kRadarPeriod >= kRadarPulse) out[n] = {};
    }
    return out;
  }
  if (name == "lfm-data") {
    const std::size_t len = 32 * static_cast<std::size_t>(p.samples_per_symbol);
    const std::size_t nsym = p.num_samples / len + 1;
    std::vector<bool> up(nsym);
    for (std::size_t i = 0; i < nsym; ++i) up[i] = rng.below(2) == 1;
    return chirp_stream(p.num_samples, phase0, [&](std::size_t n) {
      const double frac = static_cast<double>(n % len) / static_cast<double>(len);
      const double f = -b / 2.0 + b * frac;
      return up[n / len] ? f : -f;
    });
  }
  // chirp-ss
  const std::size_t len = static_cast<std::size_t>(kChirpSsSpreading / b);
  const std::size_t nsym = p.num_samples / len + 1;
  std::vector<double> shift(nsym);
  for (auto& s : shift) {
    s = static_cast<double>(rng.below(kChirpSsSpreading)) / kChirpSsSpreading;
  }
  return chirp_stream(p.num_samples, phase0, [&](std::size_t n) {
    const double frac = static_cast<double>(n % len) / static_cast<double>(len);
    const double pos = frac + shift[n / len];
    return -b / 2.0 + b * (pos - std::floor(pos));
  });
}

std::vector<cf64> synth_tone(const SynthesisParams& p, Rng& rng) {
  const double f = rng.uniform(0.02, 0.1);
  const double phase0 = rng.uniform(0.0, kTwoPi);
  std::vector<cf64> out(p.num_samples);
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = std::polar(1.0, phase0 + kTwoPi * std::fmod(f * static_cast<double>(n), 1.0));
  }
  return out;
}

int min_samples(const ModulationClass& cls, const SynthesisParams& p) {
  switch (cls.family) {
    case Family::FSK:
    case Family::GFSK:
      return std::max(p.samples_per_symbol, 2 * *cls.order);
    default:
      return p.samples_per_symbol;
  }
}

}  // namespace

std::string_view family_name(Family family) {
  switch (family) {
    case Family::OFDM: return "OFDM";
    case Family::QAM: return "QAM";
    case Family::PSK: return "PSK";
    case Family::ASK: return "ASK";
    case Family::FSK: return "FSK";
    case Family::GFSK: return "GFSK";
    case Family::MSK: return "MSK";
    case Family::GMSK: return "GMSK";
    case Family::AM: return "AM";
    case Family::ChirpLFM: return "Chirp/LFM";
    case Family::FM: return "FM";
    case Family::OOK: return "OOK";
    case Family::Tone: return "Tone";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  for (Family f : kFamilies) {
    if (family_name(f) == name) return f;
  }
  throw InvalidArgument("unknown modulation family '" + std::string(name) + "'");
}

std::span<const Family> all_families() { return kFamilies; }

const std::vector<ModulationClass>& list_classes() {
  static const std::vector<ModulationClass> classes = build_taxonomy();
  return classes;
}

const ModulationClass& parse_class(std::string_view name) {
  return list_classes()[class_index(name)];
}

std::string format_class(const ModulationClass& cls) { return cls.canonical_name; }

std::size_t class_index(std::string_view name) {
  const auto& idx = name_index();
  auto it = idx.find(std::string(name));
  if (it == idx.end()) throw InvalidArgument("unknown modulation class '" + std::string(name) + "'");
  return it->second;
}

void SynthesisParams::validate() const {
  if (num_samples == 0) throw InvalidArgument("num_samples must be positive");
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) throw InvalidArgument("sample_rate must be positive");
  if (samples_per_symbol < 2) throw InvalidArgument("samples_per_symbol must be >= 2");
  if (!(carrier_offset >= -0.5 && carrier_offset < 0.5)) {
    throw InvalidArgument("carrier_offset must lie in [-0.5, 0.5)");
  }
  if (!(excess_bandwidth > 0.0 && excess_bandwidth <= 1.0)) {
    throw InvalidArgument("excess_bandwidth must lie in (0, 1]");
  }
  if (ofdm_fft_size && *ofdm_fft_size == 0) throw InvalidArgument("ofdm_fft_size must be positive");
}

std::vector<cf64> constellation(const ModulationClass& cls) {
  std::vector<cf64> pts;
  const int m = cls.order.value_or(0);
  switch (cls.family) {
    case Family::PSK: {
      const double offset = m == 4 ? kPi / 4.0 : 0.0;
      for (int k = 0; k < m; ++k) pts.push_back(std::polar(1.0, offset + kTwoPi * k / m));
      break;
    }
    case Family::ASK:
      for (int k = 0; k < m; ++k) pts.emplace_back(2.0 * k - (m - 1), 0.0);
      break;
    case Family::OOK:
      pts = {cf64{0.0, 0.0}, cf64{1.0, 0.0}};
      break;
    case Family::QAM: {
      const bool cross = cls.canonical_name.ends_with("-cross");
      int cols = 0;
      int rows = 0;
      if (cross) {
        cols = rows = static_cast<int>(std::lround(std::sqrt(9.0 * m / 8.0)));
      } else {
        const int bits = static_cast<int>(std::lround(std::log2(m)));
        rows = 1 << (bits / 2);
        cols = m / rows;
      }
      const int corner = cross ? cols / 6 : 0;
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          const bool in_row_edge = r < corner || r >= rows - corner;
          const bool in_col_edge = c < corner || c >= cols - corner;
          if (in_row_edge && in_col_edge) continue;
          pts.emplace_back(2.0 * c - (cols - 1), 2.0 * r - (rows - 1));
        }
      }
      break;
    }
    default:
      throw InvalidArgument(cls.canonical_name + " is not a linear modulation");
  }
  if (static_cast<int>(pts.size()) != m) {
    throw InvalidArgument("constellation size mismatch for " + cls.canonical_name);
  }
  double energy = 0.0;
  for (const auto& s : pts) energy += std::norm(s);
  const double scale = 1.0 / std::sqrt(energy / static_cast<double>(pts.size()));
  for (auto& s : pts) s *= scale;
  return pts;
}

IqSignal synthesize(const ModulationClass& cls, const SynthesisParams& params) {
  params.validate();
  const auto& canonical = parse_class(cls.canonical_name);
  if (params.num_samples < static_cast<std::size_t>(min_samples(canonical, params))) {
    throw InvalidArgument(canonical.canonical_name + ": num_samples too small to hold one symbol");
  }
  Rng rng(derive_seed(params.seed, class_index(canonical.canonical_name)));
  std::vector<cf64> x;
  switch (canonical.family) {
    case Family::PSK:
    case Family::QAM:
    case Family::ASK:
    case Family::OOK:
      x = synth_linear(canonical, params, rng);
      break;
    case Family::FSK:
    case Family::GFSK:
      x = cpm_waveform(*canonical.order, kFskModIndex, min_samples(canonical, params),
                       canonical.family == Family::GFSK, params.num_samples, rng);
      break;
    case Family::MSK:
    case Family::GMSK:
      x = cpm_waveform(*canonical.order, kMskModIndex / (*canonical.order - 1), params.samples_per_symbol,
                       canonical.family == Family::GMSK, params.num_samples, rng);
      break;
    case Family::OFDM:
      x = synth_ofdm(canonical, params, rng);
      break;
    case Family::AM:
      x = synth_am(canonical, params, rng);
      break;
    case Family::FM:
      x = synth_fm(params, rng);
      break;
    case Family::ChirpLFM:
      x = synth_chirp(canonical, params, rng);
      break;
    case Family::Tone:
      x = synth_tone(params, rng);
      break;
  }
  if (params.carrier_offset != 0.0) {
    for (std::size_t n = 0; n < x.size(); ++n) {
      const double cycles = std::fmod(params.carrier_offset * static_cast<double>(n), 1.0);
      x[n] *= std::polar(1.0, kTwoPi * cycles);
    }
  }
  const double power = mean_power(x);
  if (!(power > 0.0) || !std::isfinite(power)) {
    throw InvalidArgument(canonical.canonical_name + ": synthesized waveform has no power");
  }
  const double scale = 1.0 / std::sqrt(power);
  for (auto& v : x) v *= scale;
  return IqSignal{std::move(x), params.sample_rate, canonical, std::nullopt};
}

IqSignal add_awgn(const IqSignal& signal, double snr_db, std::uint64_t seed) {
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
    throw InvalidArgument("snr_db must be finite or +infinity");
  }
  if (snr_db == std::numeric_limits<double>::infinity()) return signal;
  const double power = mean_power(signal.samples);
  if (!(power > 0.0)) throw InvalidArgument("add_awgn: input signal has zero power");
  const double variance = power / std::pow(10.0, snr_db / 10.0);
  const double sigma = std::sqrt(variance / 2.0);
  Rng rng(seed);
  IqSignal out = signal;
  for (auto& v : out.samples) {
    const double re = rng.normal();
    const double im = rng.normal();
    v += cf64{sigma * re, sigma * im};
  }
  out.snr_db = snr_db;
  return out;
}

}  // namespace rfvqa
