#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfvqa/dsp.hpp"

namespace rfvqa {

enum class Family {
  OFDM,
  QAM,
  PSK,
  ASK,
  FSK,
  GFSK,
  MSK,
  GMSK,
  AM,
  ChirpLFM,
  FM,
  OOK,
  Tone,
};

inline constexpr std::size_t kFamilyCount = 13;
inline constexpr std::size_t kClassCount = 57;

/// Display name used in reports ("OFDM", ..., "Chirp/LFM", "FM", "OOK", "Tone").
std::string_view family_name(Family family);
Family parse_family(std::string_view name);
std::span<const Family> all_families();

struct ModulationClass {
  std::string canonical_name;
  Family family;
  std::optional<int> order;  // constellation size, tone count, or subcarrier count

  bool operator==(const ModulationClass&) const = default;
};

/// All 57 classes, family-major (OFDM, QAM, PSK, ASK, FSK, GFSK, MSK, GMSK,
/// AM, Chirp/LFM, FM, OOK, Tone), ascending order parameter within a family.
const std::vector<ModulationClass>& list_classes();

/// Throws InvalidArgument for names outside the taxonomy.
const ModulationClass& parse_class(std::string_view name);
std::string format_class(const ModulationClass& cls);
/// Position in list_classes().
std::size_t class_index(std::string_view name);

struct SynthesisParams {
  std::size_t num_samples = 512 + 511 * 256;
  double sample_rate = 1.0;
  int samples_per_symbol = 8;
  double carrier_offset = 0.0;    // cycles/sample, [-0.5, 0.5)
  double excess_bandwidth = 0.35;  // RRC roll-off
  std::uint64_t seed = 0;
  /// Overrides the per-class OFDM IFFT size (and hence subcarrier spacing).
  std::optional<std::size_t> ofdm_fft_size;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct IqSignal {
  std::vector<cf64> samples;
  double sample_rate = 1.0;
  ModulationClass label;
  std::optional<double> snr_db;  // nullopt = noiseless
};

/// Deterministic, unit-power, noiseless waveform of exactly num_samples samples.
///
/// Waveform laws per family:
///  - PSK/QAM/ASK/OOK: i.i.d. uniform symbols, RRC shaping (span 10 symbols).
///    ASK is real bipolar PAM; OOK is unipolar {0, 1}; cross QAM removes the
///    four corner squares of side s/6 from an s x s grid.
///  - FSK/GFSK: CPFSK, h = 1, levels a in {+-1, +-3, ..., +-(M-1)}; symbol
///    length is raised to max(sps, 2M) so the outer tones stay inside the band.
///    GFSK smooths the frequency pulse with a Gaussian (BT 0.35, span 4).
///  - MSK/GMSK: CPM with h = 0.5/(M-1): instantaneous frequency
///    f[n] = h/(2 sps) * sum_k a_k g[n - k sps], where g sums to sps, so each
///    symbol advances the phase by pi h a_k. GMSK uses the Gaussian pulse.
///  - OFDM-M: QPSK on M contiguous bins centred on DC, IFFT size
///    next_pow2(1.25 M) unless overridden, cyclic prefix of a quarter symbol.
///  - AM: message is Gaussian noise lowpassed to 0.025 cycles/sample, peak 1.
///    dsb: 1 + 0.8 m; dsb-sc: m; usb: analytic message; lsb: its conjugate.
///  - FM: deviation 0.125 cycles/sample (ratio 5) driven by the same message.
///  - lfm-radar: 4096-sample sweeps over [-0.125, 0.125) at 50% duty cycle.
///  - lfm-data: binary up/down chirps, 32 sps samples each, 0.25 bandwidth.
///  - chirp-ss: 128-ary cyclically shifted chirps, 512 samples, 0.25 bandwidth.
///  - tone: complex exponential at a seeded frequency in [0.02, 0.1).
IqSignal synthesize(const ModulationClass& cls, const SynthesisParams& params);

/// Circularly symmetric AWGN with per-sample variance P_signal / 10^(snr/10).
/// snr_db = +infinity returns the input unchanged. Throws on zero power.
IqSignal add_awgn(const IqSignal& signal, double snr_db, std::uint64_t seed);

/// Unit-average-energy constellation for a linear class (PSK, QAM, ASK, OOK).
std::vector<cf64> constellation(const ModulationClass& cls);

}  // namespace rfvqa
