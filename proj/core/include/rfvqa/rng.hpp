#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace rfvqa {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives a child seed from a parent seed and a stream index. Used for the
/// per-record seed chain: record_seed = derive_seed(master_seed, record_index).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept;

/// Seeded generator with platform-independent output.
///
/// std::mt19937_64 is bit-specified by the standard, but the standard
/// distributions are not, so integer, uniform, and normal draws are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  /// Standard normal (Box-Muller, second variate cached).
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rfvqa
