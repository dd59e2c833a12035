#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "oracles.hpp"
#include "rfvqa/dsp.hpp"
#include "rfvqa/rng.hpp"

namespace rfvqa {
namespace {

std::vector<cf64> random_signal(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<cf64> x(n);
  for (auto& v : x) v = {rng.normal(), rng.normal()};
  return x;
}

double max_abs_diff(std::span<const cf64> a, std::span<const cf64> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TEST(Rng, DeterministicAndBounded) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(Rng(42).next(), c.next());
  Rng r(1);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ++hist[r.below(7)];
    const auto v = r.between(-2, 2);
    ASSERT_GE(v, -2);
    ASSERT_LE(v, 2);
  }
  for (int h : hist) EXPECT_NEAR(h, 10000, 400);
}

TEST(Rng, NormalMoments) {
  Rng r(7);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = r.normal();
    s += v;
    s2 += v * v;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
}

TEST(Rng, ShuffleIsPermutation) {
  Rng r(3);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  r.shuffle(std::span(v));
  EXPECT_EQ(std::set<int>(v.begin(), v.end()).size(), 50u);
  EXPECT_NE(v[0] + v[1] * 100, 100);  // moved
}

TEST(Rng, DeriveSeedSpreads) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t p = 0; p < 30; ++p) {
    for (std::uint64_t i = 0; i < 30; ++i) seen.insert(derive_seed(p, i));
  }
  EXPECT_EQ(seen.size(), 900u);
  EXPECT_EQ(derive_seed(5, 6), derive_seed(5, 6));
}

TEST(Fft, MatchesNaiveDft) {
  for (std::size_t n : {1u, 2u, 4u, 8u, 64u, 512u, 1024u, 3u, 12u, 100u}) {
    const auto x = random_signal(n, n);
    auto y = x;
    Fft(n).forward(y);
    const auto ref = oracle::naive_dft(x);
    double scale = 0.0;
    for (const auto& v : ref) scale = std::max(scale, std::abs(v));
    EXPECT_LT(max_abs_diff(y, ref), 1e-11 * std::max(1.0, scale)) << n;
    Fft(n).inverse(y);
    for (auto& v : y) v /= static_cast<double>(n);
    EXPECT_LT(max_abs_diff(y, x), 1e-12) << n;
  }
  std::vector<cf64> wrong(8);
  EXPECT_THROW(Fft(16).forward(wrong), std::exception);
}

TEST(Fft, PowerOfTwoHelpers) {
  EXPECT_TRUE(is_power_of_two(1));
  EXPECT_TRUE(is_power_of_two(512));
  EXPECT_FALSE(is_power_of_two(0));
  EXPECT_FALSE(is_power_of_two(600));
  EXPECT_EQ(next_power_of_two(600), 1024u);
  EXPECT_EQ(next_power_of_two(512), 512u);
  EXPECT_EQ(next_power_of_two(1), 1u);
}

TEST(Dsp, BlackmanMatchesFormula) {
  for (std::size_t k : {16u, 64u, 512u}) {
    const auto w = blackman_window(k);
    const auto ref = oracle::blackman_periodic(k);
    ASSERT_EQ(w.size(), k);
    for (std::size_t i = 0; i < k; ++i) EXPECT_NEAR(w[i], ref[i], 1e-15);
  }
}

TEST(Dsp, RrcMatchesClosedForm) {
  for (double beta : {0.35, 0.25, 0.5}) {
    for (int sps : {4, 8}) {
      const auto t = rrc_taps(beta, sps, 10);
      const auto ref = oracle::rrc_closed_form(beta, sps, 10);
      ASSERT_EQ(t.size(), ref.size());
      for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(t[i], ref[i], 1e-12) << beta << " " << sps << " " << i;
    }
  }
}

TEST(Dsp, RrcIsNyquistWhenSquared) {
  // RRC * RRC is a raised cosine: zero crossings at multiples of sps.
  const int sps = 8;
  const auto t = rrc_taps(0.35, sps, 20);
  const auto rc = convolve(std::span<const double>(t), std::span<const double>(t));
  const std::size_t mid = rc.size() / 2;
  for (int k = 1; k <= 6; ++k) EXPECT_NEAR(rc[mid + k * sps] / rc[mid], 0.0, 5e-3) << k;
}

TEST(Dsp, ConvolveAgreesWithFastConvolve) {
  for (auto [nx, nh] : {std::pair{1000u, 81u}, {37u, 5u}, {5u, 300u}, {4096u, 1025u}}) {
    const auto x = random_signal(nx, nx);
    const auto h = random_signal(nh, nh + 1);
    const auto slow = convolve(std::span<const cf64>(x), std::span<const cf64>(h));
    const auto fast = fast_convolve(x, h);
    ASSERT_EQ(slow.size(), nx + nh - 1);
    ASSERT_EQ(fast.size(), slow.size());
    EXPECT_LT(max_abs_diff(slow, fast), 1e-9);
  }
  std::vector<double> a{1, 2, 3}, b{0, 1};
  EXPECT_EQ(convolve(std::span<const double>(a), std::span<const double>(b)), (std::vector<double>{0, 1, 2, 3}));
}

TEST(Dsp, LowpassUnitDcGain) {
  const auto t = lowpass_taps(0.025, 257);
  double s = 0;
  for (double v : t) s += v;
  EXPECT_NEAR(s, 1.0, 1e-12);
  // Far stopband is strongly attenuated.
  cf64 acc = 0;
  for (std::size_t n = 0; n < t.size(); ++n) acc += t[n] * std::polar(1.0, -2 * std::numbers::pi * 0.2 * double(n));
  EXPECT_LT(std::abs(acc), 1e-3);
}

TEST(Dsp, GaussianPulseSumsToSps) {
  const auto g = gaussian_frequency_pulse(0.3, 8, 4);
  EXPECT_EQ(g.size(), 40u);
  double s = 0;
  for (double v : g) {
    s += v;
    EXPECT_GE(v, 0.0);
  }
  EXPECT_NEAR(s, 8.0, 1e-12);
}

TEST(Dsp, MeanPower) {
  const auto x = random_signal(4096, 1);
  EXPECT_NEAR(mean_power(x), oracle::mean_power(x), 1e-12);
  EXPECT_EQ(mean_power(std::span<const cf64>{}), 0.0);
}

}  // namespace
}  // namespace rfvqa
