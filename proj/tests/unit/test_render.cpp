#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "oracles.hpp"
#include "rfvqa/error.hpp"
#include "rfvqa/render.hpp"
#include "rfvqa/rng.hpp"

namespace rfvqa {
namespace {

NormalizedMatrix filled(std::size_t rows, std::size_t cols, double v) { return {rows, cols, std::vector<double>(rows * cols, v)}; }

IqSegment segment_of(std::vector<cf64> s) {
  IqSegment seg;
  seg.samples = std::move(s);
  seg.period_count = 20;
  return seg;
}

std::set<std::tuple<int, int, int>> colors(const Image& img) {
  std::set<std::tuple<int, int, int>> out;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      const auto p = img.pixel(x, y);
      out.insert({p.r, p.g, p.b});
    }
  }
  return out;
}

TEST(Viridis, EndpointsMatchReferenceTable) {
  const auto lut = viridis();
  EXPECT_EQ(lut[0], (Rgb{68, 1, 84}));
  EXPECT_EQ(lut[255], (Rgb{253, 231, 37}));
  EXPECT_EQ(lut[128], (Rgb{33, 145, 140}));
}

TEST(RenderSpectrogram, ConstantMatricesUseLutEnds) {
  const auto zero = render_spectrogram(filled(8, 5, 0.0));
  const auto one = render_spectrogram(filled(8, 5, 1.0));
  EXPECT_EQ(zero.pixels.width, 5u);
  EXPECT_EQ(zero.pixels.height, 8u);
  for (std::size_t y = 0; y < 8; ++y) {
    for (std::size_t x = 0; x < 5; ++x) {
      EXPECT_EQ(zero.pixels.pixel(x, y), (Rgb{68, 1, 84}));
      EXPECT_EQ(one.pixels.pixel(x, y), (Rgb{253, 231, 37}));
    }
  }
}

TEST(RenderSpectrogram, OnePixelPerCellLowFrequencyAtBottom) {
  Rng rng(1);
  NormalizedMatrix m{512, 512, {}};
  for (std::size_t i = 0; i < 512 * 512; ++i) m.values.push_back(rng.uniform());
  const auto img = render_spectrogram(m);
  ASSERT_EQ(img.pixels.width, 512u);
  ASSERT_EQ(img.pixels.height, 512u);
  ASSERT_EQ(img.pixels.rgb.size(), 3u * 512 * 512);
  const auto lut = viridis();
  for (std::size_t r = 0; r < 512; r += 17) {
    for (std::size_t c = 0; c < 512; c += 13) {
      const auto idx = static_cast<std::size_t>(std::lround(255.0 * m.at(r, c)));
      ASSERT_EQ(img.pixels.pixel(c, 511 - r), lut[idx]);
    }
  }
  EXPECT_EQ(pixel_digest(img.pixels), pixel_digest(render_spectrogram(m).pixels));
}

TEST(RenderSpectrogram, EveryPixelIsALutColor) {
  Rng rng(2);
  NormalizedMatrix m{64, 40, {}};
  for (std::size_t i = 0; i < 64 * 40; ++i) m.values.push_back(rng.uniform());
  std::set<std::tuple<int, int, int>> lut;
  for (const auto& c : viridis()) lut.insert({c.r, c.g, c.b});
  for (const auto& c : colors(render_spectrogram(m).pixels)) EXPECT_TRUE(lut.count(c));
}

TEST(RenderSpectrogram, OutOfRangeValuesThrow) {
  EXPECT_THROW(render_spectrogram(filled(2, 2, 1.5)), InvalidArgument);
  EXPECT_THROW(render_spectrogram(filled(2, 2, -0.1)), InvalidArgument);
  EXPECT_THROW(render_spectrogram(filled(2, 2, std::nan(""))), InvalidArgument);
}

TEST(RenderIq, ZeroSegmentIsRedLineAtMidHeight) {
  const auto img = render_iq_panel(segment_of(std::vector<cf64>(300, cf64{})), {64, 33}).pixels;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      EXPECT_EQ(img.pixel(x, y), y == 16 ? kImagTrace : kBackground) << x << "," << y;
    }
  }
}

TEST(RenderIq, PureRealSegmentDrawsRedZeroLine) {
  std::vector<cf64> s(400);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = {std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / 50.0), 0.0};
  const auto img = render_iq_panel(segment_of(s), {512, 512}).pixels;
  // Shared scale: [-1, 1] -> rows [0.95 (H-1), 0.05 (H-1)], so zero sits mid-height.
  std::set<std::size_t> red_rows;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      if (img.pixel(x, y) == kImagTrace) red_rows.insert(y);
    }
  }
  ASSERT_EQ(red_rows.size(), 1u);
  const std::size_t zero_row = *red_rows.begin();
  EXPECT_NEAR(static_cast<double>(zero_row), 255.5, 1.0);
  for (std::size_t x = 0; x < img.width; ++x) EXPECT_EQ(img.pixel(x, zero_row), kImagTrace);
  bool blue_above = false, blue_below = false;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      if (img.pixel(x, y) == kRealTrace) (y < zero_row ? blue_above : blue_below) = true;
    }
  }
  EXPECT_TRUE(blue_above && blue_below);
  const auto top = static_cast<std::size_t>(std::lround(0.05 * 511));
  const auto bottom = static_cast<std::size_t>(std::lround(0.95 * 511));
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      if (y < top || y > bottom) {
        ASSERT_EQ(img.pixel(x, y), kBackground);
      }
    }
  }
}

TEST(RenderIq, AtMostThreeColorsAndFullWidth) {
  Rng rng(3);
  std::vector<cf64> s(700);
  for (auto& v : s) v = {rng.normal(), rng.normal()};
  const auto img = render_iq_panel(segment_of(s), {300, 200}).pixels;
  const auto seen = colors(img);
  for (const auto& c : seen) {
    EXPECT_TRUE(c == std::make_tuple(255, 255, 255) || c == std::make_tuple(0, 0, 255) || c == std::make_tuple(255, 0, 0));
  }
  for (std::size_t x : {std::size_t{0}, img.width - 1}) {
    bool inked = false;
    for (std::size_t y = 0; y < img.height; ++y) inked = inked || !(img.pixel(x, y) == kBackground);
    EXPECT_TRUE(inked) << "column " << x;
  }
}

TEST(RenderIq, NonFiniteAndEmptyThrow) {
  EXPECT_THROW(render_iq_panel(segment_of({cf64{1, 0}, cf64{std::nan(""), 0}}), {}), InvalidArgument);
  EXPECT_THROW(render_iq_panel(segment_of({}), {}), InvalidArgument);
}

TEST(RenderJoint, BlockEqualityAndHeightCheck) {
  Rng rng(4);
  NormalizedMatrix m{512, 512, {}};
  for (std::size_t i = 0; i < 512 * 512; ++i) m.values.push_back(rng.uniform());
  std::vector<cf64> s(1000);
  for (auto& v : s) v = {rng.normal(), rng.normal()};
  const auto spec = render_spectrogram(m);
  const auto iq = render_iq_panel(segment_of(s), {512, 512});
  const auto joint = render_joint(spec, iq);
  ASSERT_EQ(joint.pixels.width, 1024u);
  ASSERT_EQ(joint.pixels.height, 512u);
  EXPECT_EQ(joint.mode, ImageMode::Joint);
  for (std::size_t y = 0; y < 512; ++y) {
    for (std::size_t x = 0; x < 512; ++x) {
      ASSERT_EQ(joint.pixels.pixel(x, y), spec.pixels.pixel(x, y));
      ASSERT_EQ(joint.pixels.pixel(512 + x, y), iq.pixels.pixel(x, y));
    }
  }
  const auto short_iq = render_iq_panel(segment_of(s), {512, 500});
  EXPECT_THROW(render_joint(spec, short_iq), InvalidArgument);
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) | b[at + 3];
}

TEST(Png, RoundTripHeaderAndChunks) {
  Rng rng(5);
  Image img(1024, 512);
  for (auto& v : img.rgb) v = static_cast<std::uint8_t>(rng.below(256));
  const auto bytes = encode_png(img);
  ASSERT_GT(bytes.size(), 33u);
  EXPECT_EQ(be32(bytes, 16), 1024u);  // IHDR width
  EXPECT_EQ(be32(bytes, 20), 512u);   // IHDR height
  EXPECT_EQ(bytes[24], 8);            // bit depth
  EXPECT_EQ(bytes[25], 2);            // colour type RGB, no alpha
  std::set<std::string> chunks;
  for (std::size_t at = 8; at + 8 <= bytes.size();) {
    const auto len = be32(bytes, at);
    chunks.insert(std::string(bytes.begin() + static_cast<std::ptrdiff_t>(at + 4), bytes.begin() + static_cast<std::ptrdiff_t>(at + 8)));
    at += 12 + len;
  }
  EXPECT_EQ(chunks, (std::set<std::string>{"IHDR", "IDAT", "IEND"}));
  EXPECT_EQ(decode_png(bytes), img);
  EXPECT_EQ(encode_png(img), bytes);

  oracle::TempDir dir;
  write_png(img, dir.path() / "a" / "x.png");
  EXPECT_EQ(read_png(dir.path() / "a" / "x.png"), img);
  EXPECT_THROW(read_png(dir.path() / "nope.png"), MissingArtifact);
}

TEST(Png, CorruptInputThrows) {
  const std::vector<std::uint8_t> junk{1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_THROW(decode_png(junk), Error);
  auto bytes = encode_png(Image(4, 4));
  bytes.resize(bytes.size() - 20);
  EXPECT_THROW(decode_png(bytes), Error);
}

TEST(PixelDigest, DependsOnShapeAndContent) {
  Image a(4, 2), b(2, 4), c(4, 2);
  c.set(0, 0, kRealTrace);
  EXPECT_NE(pixel_digest(a), pixel_digest(b));
  EXPECT_NE(pixel_digest(a), pixel_digest(c));
  EXPECT_EQ(pixel_digest(a), pixel_digest(Image(4, 2)));
}

TEST(Modes, NamesRoundTrip) {
  for (auto m : {ImageMode::Spec, ImageMode::IQ, ImageMode::Joint}) EXPECT_EQ(parse_mode(mode_name(m)), m);
  EXPECT_EQ(parse_mode("JOINT"), ImageMode::Joint);
  EXPECT_THROW(parse_mode("rgb"), InvalidArgument);
}

}  // namespace
}  // namespace rfvqa
