#include <benchmark/benchmark.h>

#include "rfvqa/dsp.hpp"
#include "rfvqa/pipeline.hpp"
#include "rfvqa/render.hpp"
#include "rfvqa/rng.hpp"
#include "rfvqa/transform.hpp"

namespace {

using namespace rfvqa;

std::vector<cf64> noise(std::size_t n) {
  Rng rng(1);
  std::vector<cf64> x(n);
  for (auto& v : x) v = {rng.normal(), rng.normal()};
  return x;
}

void BM_Fft(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Fft fft(n);
  auto x = noise(n);
  for (auto _ : state) {
    fft.forward(x);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Fft)->RangeMultiplier(4)->Range(64, 4096);

void BM_Stft(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const StftConfig cfg{k, k / 2};
  const auto x = noise(cfg.square_length());
  for (auto _ : state) benchmark::DoNotOptimize(stft(x, cfg));
}
BENCHMARK(BM_Stft)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Synthesize(benchmark::State& state, const char* name) {
  const PipelineConfig cfg;
  const auto& cls = parse_class(name);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(asset_signal(cls, ++seed, 20.0, cfg));
}
BENCHMARK_CAPTURE(BM_Synthesize, qpsk, "qpsk")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Synthesize, ofdm_1024, "ofdm-1024")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Synthesize, gmsk, "4gmsk")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Synthesize, fm, "fm")->Unit(benchmark::kMillisecond);

void BM_RenderAsset(benchmark::State& state) {
  const PipelineConfig cfg;
  const auto sig = asset_signal(parse_class("16qam"), 3, 20.0, cfg);
  const std::vector<ImageMode> modes{ImageMode::Spec, ImageMode::IQ, ImageMode::Joint};
  for (auto _ : state) benchmark::DoNotOptimize(render_asset(sig, 3, modes, cfg));
}
BENCHMARK(BM_RenderAsset)->Unit(benchmark::kMillisecond);

void BM_EncodePng(benchmark::State& state) {
  const PipelineConfig cfg;
  const auto sig = asset_signal(parse_class("16qam"), 3, 20.0, cfg);
  const std::vector<ImageMode> modes{ImageMode::Joint};
  const auto img = render_asset(sig, 3, modes, cfg).get(ImageMode::Joint).pixels;
  for (auto _ : state) benchmark::DoNotOptimize(encode_png(img));
}
BENCHMARK(BM_EncodePng)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
