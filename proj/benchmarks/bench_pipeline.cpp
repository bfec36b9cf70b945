// Microbenchmarks for the hot paths of the pipeline: footstep detection
// (wavelet transform), per-footstep feature extraction, and model
// forward/backward passes.

#include <benchmark/benchmark.h>

#include <random>

#include "stepsense/bundle.hpp"
#include "stepsense/emd.hpp"
#include "stepsense/fft.hpp"
#include "stepsense/network.hpp"
#include "stepsense/preprocess.hpp"
#include "stepsense/synth.hpp"

using namespace stepsense;

namespace {

VibrationSignal sample_walk(double seconds) {
  return generate_synthetic_walk(SynthProfile{}, {5.0, 5.0}, seconds, 1);
}

FootstepSegment sample_segment() {
  const VibrationSignal walk = sample_walk(10.0);
  return preprocess_signal(walk).front();
}

void BM_DetectFootsteps(benchmark::State& state) {
  const VibrationSignal walk = sample_walk(static_cast<double>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(detect_footsteps(walk));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(walk.samples.size()));
}
BENCHMARK(BM_DetectFootsteps)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_ExtractBundle(benchmark::State& state) {
  const FootstepSegment segment = sample_segment();
  TrajectoryContext context;
  for (double t = 0.5; t < 10.0; t += 0.55) context.peak_times_s.push_back(t);
  for (auto _ : state)
    benchmark::DoNotOptimize(extract_bundle(segment, context));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ExtractBundle)->Unit(benchmark::kMillisecond);

void BM_Emd(benchmark::State& state) {
  const FootstepSegment segment = sample_segment();
  for (auto _ : state)
    benchmark::DoNotOptimize(emd(segment.samples));
}
BENCHMARK(BM_Emd)->Unit(benchmark::kMillisecond);

void BM_FftReal(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (double& v : x) v = dist(rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(fft_real(x));
}
BENCHMARK(BM_FftReal)->Arg(256)->Arg(4096);

struct ModelFixture {
  FeatureConfig features;
  BundleLayout layout = bundle_layout(features, 500.0);
  Network net{layout, NetworkConfig{}};
  Standardizer standardizer;
  NetInput input;

  ModelFixture() {
    FeatureDataset dataset;
    dataset.layout = layout;
    TrajectoryContext context;
    for (double t = 0.5; t < 10.0; t += 0.55) context.peak_times_s.push_back(t);
    FeatureSample sample;
    sample.bundle = extract_bundle(sample_segment(), context).bundle;
    dataset.samples.push_back(sample);
    standardizer = Standardizer::fit(dataset, {0});
    input = net.adapt(dataset.samples.front().bundle, standardizer);
  }
};

void BM_NetworkForward(benchmark::State& state) {
  static ModelFixture fixture;
  for (auto _ : state)
    benchmark::DoNotOptimize(fixture.net.forward(fixture.input));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NetworkForward);

void BM_NetworkForwardBackward(benchmark::State& state) {
  static ModelFixture fixture;
  for (auto _ : state) {
    Network::Cache cache;
    const auto result = fixture.net.forward(fixture.input, false, nullptr, &cache);
    fixture.net.zero_gradients();
    fixture.net.backward(cache, result.output);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NetworkForwardBackward);

}  // namespace

BENCHMARK_MAIN();
