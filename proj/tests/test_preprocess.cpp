#include <doctest.h>

#include <cmath>
#include <random>

#include "stepsense/error.hpp"
#include "stepsense/preprocess.hpp"
#include "stepsense/synth.hpp"

using namespace stepsense;

namespace {

// Recall/precision of detected peaks against ground-truth event times.
struct MatchStats {
  int matched = 0, detections = 0, truths = 0;
  double max_error_s = 0.0;
};

MatchStats match_detections(const VibrationSignal& signal,
                            const std::vector<std::int64_t>& peaks,
                            double tolerance_s) {
  MatchStats stats;
  stats.detections = static_cast<int>(peaks.size());
  stats.truths = static_cast<int>(signal.event_times_s.size());
  std::vector<bool> used(peaks.size(), false);
  for (double truth : signal.event_times_s) {
    double best = tolerance_s;
    int best_i = -1;
    for (std::size_t i = 0; i < peaks.size(); ++i) {
      if (used[i]) continue;
      const double t =
          static_cast<double>(peaks[i]) / signal.sample_rate_hz;
      if (std::abs(t - truth) <= best) {
        best = std::abs(t - truth);
        best_i = static_cast<int>(i);
      }
    }
    if (best_i >= 0) {
      used[static_cast<std::size_t>(best_i)] = true;
      ++stats.matched;
      stats.max_error_s = std::max(stats.max_error_s, best);
    }
  }
  return stats;
}

}  // namespace

TEST_CASE("footsteps of a clean synthetic walk are all detected") {
  SynthProfile profile;
  profile.noise_rms = 0.02;
  const VibrationSignal walk =
      generate_synthetic_walk(profile, {5, 5}, 12.0, 17);
  const auto peaks = detect_footsteps(walk);
  const MatchStats stats = match_detections(walk, peaks, 0.02);
  CHECK(stats.matched == stats.truths);
  CHECK(stats.detections == stats.truths);
  // ascending order
  for (std::size_t i = 1; i < peaks.size(); ++i) CHECK(peaks[i] > peaks[i - 1]);
}

TEST_CASE("detections respect the minimum step period") {
  SynthProfile profile;
  profile.step_frequency_hz = 2.4;
  const VibrationSignal walk =
      generate_synthetic_walk(profile, {5, 5}, 10.0, 5);
  const auto peaks = detect_footsteps(walk);
  for (std::size_t i = 1; i < peaks.size(); ++i)
    CHECK(static_cast<double>(peaks[i] - peaks[i - 1]) /
              walk.sample_rate_hz >=
          0.3 - 1e-9);
}

TEST_CASE("pure noise yields no detections above threshold spam") {
  VibrationSignal noise;
  noise.sample_rate_hz = 500.0;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> dist(0.0, 0.05);
  for (int i = 0; i < 5000; ++i) noise.samples.push_back(dist(rng));
  const auto peaks = detect_footsteps(noise);
  // the MAD threshold tolerates a few false alarms but not a step train
  CHECK(peaks.size() <= 5);
}

TEST_CASE("segment window is [-0.15 s, +0.2 s) around the peak") {
  VibrationSignal signal;
  signal.sample_rate_hz = 500.0;
  signal.samples.assign(1000, 0.0);
  signal.samples[500] = 1.0;
  const FootstepSegment segment = segment_footstep(signal, 500);
  REQUIRE(segment.samples.size() == 175);
  CHECK(segment.samples[75] == 1.0);  // 0.15 s * 500 = 75
  CHECK(segment.peak_index_in_signal == 500);
  CHECK_THROWS_AS(segment_footstep(signal, 50), Error);
  CHECK_THROWS_AS(segment_footstep(signal, 950), Error);
}

TEST_CASE("clipping detection finds pinned runs") {
  VibrationSignal signal;
  signal.sample_rate_hz = 500.0;
  signal.samples = {0.0, 0.5, 1.0, 1.0, 1.0, 0.5, -1.0, -1.0,
                    -1.0, -1.0, -0.2, 1.0, 1.0, 0.0};
  const auto runs = detect_clipping(signal, 1.0);
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].start_index == 2);
  CHECK(runs[0].end_index == 4);
  CHECK(runs[0].polarity == ClippedRun::Polarity::Upper);
  CHECK(runs[1].start_index == 6);
  CHECK(runs[1].end_index == 9);
  CHECK(runs[1].polarity == ClippedRun::Polarity::Lower);
  // the final 2-run is below min_run = 3
}

TEST_CASE("clipped sinusoid is reconstructed within 10% of amplitude") {
  const double fs = 500.0;
  VibrationSignal truth, clipped;
  truth.sample_rate_hz = clipped.sample_rate_hz = fs;
  for (int i = 0; i < 1000; ++i) {
    const double v = 2.0 * std::sin(2.0 * M_PI * 10.0 * i / fs);
    truth.samples.push_back(v);
    clipped.samples.push_back(std::clamp(v, -1.0, 1.0));
  }
  const auto runs = detect_clipping(clipped, 1.0);
  REQUIRE_FALSE(runs.empty());
  const RepairResult repaired = repair_clipping(clipped, runs);
  CHECK(repaired.warnings.empty());

  double sq = 0.0;
  int n_clipped = 0;
  std::vector<bool> in_run(clipped.samples.size(), false);
  for (const auto& run : runs)
    for (std::int64_t i = run.start_index; i <= run.end_index; ++i)
      in_run[static_cast<std::size_t>(i)] = true;
  for (std::size_t i = 0; i < clipped.samples.size(); ++i) {
    if (in_run[i]) {
      const double e = repaired.signal.samples[i] - truth.samples[i];
      sq += e * e;
      ++n_clipped;
    } else {
      // untouched samples stay bit-identical
      CHECK(repaired.signal.samples[i] == clipped.samples[i]);
    }
  }
  REQUIRE(n_clipped > 0);
  const double rmse = std::sqrt(sq / n_clipped);
  CHECK(rmse <= 0.2);  // 10% of amplitude 2
}

TEST_CASE("runs without support are left unrepaired with a warning") {
  VibrationSignal signal;
  signal.sample_rate_hz = 500.0;
  signal.samples.assign(10, 1.0);  // fully clipped, no clean neighbors
  const auto runs = detect_clipping(signal, 1.0);
  REQUIRE(runs.size() == 1);
  const RepairResult repaired = repair_clipping(signal, runs);
  CHECK_FALSE(repaired.warnings.empty());
  CHECK(repaired.signal.samples == signal.samples);
}

TEST_CASE("preprocess_signal repairs then segments") {
  SynthProfile profile;
  profile.footstep_amplitude = 2.0;
  profile.clip_limit = 1.0;
  const VibrationSignal walk =
      generate_synthetic_walk(profile, {5, 5}, 10.0, 21);
  SegmentationOptions options;
  options.clip_limit = 1.0;
  const auto segments = preprocess_signal(walk, options);
  CHECK(segments.size() >= walk.event_times_s.size() - 2);
  for (const auto& segment : segments) {
    CHECK(segment.samples.size() == 175);
    CHECK(segment.person_id == walk.person_id);
    // repair frees the waveform from the hard limit
    double peak = 0.0;
    for (double v : segment.samples) peak = std::max(peak, std::abs(v));
    CHECK(peak <= 2.5);
  }
}
