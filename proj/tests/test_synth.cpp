#include <doctest.h>

#include <cmath>
#include <set>

#include "stepsense/error.hpp"
#include "stepsense/synth.hpp"

using namespace stepsense;

TEST_CASE("synthetic walk peaks at the configured amplitude") {
  SynthProfile profile;
  profile.noise_rms = 0.0;
  const VibrationSignal walk =
      generate_synthetic_walk(profile, {5, 5}, 10.0, 3);
  double peak = 0.0;
  for (double v : walk.samples) peak = std::max(peak, std::abs(v));
  CHECK(peak == doctest::Approx(profile.footstep_amplitude).epsilon(0.01));
}

TEST_CASE("event count follows the step frequency") {
  SynthProfile profile;
  profile.step_frequency_hz = 2.0;
  const VibrationSignal walk =
      generate_synthetic_walk(profile, {5, 5}, 10.0, 3);
  // ~2 steps/s over 10 s, minus edge margins
  CHECK(walk.event_times_s.size() >= 17);
  CHECK(walk.event_times_s.size() <= 20);
  for (std::size_t i = 1; i < walk.event_times_s.size(); ++i)
    CHECK(walk.event_times_s[i] - walk.event_times_s[i - 1] ==
          doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("same seed reproduces the walk exactly") {
  SynthProfile profile;
  const auto a = generate_synthetic_walk(profile, {6, 4}, 5.0, 42);
  const auto b = generate_synthetic_walk(profile, {6, 4}, 5.0, 42);
  const auto c = generate_synthetic_walk(profile, {6, 4}, 5.0, 43);
  CHECK(a.samples == b.samples);
  CHECK(a.samples != c.samples);
}

TEST_CASE("clip limit bounds the output") {
  SynthProfile profile;
  profile.footstep_amplitude = 2.0;
  profile.clip_limit = 1.0;
  const auto walk = generate_synthetic_walk(profile, {5, 5}, 5.0, 9);
  double peak = 0.0;
  for (double v : walk.samples) peak = std::max(peak, std::abs(v));
  CHECK(peak <= 1.0 + 1e-12);
  // some samples actually sit at the limit
  int pinned = 0;
  for (double v : walk.samples)
    if (std::abs(std::abs(v) - 1.0) < 1e-12) ++pinned;
  CHECK(pinned > 0);
}

TEST_CASE("emotion modulation shifts the step rate in the right direction") {
  SynthProfile profile;
  profile.emotion_modulation = default_emotion_modulation();
  const SynthProfile high_arousal = profile.resolved_for({7, 7});
  const SynthProfile low_arousal = profile.resolved_for({3, 3});
  CHECK(high_arousal.step_frequency_hz > profile.step_frequency_hz);
  CHECK(low_arousal.step_frequency_hz < profile.step_frequency_hz);
  CHECK(high_arousal.footstep_amplitude > low_arousal.footstep_amplitude);
  CHECK(low_arousal.double_support_s > high_arousal.double_support_s);
}

TEST_CASE("profile validation rejects non-positive parameters") {
  SynthProfile profile;
  profile.step_frequency_hz = 0.0;
  CHECK_THROWS_AS(profile.validate(), Error);
  profile = SynthProfile{};
  profile.noise_rms = -0.1;
  CHECK_THROWS_AS(profile.validate(), Error);
  CHECK_NOTHROW(SynthProfile{}.validate());
}

TEST_CASE("corpus has the declared shape and metadata") {
  CorpusConfig config;
  config.n_persons = 3;
  config.trials_per_person = 4;
  config.trial_duration_s = 4.0;
  const auto corpus = generate_corpus(config);
  REQUIRE(corpus.size() == 12);
  CHECK(corpus[0].person_id == "p0");
  CHECK(corpus[0].trajectory_id == "p0_t0");
  CHECK(corpus[11].person_id == "p2");
  CHECK(corpus[11].trajectory_id == "p2_t3");
  for (const auto& signal : corpus) {
    REQUIRE(signal.label.has_value());
    CHECK(signal.label->valid());
    CHECK(signal.duration_s() == doctest::Approx(4.0));
    CHECK_FALSE(signal.event_times_s.empty());
  }
  // trial labels cycle through all four quadrants
  std::set<EmotionQuadrant> seen;
  for (int t = 0; t < 4; ++t)
    seen.insert(quadrant_of(*corpus[static_cast<std::size_t>(t)].label));
  CHECK(seen.size() == 4);
}

TEST_CASE("persons differ but are stable across trials") {
  CorpusConfig config;
  config.n_persons = 2;
  const SynthProfile p0 = person_profile(config, 0);
  const SynthProfile p0_again = person_profile(config, 0);
  const SynthProfile p1 = person_profile(config, 1);
  CHECK(p0.step_frequency_hz == p0_again.step_frequency_hz);
  CHECK(p0.step_frequency_hz != p1.step_frequency_hz);
}
