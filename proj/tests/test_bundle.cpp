#include <doctest.h>

#include <cmath>

#include "stepsense/bundle.hpp"
#include "stepsense/error.hpp"
#include "stepsense/preprocess.hpp"
#include "stepsense/synth.hpp"

using namespace stepsense;

namespace {

// One detected footstep segment plus its trajectory context.
struct Extracted {
  FootstepSegment segment;
  TrajectoryContext context;
};

Extracted sample_segment() {
  SynthProfile profile;
  profile.noise_rms = 0.02;
  const VibrationSignal walk = generate_synthetic_walk(profile, {6, 4}, 8.0, 11);
  const auto segments = preprocess_signal(walk);
  REQUIRE_MESSAGE(segments.size() >= 3, "expected several footsteps");
  Extracted out;
  out.segment = segments[1];
  for (const auto& s : segments)
    out.context.peak_times_s.push_back(
        static_cast<double>(s.peak_index_in_signal) / walk.sample_rate_hz);
  return out;
}

}  // namespace

TEST_CASE("combined layout has the documented shape") {
  const BundleLayout layout = bundle_layout(FeatureConfig{}, 500.0);
  CHECK(layout.scalar_dim() == 41);  // 5 gait + 12 stat + 9 spec + 10 delta + 4 td + 1
  REQUIRE(layout.sequences.size() == 8);
  CHECK(layout.sequences[0].name == "energy_raw");
  CHECK(layout.sequences[0].length == 7);  // 175 samples / 25-sample windows
  CHECK(layout.sequences[3].name == "f0_contour");
  CHECK(layout.sequences[3].length == 9);
  CHECK(layout.sequences[4].length == 129);  // 256-point FFT, one-sided
  CHECK(layout.sequences[6].length == 12);   // LPC order
  CHECK(layout.sequences[7].length == 11);   // Legendre order 10 + constant
  REQUIRE(layout.images.size() == 2);
  CHECK(layout.images[0].rows == 32);
  CHECK(layout.images[0].cols == 64);
}

TEST_CASE("family layouts partition the combined layout") {
  const FeatureConfig config;
  const auto combined = bundle_layout(config, 500.0, FeatureSet::Combined);
  const auto gait = bundle_layout(config, 500.0, FeatureSet::GaitOnly);
  const auto vib = bundle_layout(config, 500.0, FeatureSet::VibrationOnly);
  CHECK(gait.scalar_dim() + vib.scalar_dim() == combined.scalar_dim());
  CHECK(gait.sequences.size() + vib.sequences.size() ==
        combined.sequences.size());
  CHECK(gait.images.empty());
  CHECK(vib.images == combined.images);
  // gait slots are the combined prefix, vibration slots the suffix
  for (int i = 0; i < gait.scalar_dim(); ++i)
    CHECK(gait.scalar_names[static_cast<std::size_t>(i)] ==
          combined.scalar_names[static_cast<std::size_t>(i)]);
  for (std::size_t i = 0; i < vib.sequences.size(); ++i)
    CHECK(vib.sequences[i] == combined.sequences[i + gait.sequences.size()]);
}

TEST_CASE("extract_bundle fills every slot with finite values") {
  const Extracted e = sample_segment();
  const BundleExtraction result = extract_bundle(e.segment, e.context);
  const BundleLayout layout = bundle_layout(FeatureConfig{}, 500.0);
  CHECK(result.bundle.matches(layout));
  CHECK(result.bundle.scalars.allFinite());
  // step frequency lands near the profile's 1.8 Hz default
  CHECK(result.bundle.scalars(0) > 1.0);
  CHECK(result.bundle.scalars(0) < 3.0);
  for (const auto& seq : result.bundle.sequences) CHECK(seq.allFinite());
  for (const auto& img : result.bundle.images) CHECK(img.allFinite());
}

TEST_CASE("family extraction equals slicing the combined extraction") {
  const Extracted e = sample_segment();
  const auto combined = extract_bundle(e.segment, e.context);
  const auto gait =
      extract_bundle(e.segment, e.context, {}, FeatureSet::GaitOnly);
  const auto vib =
      extract_bundle(e.segment, e.context, {}, FeatureSet::VibrationOnly);
  CHECK(gait.bundle.scalars == combined.bundle.scalars.head(5));
  CHECK(vib.bundle.scalars == combined.bundle.scalars.tail(36));
  REQUIRE(gait.bundle.sequences.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(gait.bundle.sequences[i] == combined.bundle.sequences[i]);
  REQUIRE(vib.bundle.sequences.size() == 5);
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(vib.bundle.sequences[i] == combined.bundle.sequences[i + 3]);
  REQUIRE(vib.bundle.images.size() == 2);
  CHECK(vib.bundle.images[0] == combined.bundle.images[0]);
}

TEST_CASE("restrict_dataset slices samples and keeps metadata") {
  const Extracted e = sample_segment();
  FeatureDataset dataset;
  dataset.layout = bundle_layout(FeatureConfig{}, 500.0);
  dataset.fingerprint = "cafe";
  FeatureSample sample;
  sample.bundle = extract_bundle(e.segment, e.context).bundle;
  sample.label = {6, 4};
  sample.person_id = "p3";
  sample.trajectory_id = "p3_t1";
  dataset.samples.push_back(sample);

  const FeatureDataset gait = restrict_dataset(dataset, FeatureSet::GaitOnly);
  CHECK(gait.fingerprint == "cafe");
  CHECK(gait.layout == bundle_layout(FeatureConfig{}, 500.0, FeatureSet::GaitOnly));
  REQUIRE(gait.samples.size() == 1);
  CHECK(gait.samples[0].person_id == "p3");
  CHECK(gait.samples[0].trajectory_id == "p3_t1");
  CHECK(gait.samples[0].bundle.scalars == sample.bundle.scalars.head(5));
  CHECK(gait.samples[0].bundle.images.empty());

  const FeatureDataset vib =
      restrict_dataset(dataset, FeatureSet::VibrationOnly);
  CHECK(vib.samples[0].bundle.scalars == sample.bundle.scalars.tail(36));
  CHECK(vib.samples[0].bundle.images.size() == 2);

  CHECK(restrict_dataset(dataset, FeatureSet::Combined).layout ==
        dataset.layout);
}

TEST_CASE("restrict_dataset rejects a non-combined layout") {
  FeatureDataset vib_only;
  vib_only.layout =
      bundle_layout(FeatureConfig{}, 500.0, FeatureSet::VibrationOnly);
  CHECK_THROWS_AS(restrict_dataset(vib_only, FeatureSet::GaitOnly), Error);
}

TEST_CASE("feature set names round-trip") {
  CHECK(feature_set_name(FeatureSet::Combined) == std::string("combined"));
  CHECK(feature_set_name(FeatureSet::GaitOnly) == std::string("gait_only"));
  CHECK(feature_set_name(FeatureSet::VibrationOnly) ==
        std::string("vibration_only"));
}
