#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "stepsense/features.hpp"
#include "stepsense/signal.hpp"

namespace stepsense {

/// Which feature families go into the bundle. The baseline and the
/// ablation grid restrict the layout rather than zeroing slots.
enum class FeatureSet { Combined, GaitOnly, VibrationOnly };

const char* feature_set_name(FeatureSet set);

struct SequenceSlot {
  std::string name;
  int length = 0;
  bool operator==(const SequenceSlot&) const = default;
};

struct ImageSlot {
  std::string name;
  int rows = 0, cols = 0;
  bool operator==(const ImageSlot&) const = default;
};

struct BundleLayout {
  std::vector<std::string> scalar_names;
  std::vector<SequenceSlot> sequences;
  std::vector<ImageSlot> images;
  bool operator==(const BundleLayout&) const = default;

  int scalar_dim() const { return static_cast<int>(scalar_names.size()); }
};

/// The layout extract_bundle will produce for a given config/sample rate.
BundleLayout bundle_layout(const FeatureConfig& config, double sample_rate_hz,
                           FeatureSet set = FeatureSet::Combined);

/// All features of one footstep in the three network input formats.
struct FeatureBundle {
  Eigen::VectorXd scalars;
  std::vector<Eigen::VectorXd> sequences;
  std::vector<Eigen::MatrixXd> images;

  bool matches(const BundleLayout& layout) const;
};

/// Trajectory-level context shared by all segments of one trajectory.
struct TrajectoryContext {
  std::vector<double> peak_times_s;
};

struct BundleExtraction {
  FeatureBundle bundle;
  std::vector<std::string> warnings;
};

/// Deterministic assembly of every feature into the fixed slot layout.
/// Throws Error(Numeric) if any non-finite value is produced.
BundleExtraction extract_bundle(const FootstepSegment& segment,
                                const TrajectoryContext& context,
                                const FeatureConfig& config = {},
                                FeatureSet set = FeatureSet::Combined);

struct FeatureSample {
  FeatureBundle bundle;
  EmotionLabel label;
  std::string person_id;
  std::string trajectory_id;
};

struct FeatureDataset {
  BundleLayout layout;
  double sample_rate_hz = 500.0;
  /// Fingerprint of the pipeline config that produced the dataset.
  std::string fingerprint;
  std::vector<FeatureSample> samples;
};

/// Slices a Combined-layout dataset down to one feature family by slot
/// name; Combined is returned unchanged. Throws if the layout lacks the
/// requested slots.
FeatureDataset restrict_dataset(const FeatureDataset& dataset, FeatureSet set);

}  // namespace stepsense
