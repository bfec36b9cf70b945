#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stepsense {

/// Valence/arousal rating pair on the 1..9 SAM scale.
struct EmotionLabel {
  double valence = 5.0;
  double arousal = 5.0;

  bool valid() const {
    return valence >= 1.0 && valence <= 9.0 && arousal >= 1.0 && arousal <= 9.0;
  }
};

enum class EmotionQuadrant { HVHA, HVLA, LVHA, LVLA };

constexpr int kNumQuadrants = 4;

const char* quadrant_name(EmotionQuadrant q);
std::optional<EmotionQuadrant> quadrant_from_name(const std::string& name);

/// Midpoint rule on the 1..9 scale: score > 5 is "high", score <= 5 is "low".
EmotionQuadrant quadrant_of(const EmotionLabel& label);

/// A continuous floor-velocity recording from one sensor during one
/// platform crossing, with provenance metadata.
struct VibrationSignal {
  std::vector<double> samples;
  double sample_rate_hz = 500.0;
  std::string person_id;
  std::string trajectory_id;
  std::string sensor_id;
  std::optional<EmotionLabel> label;
  /// Ground-truth footstep event times (seconds), present for synthetic
  /// signals; the instant of the dominant structural response per step.
  std::vector<double> event_times_s;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }

  /// Throws Error(InvalidArgument) when empty, non-finite, or the rate
  /// is not positive.
  void validate() const;
};

/// One 0.35 s single-footstep window cut around a detected peak.
/// Covers [-0.15 s, +0.2 s) relative to the peak.
struct FootstepSegment {
  std::vector<double> samples;
  double sample_rate_hz = 500.0;
  std::int64_t peak_index_in_signal = 0;
  std::string person_id;
  std::string trajectory_id;
  std::string sensor_id;
  std::optional<EmotionLabel> label;
};

constexpr double kSegmentPreS = 0.15;   // window before the peak
constexpr double kSegmentPostS = 0.20;  // window after the peak
constexpr double kSegmentLenS = kSegmentPreS + kSegmentPostS;

inline int segment_length(double sample_rate_hz) {
  return static_cast<int>(kSegmentLenS * sample_rate_hz + 0.5);
}

}  // namespace stepsense
