#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "stepsense/signal.hpp"

namespace stepsense {

/// Additive offsets applied to a SynthProfile for one emotion quadrant.
struct ProfileOffsets {
  double step_frequency_hz = 0.0;
  double footstep_amplitude = 0.0;
  double hs_to_peak_ratio = 0.0;
  double hs_fwhm_s = 0.0;
  double to_fwhm_s = 0.0;
  double double_support_s = 0.0;
};

/// Parametric footstep model. Each footstep is a heel-strike burst
/// (Gaussian-envelope tone near 150 Hz) followed after double_support_s
/// by a toe-off burst (near 25 Hz) at amplitude / hs_to_peak_ratio.
struct SynthProfile {
  double step_frequency_hz = 1.8;
  double footstep_amplitude = 1.0;
  double hs_to_peak_ratio = 2.0;
  double hs_fwhm_s = 0.020;
  double to_fwhm_s = 0.040;
  double double_support_s = 0.12;
  double noise_rms = 0.05;
  std::optional<double> clip_limit;
  double heel_center_hz = 150.0;
  double toe_center_hz = 25.0;
  std::map<EmotionQuadrant, ProfileOffsets> emotion_modulation;

  /// Profile after applying the quadrant offsets for `label`.
  SynthProfile resolved_for(const EmotionLabel& label) const;

  /// Throws Error(InvalidArgument) on non-finite or non-positive
  /// parameters (after modulation all parameters must stay positive,
  /// double_support and noise_rms must stay non-negative).
  void validate() const;
};

/// Modulation offsets oriented the way the characterization study found:
/// high arousal raises step frequency, high valence raises footstep
/// energy and shortens double support, HVLA raises the heel/toe peak
/// ratio, HVHA widens both contact events.
std::map<EmotionQuadrant, ProfileOffsets> default_emotion_modulation();

/// Pure function of (profile, label, duration, seed). Ground-truth event
/// times (the toe-off burst centers, which dominate the structural band
/// used for detection) are stored in the returned signal.
VibrationSignal generate_synthetic_walk(const SynthProfile& profile,
                                        const EmotionLabel& label,
                                        double duration_s, std::uint64_t seed,
                                        double sample_rate_hz = 500.0);

struct CorpusConfig {
  int n_persons = 20;
  int trials_per_person = 9;
  double trial_duration_s = 12.0;
  double sample_rate_hz = 500.0;
  SynthProfile base_profile;  // emotion_modulation filled from default when empty
  double label_jitter = 1.0;  // uniform jitter around quadrant centers
  std::uint64_t seed = 1;
};

/// One signal per (person, trial). Each simulated person carries a
/// persistent perturbation of the base profile (including an individual
/// expressiveness gain on the emotion modulation) so gait similarity
/// between persons is meaningful and personalization has signal to
/// exploit; trial labels cycle through the four quadrants with jitter
/// around the quadrant centers.
std::vector<VibrationSignal> generate_corpus(const CorpusConfig& config);

/// The per-person resolved base profile used by generate_corpus
/// (before emotion modulation); exposed for similarity-oriented tests.
SynthProfile person_profile(const CorpusConfig& config, int person_index);

}  // namespace stepsense
