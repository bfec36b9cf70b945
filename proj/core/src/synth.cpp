#include "stepsense/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "stepsense/error.hpp"

namespace stepsense {

namespace {

constexpr double kFwhmToSigma = 1.0 / 2.3548200450309493;  // 1 / (2 sqrt(2 ln 2))

void check_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0)
    fail(ErrorKind::InvalidArgument,
         std::string("invalid profile: ") + name + " must be finite and > 0");
}

void check_non_negative(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0)
    fail(ErrorKind::InvalidArgument,
         std::string("invalid profile: ") + name + " must be finite and >= 0");
}

// Adds a Gaussian-envelope tone centered at grid-snapped time t_c so the
// envelope peak lands exactly on a sample.
void add_burst(std::vector<double>& x, double fs, double t_c, double amp,
               double fwhm_s, double carrier_hz) {
  const double sigma = fwhm_s * kFwhmToSigma;
  const long center = std::lround(t_c * fs);
  const long half = std::lround(5.0 * sigma * fs) + 1;
  const long n = static_cast<long>(x.size());
  for (long i = std::max(0L, center - half);
       i <= std::min(n - 1, center + half); ++i) {
    const double dt = (i - center) / fs;
    x[i] += amp * std::exp(-dt * dt / (2.0 * sigma * sigma)) *
            std::cos(2.0 * std::numbers::pi * carrier_hz * dt);
  }
}

}  // namespace

SynthProfile SynthProfile::resolved_for(const EmotionLabel& label) const {
  SynthProfile r = *this;
  auto it = emotion_modulation.find(quadrant_of(label));
  if (it != emotion_modulation.end()) {
    const ProfileOffsets& o = it->second;
    r.step_frequency_hz += o.step_frequency_hz;
    r.footstep_amplitude += o.footstep_amplitude;
    r.hs_to_peak_ratio += o.hs_to_peak_ratio;
    r.hs_fwhm_s += o.hs_fwhm_s;
    r.to_fwhm_s += o.to_fwhm_s;
    r.double_support_s += o.double_support_s;
  }
  r.emotion_modulation.clear();
  return r;
}

void SynthProfile::validate() const {
  check_positive(step_frequency_hz, "step_frequency_hz");
  check_positive(footstep_amplitude, "footstep_amplitude");
  check_positive(hs_to_peak_ratio, "hs_to_peak_ratio");
  check_positive(hs_fwhm_s, "hs_fwhm_s");
  check_positive(to_fwhm_s, "to_fwhm_s");
  check_non_negative(double_support_s, "double_support_s");
  check_non_negative(noise_rms, "noise_rms");
  if (clip_limit) check_positive(*clip_limit, "clip_limit");
  check_positive(heel_center_hz, "heel_center_hz");
  check_positive(toe_center_hz, "toe_center_hz");
}

std::map<EmotionQuadrant, ProfileOffsets> default_emotion_modulation() {
  std::map<EmotionQuadrant, ProfileOffsets> m;
  m[EmotionQuadrant::HVHA] = {+0.45, +0.25, 0.0, +0.006, +0.010, -0.02};
  m[EmotionQuadrant::HVLA] = {-0.25, +0.20, +0.8, 0.0, 0.0, -0.02};
  m[EmotionQuadrant::LVHA] = {+0.35, -0.15, 0.0, 0.0, 0.0, +0.03};
  m[EmotionQuadrant::LVLA] = {-0.35, -0.20, 0.0, 0.0, 0.0, +0.04};
  return m;
}

VibrationSignal generate_synthetic_walk(const SynthProfile& profile,
                                        const EmotionLabel& label,
                                        double duration_s, std::uint64_t seed,
                                        double sample_rate_hz) {
  profile.validate();
  const SynthProfile p = profile.resolved_for(label);
  p.validate();

  const double fs = sample_rate_hz;
  const double period = 1.0 / p.step_frequency_hz;
  if (!(duration_s >= period))
    fail(ErrorKind::InvalidArgument, "duration shorter than one step period");

  const long n = std::lround(duration_s * fs);
  VibrationSignal sig;
  sig.sample_rate_hz = fs;
  sig.samples.assign(static_cast<std::size_t>(n), 0.0);
  sig.label = label;

  // Event time = toe-off burst center (the dominant response in the
  // structural 30-70 Hz detection band). The heel strike precedes it by
  // double_support_s.
  // Keep the last event far enough from the end for its segment window
  // (+0.2 s) and the detector's edge guard.
  const double t0 = std::max(0.5 * period, 0.25);
  for (double t = t0; t < duration_s - 0.25; t += period) {
    const double t_toe = std::lround(t * fs) / fs;
    const double t_heel = std::lround((t - p.double_support_s) * fs) / fs;
    add_burst(sig.samples, fs, t_heel, p.footstep_amplitude, p.hs_fwhm_s,
              p.heel_center_hz);
    add_burst(sig.samples, fs, t_toe, p.footstep_amplitude / p.hs_to_peak_ratio,
              p.to_fwhm_s, p.toe_center_hz);
    sig.event_times_s.push_back(t_toe);
  }

  if (p.noise_rms > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, p.noise_rms);
    for (double& s : sig.samples) s += noise(rng);
  }
  if (p.clip_limit) {
    const double lim = *p.clip_limit;
    for (double& s : sig.samples) s = std::clamp(s, -lim, lim);
  }
  return sig;
}

SynthProfile person_profile(const CorpusConfig& config, int person_index) {
  SynthProfile p = config.base_profile;
  if (p.emotion_modulation.empty())
    p.emotion_modulation = default_emotion_modulation();
  // Persistent per-person gait deviation, independent of the trial seed.
  std::mt19937_64 rng(config.seed * 1000003ULL +
                      static_cast<std::uint64_t>(person_index));
  auto u = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  p.step_frequency_hz += u(-0.12, 0.12);
  p.footstep_amplitude += u(-0.15, 0.15);
  p.hs_to_peak_ratio += u(-0.30, 0.30);
  p.hs_fwhm_s += u(-0.003, 0.003);
  p.to_fwhm_s += u(-0.005, 0.005);
  p.double_support_s += u(-0.015, 0.015);
  // Individual expressiveness: how strongly emotion modulates this
  // person's gait. Every quadrant offset is scaled by the same
  // persistent gain, so the feature-to-emotion mapping differs between
  // persons while keeping the population-average direction.
  const double expressiveness = u(0.4, 1.6);
  for (auto& [quadrant, offsets] : p.emotion_modulation) {
    offsets.step_frequency_hz *= expressiveness;
    offsets.footstep_amplitude *= expressiveness;
    offsets.hs_to_peak_ratio *= expressiveness;
    offsets.hs_fwhm_s *= expressiveness;
    offsets.to_fwhm_s *= expressiveness;
    offsets.double_support_s *= expressiveness;
  }
  return p;
}

std::vector<VibrationSignal> generate_corpus(const CorpusConfig& config) {
  static const EmotionLabel kCenters[kNumQuadrants] = {
      {7.0, 7.0},  // HVHA
      {7.0, 3.0},  // HVLA
      {3.0, 7.0},  // LVHA
      {3.0, 3.0},  // LVLA
  };
  std::vector<VibrationSignal> out;
  out.reserve(static_cast<std::size_t>(config.n_persons) *
              config.trials_per_person);
  for (int person = 0; person < config.n_persons; ++person) {
    const SynthProfile profile = person_profile(config, person);
    for (int trial = 0; trial < config.trials_per_person; ++trial) {
      std::mt19937_64 rng(config.seed * 7919ULL +
                          static_cast<std::uint64_t>(person) * 104729ULL +
                          static_cast<std::uint64_t>(trial));
      std::uniform_real_distribution<double> jitter(-config.label_jitter,
                                                    config.label_jitter);
      EmotionLabel label = kCenters[trial % kNumQuadrants];
      label.valence = std::clamp(label.valence + jitter(rng), 1.0, 9.0);
      label.arousal = std::clamp(label.arousal + jitter(rng), 1.0, 9.0);

      VibrationSignal sig = generate_synthetic_walk(
          profile, label, config.trial_duration_s, rng(), config.sample_rate_hz);
      sig.person_id = "p" + std::to_string(person);
      sig.trajectory_id = sig.person_id + "_t" + std::to_string(trial);
      sig.sensor_id = "s0";
      out.push_back(std::move(sig));
    }
  }
  return out;
}

}  // namespace stepsense
