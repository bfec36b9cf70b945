#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "stepsense/emd.hpp"
#include "stepsense/signal.hpp"

namespace stepsense {

struct FeatureConfig {
  // Band edges (Hz) for the heel-strike / toe-off envelopes.
  double hs_band_low = 100.0, hs_band_high = 250.0;
  double to_band_low = 10.0, to_band_high = 35.0;
  // Narrower bands used for double support time.
  double ds_high_low = 100.0, ds_high_high = 200.0;
  double ds_low_low = 20.0, ds_low_high = 30.0;

  double energy_window_s = 0.05;
  double energy_smooth_span_s = 0.5;
  double log_epsilon = 1e-12;

  int stft_frame = 32;
  int stft_hop = 16;

  int cepstrum_len = 20;
  int lpc_order = 12;
  int legendre_order = 10;

  int image_rows = 32;
  int image_cols = 64;
  double cwt_freq_low = 5.0;

  double peak_ratio_cap = 1e6;
  // Fundamental search band for the harmonic ratio.
  double fundamental_low = 10.0, fundamental_high = 35.0;

  EmdConfig emd;
};

struct GaitFeatures {
  double step_frequency = 0.0;
  double double_support_time = 0.0;
  double peak_ratio_hs_to = 0.0;
  double fwhm_hs = 0.0;
  double fwhm_to = 0.0;
  std::vector<double> energy_raw, energy_smoothed, energy_log;
};

struct StatisticalFeatures {
  double mean = 0, median = 0, std_dev = 0, max = 0, range = 0;
  double skewness = 0, kurtosis = 0;
  double n_peaks = 0, n_valleys = 0;
  double autocorr_lag1 = 0;
  double max_rise_slope = 0, max_fall_slope = 0;
};

struct SpectralShape {
  double centroid = 0, crest = 0, decrease = 0, entropy = 0, flatness = 0;
  double kurtosis = 0, skewness = 0, rolloff = 0, slope = 0;
};

struct TimeDomainFeatures {
  double jitter = 0, shimmer = 0, jitter_rap = 0, zcr = 0;
};

struct FrequencyFeatures {
  std::vector<double> fft_magnitudes;
  double harmonic_ratio = 0.0;
  std::vector<double> cepstrum;
};

struct TimeFrequencyFeatures {
  Eigen::MatrixXd cwt_image;
  Eigen::MatrixXd hht_image;
  std::vector<double> f0_contour;
};

struct CompactFeatures {
  std::vector<double> lpc;
  std::vector<double> legendre;
};

// ---- per-operation extraction --------------------------------------------

/// 1 / mean inter-peak interval. Throws on fewer than two peaks.
double step_frequency(const std::vector<double>& peak_times_s);

struct ScalarWithWarnings {
  double value = 0.0;
  std::vector<std::string> warnings;
};

/// Lag between the low-band and high-band envelope peaks (seconds).
ScalarWithWarnings double_support_time(const FootstepSegment& segment,
                                       const FeatureConfig& config = {});

struct PeakRatioFwhm {
  double peak_ratio_hs_to = 0.0;
  double fwhm_hs = 0.0;
  double fwhm_to = 0.0;
  std::vector<std::string> warnings;
};
PeakRatioFwhm peak_ratio_and_fwhm(const FootstepSegment& segment,
                                  const FeatureConfig& config = {});

struct EnergyContours {
  std::vector<double> raw, smoothed, log;
};
EnergyContours energy_contours(const FootstepSegment& segment,
                               const FeatureConfig& config = {});

StatisticalFeatures statistical_features(const FootstepSegment& segment);

struct SpectralShapeResult {
  SpectralShape value;
  std::vector<std::string> warnings;
};
SpectralShapeResult spectral_shape(const std::vector<double>& spectrum,
                                   const std::vector<double>& bin_freqs_hz);

struct DeltaSpectral {
  SpectralShape delta;  // mean |frame-to-frame change| per descriptor
  double flux = 0.0;    // mean L2 distance between L2-normalized frames
  std::vector<std::string> warnings;
};
DeltaSpectral delta_spectral_features(const FootstepSegment& segment,
                                      const FeatureConfig& config = {});

struct TimeDomainResult {
  TimeDomainFeatures value;
  std::vector<std::string> warnings;
};
TimeDomainResult time_domain_features(const FootstepSegment& segment);

FrequencyFeatures frequency_features(const FootstepSegment& segment,
                                     const FeatureConfig& config = {});

struct TimeFrequencyResult {
  TimeFrequencyFeatures value;
  std::vector<std::string> warnings;
};
TimeFrequencyResult time_frequency_features(const FootstepSegment& segment,
                                            const FeatureConfig& config = {});

struct CompactResult {
  CompactFeatures value;
  std::vector<std::string> warnings;
};
CompactResult compact_features(const FootstepSegment& segment,
                               const FeatureConfig& config = {});

/// Levinson-Durbin solve of the autocorrelation normal equations;
/// returns predictor coefficients a_1..a_order for
/// x[n] ~ sum_k a_k x[n-k]. Zero autocorrelation yields all-zero output.
std::vector<double> lpc_coefficients(const std::vector<double>& x, int order);

/// Least-squares coefficients of Legendre polynomials P_0..P_order over
/// the sample index mapped to [-1, 1].
std::vector<double> legendre_coefficients(const std::vector<double>& x,
                                          int order);

}  // namespace stepsense
