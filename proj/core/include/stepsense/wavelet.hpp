#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stepsense/signal.hpp"

namespace stepsense {

/// Analytic Morse wavelet, gamma = 3, time-bandwidth product P^2 = 60
/// (beta = 20). Frequency-domain definition with peak response 2, so a
/// real unit sinusoid at the analysis frequency yields a unit-magnitude
/// ridge.
struct MorseWavelet {
  double gamma = 3.0;
  double beta = 20.0;

  double peak_radian_freq() const;  // (beta/gamma)^(1/gamma)

  /// Frequency response at normalized radian frequency w >= 0.
  double response(double w) const;

  /// One-sigma time spread (seconds) of the wavelet tuned to freq_hz.
  double time_spread_s(double freq_hz) const;
};

/// |CWT| magnitudes, one row per analysis frequency, one column per time
/// sample. Zero-padded transform, frequency-domain implementation.
/// Throws Error(InvalidArgument) if a frequency is not in (0, Nyquist).
Eigen::MatrixXd cwt(const VibrationSignal& signal,
                    const std::vector<double>& frequencies_hz,
                    const MorseWavelet& wavelet = {});

/// Complex coefficients (same layout); the magnitude version above is
/// what downstream consumers use, this one exists for linearity checks.
Eigen::MatrixXcd cwt_complex(const VibrationSignal& signal,
                             const std::vector<double>& frequencies_hz,
                             const MorseWavelet& wavelet = {});

}  // namespace stepsense
