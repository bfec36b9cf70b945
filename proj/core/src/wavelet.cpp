#include "stepsense/wavelet.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "stepsense/error.hpp"
#include "stepsense/fft.hpp"

namespace stepsense {

double MorseWavelet::peak_radian_freq() const {
  return std::pow(beta / gamma, 1.0 / gamma);
}

double MorseWavelet::response(double w) const {
  if (w <= 0.0) return 0.0;
  const double wp = peak_radian_freq();
  // 2 * (w/wp)^beta * exp(-(w^gamma - wp^gamma)), evaluated in log space.
  const double log_r = beta * (std::log(w) - std::log(wp)) -
                       (std::pow(w, gamma) - std::pow(wp, gamma));
  return 2.0 * std::exp(log_r);
}

double MorseWavelet::time_spread_s(double freq_hz) const {
  return std::sqrt(beta * gamma) / (2.0 * std::numbers::pi * freq_hz);
}

Eigen::MatrixXcd cwt_complex(const VibrationSignal& signal,
                             const std::vector<double>& frequencies_hz,
                             const MorseWavelet& wavelet) {
  signal.validate();
  const double fs = signal.sample_rate_hz;
  const double nyquist = fs / 2.0;
  for (double f : frequencies_hz) {
    if (!(f > 0.0) || f >= nyquist)
      fail(ErrorKind::InvalidArgument,
           "analysis frequency " + std::to_string(f) +
               " Hz outside (0, Nyquist)");
  }

  const std::size_t n = signal.samples.size();
  const std::size_t padded = next_pow2(2 * n);
  std::vector<std::complex<double>> x(padded, 0.0);
  for (std::size_t i = 0; i < n; ++i) x[i] = signal.samples[i];
  const auto spectrum = fft(x);

  const double wp = wavelet.peak_radian_freq();
  Eigen::MatrixXcd coef(static_cast<Eigen::Index>(frequencies_hz.size()),
                        static_cast<Eigen::Index>(n));
  std::vector<std::complex<double>> prod(padded);
  for (std::size_t r = 0; r < frequencies_hz.size(); ++r) {
    // Scale chosen so the wavelet's peak response sits at frequencies_hz[r].
    const double scale = wp * fs / (2.0 * std::numbers::pi * frequencies_hz[r]);
    for (std::size_t k = 0; k < padded; ++k) {
      // Only non-negative frequencies carry response (analytic wavelet).
      const double w =
          2.0 * std::numbers::pi * static_cast<double>(k) / padded;
      const double h = (2 * k <= padded) ? wavelet.response(scale * w) : 0.0;
      prod[k] = spectrum[k] * h;
    }
    const auto row = ifft(prod);
    for (std::size_t i = 0; i < n; ++i)
      coef(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = row[i];
  }
  return coef;
}

Eigen::MatrixXd cwt(const VibrationSignal& signal,
                    const std::vector<double>& frequencies_hz,
                    const MorseWavelet& wavelet) {
  return cwt_complex(signal, frequencies_hz, wavelet).cwiseAbs();
}

}  // namespace stepsense
