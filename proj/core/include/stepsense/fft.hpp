#pragma once

#include <complex>
#include <vector>

namespace stepsense {

/// Forward DFT, X[k] = sum_n x[n] exp(-2 pi i k n / N). Any N >= 1.
std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x);

/// Inverse DFT including the 1/N factor.
std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& x);

std::vector<std::complex<double>> fft_real(const std::vector<double>& x);

/// One-sided magnitude spectrum of a real signal (length N/2 + 1).
std::vector<double> magnitude_spectrum(const std::vector<double>& x);

/// Analytic signal via the frequency-domain method (zero negative
/// frequencies, double positive ones).
std::vector<std::complex<double>> analytic_signal(const std::vector<double>& x);

/// Magnitude envelope of the signal band-passed to [low_hz, high_hz]
/// (hard brick-wall in the frequency domain, then analytic magnitude).
std::vector<double> band_envelope(const std::vector<double>& x, double fs,
                                  double low_hz, double high_hz);

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace stepsense
