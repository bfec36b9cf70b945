#include "stepsense/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace stepsense {

namespace {

// The FFTW planner is not thread-safe; execution of a plan is.
std::mutex planner_mutex;

std::vector<std::complex<double>> run_dft(
    const std::vector<std::complex<double>>& x, int sign) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> in(x), out(n);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex);
    plan = fftw_plan_dft_1d(static_cast<int>(n),
                            reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()), sign,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex);
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

std::vector<std::complex<double>> fft(
    const std::vector<std::complex<double>>& x) {
  if (x.empty()) return {};
  return run_dft(x, FFTW_FORWARD);
}

std::vector<std::complex<double>> ifft(
    const std::vector<std::complex<double>>& x) {
  if (x.empty()) return {};
  auto out = run_dft(x, FFTW_BACKWARD);
  const double inv = 1.0 / static_cast<double>(x.size());
  for (auto& v : out) v *= inv;
  return out;
}

std::vector<std::complex<double>> fft_real(const std::vector<double>& x) {
  std::vector<std::complex<double>> cx(x.begin(), x.end());
  return fft(cx);
}

std::vector<double> magnitude_spectrum(const std::vector<double>& x) {
  auto spec = fft_real(x);
  const std::size_t half = x.size() / 2 + 1;
  std::vector<double> mag(half);
  for (std::size_t k = 0; k < half; ++k) mag[k] = std::abs(spec[k]);
  return mag;
}

std::vector<std::complex<double>> analytic_signal(const std::vector<double>& x) {
  const std::size_t n = x.size();
  auto spec = fft_real(x);
  // Keep DC and Nyquist, double strictly-positive frequencies, zero the rest.
  for (std::size_t k = 1; k < n; ++k) {
    if (2 * k < n)
      spec[k] *= 2.0;
    else if (2 * k > n)
      spec[k] = 0.0;
  }
  return ifft(spec);
}

std::vector<double> band_envelope(const std::vector<double>& x, double fs,
                                  double low_hz, double high_hz) {
  const std::size_t n = x.size();
  auto spec = fft_real(x);
  const double df = fs / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double f = static_cast<double>(k) * df;
    const bool keep = 2 * k <= n && f >= low_hz && f <= high_hz;
    if (!keep)
      spec[k] = 0.0;
    else if (k != 0 && 2 * k != n)
      spec[k] *= 2.0;  // analytic form of the band-passed signal
  }
  auto analytic = ifft(spec);
  std::vector<double> env(n);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(analytic[i]);
  return env;
}

}  // namespace stepsense
