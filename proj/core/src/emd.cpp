#include "stepsense/emd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stepsense/fft.hpp"

namespace stepsense {

namespace {

void find_extrema(const std::vector<double>& x, std::vector<int>* maxima,
                  std::vector<int>* minima) {
  maxima->clear();
  minima->clear();
  const int n = static_cast<int>(x.size());
  for (int i = 1; i + 1 < n; ++i) {
    if (x[i] > x[i - 1] && x[i] >= x[i + 1]) maxima->push_back(i);
    if (x[i] < x[i - 1] && x[i] <= x[i + 1]) minima->push_back(i);
  }
}

// Spline through extrema. The first and last extremum are mirrored
// across the signal edges; anchoring at the endpoint *values* instead
// pulls the envelope toward the signal there, and the resulting nonzero
// envelope mean injects low-frequency boundary swings that the sifting
// loop then amplifies.
std::vector<double> envelope(const std::vector<double>& x,
                             const std::vector<int>& extrema) {
  const int n = static_cast<int>(x.size());
  std::vector<double> xs, ys;
  if (!extrema.empty() && extrema.front() > 0) {
    xs.push_back(-static_cast<double>(extrema.front()));
    ys.push_back(x[static_cast<std::size_t>(extrema.front())]);
  }
  for (int i : extrema) {
    xs.push_back(static_cast<double>(i));
    ys.push_back(x[static_cast<std::size_t>(i)]);
  }
  if (!extrema.empty() && extrema.back() < n - 1) {
    xs.push_back(2.0 * (n - 1) - static_cast<double>(extrema.back()));
    ys.push_back(x[static_cast<std::size_t>(extrema.back())]);
  }
  return natural_spline(xs, ys, n);
}

}  // namespace

std::vector<double> natural_spline(const std::vector<double>& xs,
                                   const std::vector<double>& ys, int n) {
  const int k = static_cast<int>(xs.size());
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  if (k == 1) {
    std::fill(out.begin(), out.end(), ys[0]);
    return out;
  }
  if (k == 2) {
    const double slope = (ys[1] - ys[0]) / (xs[1] - xs[0]);
    for (int i = 0; i < n; ++i)
      out[static_cast<std::size_t>(i)] = ys[0] + slope * (i - xs[0]);
    return out;
  }

  // Second derivatives from the standard tridiagonal system (natural BCs).
  std::vector<double> h(k - 1);
  for (int i = 0; i < k - 1; ++i) h[i] = xs[i + 1] - xs[i];
  std::vector<double> a(k, 0.0), b(k, 0.0), c(k, 0.0), d(k, 0.0);
  b[0] = b[k - 1] = 1.0;
  for (int i = 1; i < k - 1; ++i) {
    a[i] = h[i - 1];
    b[i] = 2.0 * (h[i - 1] + h[i]);
    c[i] = h[i];
    d[i] = 6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1]);
  }
  // Thomas algorithm.
  for (int i = 1; i < k; ++i) {
    const double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    d[i] -= m * d[i - 1];
  }
  std::vector<double> m2(k);
  m2[k - 1] = d[k - 1] / b[k - 1];
  for (int i = k - 2; i >= 0; --i) m2[i] = (d[i] - c[i] * m2[i + 1]) / b[i];

  int seg = 0;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i);
    while (seg < k - 2 && t > xs[seg + 1]) ++seg;
    const double dx = xs[seg + 1] - xs[seg];
    const double u = (xs[seg + 1] - t) / dx;
    const double v = (t - xs[seg]) / dx;
    out[static_cast<std::size_t>(i)] =
        u * ys[seg] + v * ys[seg + 1] +
        ((u * u * u - u) * m2[seg] + (v * v * v - v) * m2[seg + 1]) *
            (dx * dx) / 6.0;
  }
  return out;
}

EmdResult emd(const std::vector<double>& x, const EmdConfig& config) {
  EmdResult result;
  std::vector<double> residue = x;
  const std::size_t n = x.size();
  if (n < 4) {
    result.residue = residue;
    result.warnings.push_back("signal too short for decomposition");
    return result;
  }

  std::vector<int> maxima, minima;
  for (int imf_index = 0; imf_index < config.max_imfs; ++imf_index) {
    find_extrema(residue, &maxima, &minima);
    if (maxima.size() < 2 || minima.size() < 2) break;  // monotone-ish residue

    std::vector<double> h = residue;
    bool converged = false;
    for (int it = 0; it < config.max_sift_iterations; ++it) {
      find_extrema(h, &maxima, &minima);
      if (maxima.size() < 2 || minima.size() < 2) break;
      const auto upper = envelope(h, maxima);
      const auto lower = envelope(h, minima);
      double sd = 0.0;
      std::vector<double> next(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double mean = 0.5 * (upper[i] + lower[i]);
        next[i] = h[i] - mean;
        const double denom = h[i] * h[i] + 1e-30;
        sd += mean * mean / denom;
      }
      h.swap(next);
      if (sd < config.sd_threshold) {
        converged = true;
        break;
      }
    }
    if (!converged)
      result.warnings.push_back("sifting did not converge for mode " +
                                std::to_string(imf_index));
    for (std::size_t i = 0; i < n; ++i) residue[i] -= h[i];
    result.imfs.push_back(std::move(h));
  }
  result.residue = std::move(residue);
  return result;
}

Eigen::MatrixXd hilbert_spectrum(const EmdResult& decomposition,
                                 double sample_rate_hz, int rows, int cols) {
  Eigen::MatrixXd image = Eigen::MatrixXd::Zero(rows, cols);
  const double nyquist = sample_rate_hz / 2.0;
  for (const auto& imf : decomposition.imfs) {
    const std::size_t n = imf.size();
    if (n < 3) continue;
    const auto analytic = analytic_signal(imf);
    for (std::size_t i = 1; i < n; ++i) {
      double dphase =
          std::arg(analytic[i]) - std::arg(analytic[i - 1]);
      while (dphase > std::numbers::pi) dphase -= 2.0 * std::numbers::pi;
      while (dphase < -std::numbers::pi) dphase += 2.0 * std::numbers::pi;
      const double freq =
          std::abs(dphase) * sample_rate_hz / (2.0 * std::numbers::pi);
      const double amp = std::abs(analytic[i]);
      int fr = static_cast<int>(freq / nyquist * rows);
      fr = std::clamp(fr, 0, rows - 1);
      int tc = static_cast<int>(static_cast<double>(i) / n * cols);
      tc = std::clamp(tc, 0, cols - 1);
      image(fr, tc) += amp * amp;
    }
  }
  return image;
}

}  // namespace stepsense
