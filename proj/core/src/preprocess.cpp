#include "stepsense/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "stepsense/error.hpp"

namespace stepsense {

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

}  // namespace

std::vector<std::int64_t> detect_footsteps(const VibrationSignal& signal,
                                           const DetectionConfig& config) {
  signal.validate();
  const double nyquist = signal.sample_rate_hz / 2.0;
  if (!(config.band_low_hz > 0.0) || !(config.band_high_hz > config.band_low_hz) ||
      config.band_high_hz >= nyquist)
    fail(ErrorKind::InvalidArgument, "detection band outside (0, Nyquist)");

  std::vector<double> freqs;
  for (double f = config.band_low_hz; f <= config.band_high_hz + 1e-9;
       f += config.band_step_hz)
    freqs.push_back(f);

  const MorseWavelet wavelet;
  const Eigen::MatrixXd coef = cwt(signal, freqs, wavelet);
  const Eigen::VectorXd band_sum = coef.colwise().sum();

  const std::int64_t n = band_sum.size();
  std::vector<double> values(band_sum.data(), band_sum.data() + n);
  const double med = median_of(values);
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    dev[i] = std::abs(values[i] - med);
  const double mad = median_of(dev);
  const double threshold = med + config.mad_factor * mad;

  // Half a wavelet support (3 sigma) at the band's lowest frequency.
  const std::int64_t edge_guard = static_cast<std::int64_t>(
      3.0 * wavelet.time_spread_s(config.band_low_hz) * signal.sample_rate_hz);

  struct Candidate {
    std::int64_t index;
    double value;
  };
  std::vector<Candidate> candidates;
  for (std::int64_t i = std::max<std::int64_t>(1, edge_guard);
       i < n - 1 - edge_guard; ++i) {
    if (band_sum[i] > threshold && band_sum[i] > band_sum[i - 1] &&
        band_sum[i] >= band_sum[i + 1])
      candidates.push_back({i, band_sum[i]});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.value > b.value;
                   });

  const std::int64_t min_gap = static_cast<std::int64_t>(
      config.min_step_period_s * signal.sample_rate_hz);
  std::vector<std::int64_t> accepted;
  for (const Candidate& c : candidates) {
    bool ok = true;
    for (std::int64_t a : accepted) {
      if (std::abs(a - c.index) < min_gap) {
        ok = false;
        break;
      }
    }
    if (ok) accepted.push_back(c.index);
  }
  std::sort(accepted.begin(), accepted.end());
  return accepted;
}

FootstepSegment segment_footstep(const VibrationSignal& signal,
                                 std::int64_t peak_index) {
  const double fs = signal.sample_rate_hz;
  const std::int64_t pre = std::llround(kSegmentPreS * fs);
  const std::int64_t post = std::llround(kSegmentPostS * fs);
  const std::int64_t begin = peak_index - pre;
  const std::int64_t end = peak_index + post;  // exclusive
  if (begin < 0 || end > static_cast<std::int64_t>(signal.samples.size()))
    fail(ErrorKind::InvalidArgument,
         "segment window [" + std::to_string(begin) + ", " +
             std::to_string(end) + ") outside signal bounds");

  FootstepSegment seg;
  seg.samples.assign(signal.samples.begin() + begin,
                     signal.samples.begin() + end);
  seg.sample_rate_hz = fs;
  seg.peak_index_in_signal = peak_index;
  seg.person_id = signal.person_id;
  seg.trajectory_id = signal.trajectory_id;
  seg.sensor_id = signal.sensor_id;
  seg.label = signal.label;
  return seg;
}

std::vector<ClippedRun> detect_clipping(const VibrationSignal& signal,
                                        double limit, int min_run) {
  if (!(limit > 0.0)) fail(ErrorKind::InvalidArgument, "clip limit must be > 0");
  const double tol = 1e-9 * limit;
  const auto& x = signal.samples;
  std::vector<ClippedRun> runs;
  std::size_t i = 0;
  while (i < x.size()) {
    int pol = 0;
    if (std::abs(x[i] - limit) <= tol)
      pol = +1;
    else if (std::abs(x[i] + limit) <= tol)
      pol = -1;
    if (pol == 0) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < x.size() &&
           std::abs(x[j] - (pol > 0 ? limit : -limit)) <= tol)
      ++j;
    if (j - i >= static_cast<std::size_t>(min_run)) {
      runs.push_back({static_cast<std::int64_t>(i),
                      static_cast<std::int64_t>(j - 1),
                      pol > 0 ? ClippedRun::Polarity::Upper
                              : ClippedRun::Polarity::Lower});
    }
    i = j;
  }
  return runs;
}

RepairResult repair_clipping(const VibrationSignal& signal,
                             const std::vector<ClippedRun>& runs,
                             int poly_order, int n_neighbors) {
  if (poly_order < 0 || n_neighbors < 1)
    fail(ErrorKind::InvalidArgument, "bad repair parameters");

  RepairResult result{signal, {}};
  if (runs.empty()) return result;

  const std::int64_t n = static_cast<std::int64_t>(signal.samples.size());
  std::vector<bool> clipped(signal.samples.size(), false);
  for (const ClippedRun& r : runs)
    for (std::int64_t i = r.start_index; i <= r.end_index; ++i)
      clipped[static_cast<std::size_t>(i)] = true;

  const int min_side = (poly_order + 2) / 2;  // ceil((order+1)/2)
  for (const ClippedRun& r : runs) {
    std::vector<std::int64_t> left, right;
    for (std::int64_t i = r.start_index - 1; i >= 0 &&
                                             static_cast<int>(left.size()) <
                                                 n_neighbors;
         --i) {
      if (clipped[static_cast<std::size_t>(i)]) break;  // adjacent run
      left.push_back(i);
    }
    for (std::int64_t i = r.end_index + 1;
         i < n && static_cast<int>(right.size()) < n_neighbors; ++i) {
      if (clipped[static_cast<std::size_t>(i)]) break;
      right.push_back(i);
    }
    if (static_cast<int>(left.size()) < min_side ||
        static_cast<int>(right.size()) < min_side) {
      result.warnings.push_back(
          "run [" + std::to_string(r.start_index) + ", " +
          std::to_string(r.end_index) +
          "] left unrepaired: insufficient unclipped neighbors");
      continue;
    }

    std::vector<std::int64_t> support(left.rbegin(), left.rend());
    support.insert(support.end(), right.begin(), right.end());

    // Least-squares polynomial in an index coordinate centered on the run
    // and scaled to ~[-1, 1] for conditioning.
    const double center = 0.5 * static_cast<double>(r.start_index + r.end_index);
    const double scale =
        std::max<double>(1.0, static_cast<double>(support.back()) - center);
    const int cols = poly_order + 1;
    Eigen::MatrixXd design(support.size(), cols);
    Eigen::VectorXd rhs(support.size());
    for (std::size_t row = 0; row < support.size(); ++row) {
      const double t = (static_cast<double>(support[row]) - center) / scale;
      double p = 1.0;
      for (int c = 0; c < cols; ++c) {
        design(static_cast<Eigen::Index>(row), c) = p;
        p *= t;
      }
      rhs(static_cast<Eigen::Index>(row)) =
          signal.samples[static_cast<std::size_t>(support[row])];
    }
    const Eigen::VectorXd coeffs =
        design.colPivHouseholderQr().solve(rhs);
    for (std::int64_t i = r.start_index; i <= r.end_index; ++i) {
      const double t = (static_cast<double>(i) - center) / scale;
      double p = 1.0, value = 0.0;
      for (int c = 0; c < cols; ++c) {
        value += coeffs(c) * p;
        p *= t;
      }
      result.signal.samples[static_cast<std::size_t>(i)] = value;
    }
  }
  return result;
}

std::vector<FootstepSegment> preprocess_signal(
    const VibrationSignal& signal, const SegmentationOptions& options) {
  VibrationSignal working = signal;
  if (options.repair_before_segmentation && options.clip_limit) {
    const auto runs = detect_clipping(working, *options.clip_limit);
    working = repair_clipping(working, runs, options.repair_poly_order,
                              options.repair_n_neighbors)
                  .signal;
  }
  const auto peaks = detect_footsteps(working, options.detection);
  std::vector<FootstepSegment> segments;
  segments.reserve(peaks.size());
  for (std::int64_t p : peaks) {
    try {
      segments.push_back(segment_footstep(working, p));
    } catch (const Error&) {
      // Window outside the signal: drop the footstep.
    }
  }
  return segments;
}

}  // namespace stepsense
