#include "stepsense/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "stepsense/error.hpp"
#include "stepsense/fft.hpp"
#include "stepsense/wavelet.hpp"

namespace stepsense {

namespace {

constexpr double kTiny = 1e-300;

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

double median_sorted_copy(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

// Peak location and FWHM (linear interpolation at half maximum) of a
// non-negative envelope. Returns {peak_index, width_in_samples}.
struct EnvelopePeak {
  double peak_value = 0.0;
  int peak_index = 0;
  double fwhm_samples = 0.0;
};

EnvelopePeak envelope_peak_fwhm(const std::vector<double>& env) {
  EnvelopePeak out;
  const int n = static_cast<int>(env.size());
  for (int i = 0; i < n; ++i) {
    if (env[static_cast<std::size_t>(i)] > out.peak_value) {
      out.peak_value = env[static_cast<std::size_t>(i)];
      out.peak_index = i;
    }
  }
  if (out.peak_value <= 0.0) return out;
  const double half = 0.5 * out.peak_value;
  double left = 0.0, right = static_cast<double>(n - 1);
  for (int i = out.peak_index; i >= 0; --i) {
    if (env[static_cast<std::size_t>(i)] < half) {
      const double a = env[static_cast<std::size_t>(i)];
      const double b = env[static_cast<std::size_t>(i + 1)];
      left = i + (half - a) / (b - a);
      break;
    }
    if (i == 0) left = 0.0;
  }
  for (int i = out.peak_index; i < n; ++i) {
    if (env[static_cast<std::size_t>(i)] < half) {
      const double a = env[static_cast<std::size_t>(i - 1)];
      const double b = env[static_cast<std::size_t>(i)];
      right = (i - 1) + (a - half) / (a - b);
      break;
    }
    if (i == n - 1) right = static_cast<double>(n - 1);
  }
  out.fwhm_samples = std::max(1.0, right - left);
  return out;
}

bool envelope_is_flat(const std::vector<double>& env,
                      const EnvelopePeak& peak) {
  // A genuine burst towers over the window mean; band-limited noise does
  // not get far past 3x.
  return peak.peak_value <= 5.0 * mean_of(env) || peak.peak_value < 1e-12;
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    w[static_cast<std::size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  return w;
}

// Short-time magnitude frames (Hann window, no zero padding beyond the
// frame) with the corresponding bin frequencies.
struct Stft {
  std::vector<std::vector<double>> frames;
  std::vector<double> bin_freqs;
};

Stft stft_magnitudes(const FootstepSegment& segment,
                     const FeatureConfig& config) {
  Stft out;
  const int frame = config.stft_frame;
  const int hop = config.stft_hop;
  const int n = static_cast<int>(segment.samples.size());
  const auto window = hann_window(frame);
  const int half = frame / 2 + 1;
  for (int k = 0; k < half; ++k)
    out.bin_freqs.push_back(static_cast<double>(k) * segment.sample_rate_hz /
                            frame);
  for (int start = 0; start + frame <= n; start += hop) {
    std::vector<double> buf(static_cast<std::size_t>(frame));
    for (int i = 0; i < frame; ++i)
      buf[static_cast<std::size_t>(i)] =
          segment.samples[static_cast<std::size_t>(start + i)] *
          window[static_cast<std::size_t>(i)];
    out.frames.push_back(magnitude_spectrum(buf));
  }
  return out;
}

// Positive-going zero crossing times (seconds, linear interpolation) and
// the sample index just after each crossing.
struct Crossings {
  std::vector<double> times_s;
  std::vector<int> indices;
};

Crossings positive_crossings(const std::vector<double>& x, double fs) {
  Crossings out;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const bool prev_pos = x[i - 1] > 0.0;
    const bool cur_pos = x[i] > 0.0;
    if (!prev_pos && cur_pos) {
      const double denom = x[i] - x[i - 1];
      const double frac = denom != 0.0 ? -x[i - 1] / denom : 0.0;
      out.times_s.push_back((static_cast<double>(i - 1) + frac) / fs);
      out.indices.push_back(static_cast<int>(i));
    }
  }
  return out;
}

Eigen::MatrixXd downsample_columns(const Eigen::MatrixXd& m, int cols) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), cols);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    int bin = static_cast<int>(static_cast<double>(c) / m.cols() * cols);
    bin = std::min(bin, cols - 1);
    out.col(bin) += m.col(c);
    counts[bin] += 1.0;
  }
  for (int c = 0; c < cols; ++c)
    if (counts[c] > 0.0) out.col(c) /= counts[c];
  return out;
}

}  // namespace

double step_frequency(const std::vector<double>& peak_times_s) {
  if (peak_times_s.size() < 2)
    fail(ErrorKind::InvalidArgument,
         "step frequency needs at least two footstep peaks");
  const double span = peak_times_s.back() - peak_times_s.front();
  if (!(span > 0.0))
    fail(ErrorKind::InvalidArgument, "footstep peaks must be increasing");
  const double mean_interval =
      span / static_cast<double>(peak_times_s.size() - 1);
  return 1.0 / mean_interval;
}

ScalarWithWarnings double_support_time(const FootstepSegment& segment,
                                       const FeatureConfig& config) {
  ScalarWithWarnings out;
  const double fs = segment.sample_rate_hz;
  const auto high_env =
      band_envelope(segment.samples, fs, config.ds_high_low, config.ds_high_high);
  const auto low_env =
      band_envelope(segment.samples, fs, config.ds_low_low, config.ds_low_high);
  const auto high_peak = envelope_peak_fwhm(high_env);
  const auto low_peak = envelope_peak_fwhm(low_env);
  // Gate on the heel-strike band only: a genuine step always towers over
  // that band's noise floor, whereas the 10 Hz-wide toe-off band smears
  // even a sharp burst so much that no peak/mean test separates it from
  // noise. Its peak location is still reliable once a step is present.
  if (envelope_is_flat(high_env, high_peak) || low_peak.peak_value < 1e-12) {
    out.warnings.push_back("double_support_time: flat band envelope");
    return out;
  }
  out.value = (low_peak.peak_index - high_peak.peak_index) / fs;
  return out;
}

PeakRatioFwhm peak_ratio_and_fwhm(const FootstepSegment& segment,
                                  const FeatureConfig& config) {
  PeakRatioFwhm out;
  const double fs = segment.sample_rate_hz;
  const auto high_env =
      band_envelope(segment.samples, fs, config.hs_band_low, config.hs_band_high);
  const auto low_env =
      band_envelope(segment.samples, fs, config.to_band_low, config.to_band_high);
  const auto high_peak = envelope_peak_fwhm(high_env);
  const auto low_peak = envelope_peak_fwhm(low_env);
  if (low_peak.peak_value < 1e-12) {
    out.peak_ratio_hs_to = config.peak_ratio_cap;
    out.warnings.push_back("peak_ratio: zero toe-off envelope, ratio capped");
  } else {
    out.peak_ratio_hs_to =
        std::min(config.peak_ratio_cap, high_peak.peak_value / low_peak.peak_value);
  }
  out.fwhm_hs = high_peak.fwhm_samples / fs;
  out.fwhm_to = low_peak.fwhm_samples / fs;
  return out;
}

EnergyContours energy_contours(const FootstepSegment& segment,
                               const FeatureConfig& config) {
  EnergyContours out;
  const int window =
      std::max(1, static_cast<int>(config.energy_window_s *
                                       segment.sample_rate_hz +
                                   0.5));
  const int n = static_cast<int>(segment.samples.size());
  for (int start = 0; start + window <= n; start += window) {
    double e = 0.0;
    for (int i = start; i < start + window; ++i)
      e += segment.samples[static_cast<std::size_t>(i)] *
           segment.samples[static_cast<std::size_t>(i)];
    out.raw.push_back(e);
  }
  const int span = std::max(
      1, static_cast<int>(config.energy_smooth_span_s / config.energy_window_s +
                          0.5));
  const int m = static_cast<int>(out.raw.size());
  for (int i = 0; i < m; ++i) {
    const int lo = std::max(0, i - span / 2);
    const int hi = std::min(m - 1, i + span / 2);
    double s = 0.0;
    for (int j = lo; j <= hi; ++j) s += out.raw[static_cast<std::size_t>(j)];
    out.smoothed.push_back(s / (hi - lo + 1));
  }
  for (double e : out.raw) out.log.push_back(std::log(e + config.log_epsilon));
  return out;
}

StatisticalFeatures statistical_features(const FootstepSegment& segment) {
  StatisticalFeatures f;
  const auto& x = segment.samples;
  const double n = static_cast<double>(x.size());
  if (x.empty()) return f;

  f.mean = mean_of(x);
  f.median = median_sorted_copy(x);
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  f.max = *mx;
  f.range = *mx - *mn;

  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - f.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  f.std_dev = std::sqrt(m2);
  // Degenerate-variance convention: both shape moments are 0.
  if (m2 > 1e-24) {
    f.skewness = m3 / std::pow(m2, 1.5);
    f.kurtosis = m4 / (m2 * m2) - 3.0;
  }

  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    if (x[i] > x[i - 1] && x[i] > x[i + 1]) f.n_peaks += 1.0;
    if (x[i] < x[i - 1] && x[i] < x[i + 1]) f.n_valleys += 1.0;
  }

  if (m2 > 1e-24 && x.size() > 1) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - f.mean;
      den += d * d;
      if (i + 1 < x.size()) num += d * (x[i + 1] - f.mean);
    }
    f.autocorr_lag1 = num / den;
  }

  const double fs = segment.sample_rate_hz;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double slope = (x[i] - x[i - 1]) * fs;
    f.max_rise_slope = std::max(f.max_rise_slope, slope);
    f.max_fall_slope = std::min(f.max_fall_slope, slope);
  }
  return f;
}

SpectralShapeResult spectral_shape(const std::vector<double>& spectrum,
                                   const std::vector<double>& bin_freqs_hz) {
  SpectralShapeResult out;
  if (spectrum.size() != bin_freqs_hz.size())
    fail(ErrorKind::InvalidArgument, "spectrum / bin frequency length mismatch");
  const std::size_t n = spectrum.size();
  double total_mag = 0.0, total_energy = 0.0, max_mag = 0.0;
  for (double m : spectrum) {
    if (m < 0.0)
      fail(ErrorKind::InvalidArgument, "spectrum magnitudes must be >= 0");
    total_mag += m;
    total_energy += m * m;
    max_mag = std::max(max_mag, m);
  }
  if (total_energy <= kTiny) {
    out.warnings.push_back("spectral_shape: all-zero spectrum");
    return out;
  }
  SpectralShape& s = out.value;

  // Energy-weighted frequency moments.
  double centroid = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    centroid += bin_freqs_hz[k] * spectrum[k] * spectrum[k];
  centroid /= total_energy;
  s.centroid = centroid;

  double var = 0.0, sk = 0.0, ku = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double p = spectrum[k] * spectrum[k] / total_energy;
    const double d = bin_freqs_hz[k] - centroid;
    var += p * d * d;
    sk += p * d * d * d;
    ku += p * d * d * d * d;
  }
  if (var > 1e-24) {
    s.skewness = sk / std::pow(var, 1.5);
    s.kurtosis = ku / (var * var) - 3.0;
  }

  s.crest = max_mag / (total_mag / static_cast<double>(n));

  double log_sum = 0.0;
  for (double m : spectrum) log_sum += std::log(m + kTiny);
  s.flatness = std::exp(log_sum / static_cast<double>(n)) /
               (total_mag / static_cast<double>(n));

  for (std::size_t k = 0; k < n; ++k) {
    const double p = spectrum[k] * spectrum[k] / total_energy;
    if (p > 0.0) s.entropy -= p * std::log(p);
  }

  double cum = 0.0;
  s.rolloff = bin_freqs_hz.back();
  for (std::size_t k = 0; k < n; ++k) {
    cum += spectrum[k] * spectrum[k];
    if (cum >= 0.85 * total_energy) {
      s.rolloff = bin_freqs_hz[k];
      break;
    }
  }

  // Linear regression of magnitude on frequency.
  const double fmean = mean_of(bin_freqs_hz);
  const double mmean = total_mag / static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    num += (bin_freqs_hz[k] - fmean) * (spectrum[k] - mmean);
    den += (bin_freqs_hz[k] - fmean) * (bin_freqs_hz[k] - fmean);
  }
  if (den > 0.0) s.slope = num / den;

  if (n > 1 && total_mag > spectrum[0]) {
    double dec = 0.0;
    for (std::size_t k = 1; k < n; ++k)
      dec += (spectrum[k] - spectrum[0]) / static_cast<double>(k);
    s.decrease = dec / (total_mag - spectrum[0]);
  }
  return out;
}

DeltaSpectral delta_spectral_features(const FootstepSegment& segment,
                                      const FeatureConfig& config) {
  DeltaSpectral out;
  const Stft stft = stft_magnitudes(segment, config);
  if (stft.frames.size() < 2) {
    out.warnings.push_back("delta_spectral: too few frames");
    return out;
  }

  std::vector<SpectralShape> shapes;
  for (const auto& frame : stft.frames) {
    auto r = spectral_shape(frame, stft.bin_freqs);
    shapes.push_back(r.value);
  }

  auto accumulate_delta = [&](auto member) {
    double acc = 0.0;
    for (std::size_t i = 1; i < shapes.size(); ++i)
      acc += std::abs(shapes[i].*member - shapes[i - 1].*member);
    return acc / static_cast<double>(shapes.size() - 1);
  };
  out.delta.centroid = accumulate_delta(&SpectralShape::centroid);
  out.delta.crest = accumulate_delta(&SpectralShape::crest);
  out.delta.decrease = accumulate_delta(&SpectralShape::decrease);
  out.delta.entropy = accumulate_delta(&SpectralShape::entropy);
  out.delta.flatness = accumulate_delta(&SpectralShape::flatness);
  out.delta.kurtosis = accumulate_delta(&SpectralShape::kurtosis);
  out.delta.skewness = accumulate_delta(&SpectralShape::skewness);
  out.delta.rolloff = accumulate_delta(&SpectralShape::rolloff);
  out.delta.slope = accumulate_delta(&SpectralShape::slope);

  double flux = 0.0;
  for (std::size_t i = 1; i < stft.frames.size(); ++i) {
    const auto& a = stft.frames[i - 1];
    const auto& b = stft.frames[i];
    double na = 0.0, nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      na += a[k] * a[k];
      nb += b[k] * b[k];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double da = na > 0.0 ? a[k] / na : 0.0;
      const double db = nb > 0.0 ? b[k] / nb : 0.0;
      d += (da - db) * (da - db);
    }
    flux += std::sqrt(d);
  }
  out.flux = flux / static_cast<double>(stft.frames.size() - 1);
  return out;
}

TimeDomainResult time_domain_features(const FootstepSegment& segment) {
  TimeDomainResult out;
  const auto& x = segment.samples;
  const double fs = segment.sample_rate_hz;

  // Both-direction crossings per second.
  long crossings = 0;
  for (std::size_t i = 1; i < x.size(); ++i)
    if ((x[i] > 0.0) != (x[i - 1] > 0.0)) ++crossings;
  out.value.zcr =
      static_cast<double>(crossings) / (static_cast<double>(x.size()) / fs);

  const Crossings cycles = positive_crossings(x, fs);
  if (cycles.times_s.size() < 4) {  // < 3 full cycles
    out.warnings.push_back("time_domain: fewer than 3 cycles, jitter family 0");
    return out;
  }
  std::vector<double> periods;
  for (std::size_t i = 1; i < cycles.times_s.size(); ++i)
    periods.push_back(cycles.times_s[i] - cycles.times_s[i - 1]);
  const double mean_period = mean_of(periods);

  double jitter = 0.0;
  for (std::size_t i = 1; i < periods.size(); ++i)
    jitter += std::abs(periods[i] - periods[i - 1]);
  out.value.jitter =
      jitter / static_cast<double>(periods.size() - 1) / mean_period;

  if (periods.size() >= 3) {
    double rap = 0.0;
    for (std::size_t i = 1; i + 1 < periods.size(); ++i) {
      const double local =
          (periods[i - 1] + periods[i] + periods[i + 1]) / 3.0;
      rap += std::abs(periods[i] - local);
    }
    out.value.jitter_rap =
        rap / static_cast<double>(periods.size() - 2) / mean_period;
  }

  // Per-cycle positive peak amplitudes.
  std::vector<double> amps;
  for (std::size_t c = 1; c < cycles.indices.size(); ++c) {
    double peak = 0.0;
    for (int i = cycles.indices[c - 1]; i < cycles.indices[c]; ++i)
      peak = std::max(peak, x[static_cast<std::size_t>(i)]);
    amps.push_back(peak);
  }
  const double mean_amp = mean_of(amps);
  if (amps.size() >= 2 && mean_amp > 0.0) {
    double shimmer = 0.0;
    for (std::size_t i = 1; i < amps.size(); ++i)
      shimmer += std::abs(amps[i] - amps[i - 1]);
    out.value.shimmer =
        shimmer / static_cast<double>(amps.size() - 1) / mean_amp;
  }
  return out;
}

FrequencyFeatures frequency_features(const FootstepSegment& segment,
                                     const FeatureConfig& config) {
  FrequencyFeatures out;
  const std::size_t nfft = next_pow2(segment.samples.size());
  const auto window = hann_window(static_cast<int>(segment.samples.size()));
  std::vector<double> buf(nfft, 0.0);
  for (std::size_t i = 0; i < segment.samples.size(); ++i)
    buf[i] = segment.samples[i] * window[i];
  out.fft_magnitudes = magnitude_spectrum(buf);

  const double df = segment.sample_rate_hz / static_cast<double>(nfft);

  // Harmonic ratio: even-to-odd harmonic energy of the fundamental found
  // in the configured low band.
  std::size_t f0_bin = 0;
  double best = 0.0;
  for (std::size_t k = 1; k < out.fft_magnitudes.size(); ++k) {
    const double f = static_cast<double>(k) * df;
    if (f < config.fundamental_low || f > config.fundamental_high) continue;
    if (out.fft_magnitudes[k] > best) {
      best = out.fft_magnitudes[k];
      f0_bin = k;
    }
  }
  if (f0_bin > 0) {
    auto harmonic_energy = [&](std::size_t h) {
      const std::size_t center = h * f0_bin;
      double e = 0.0;
      for (std::size_t k = center > 0 ? center - 1 : 0;
           k <= center + 1 && k < out.fft_magnitudes.size(); ++k)
        e += out.fft_magnitudes[k] * out.fft_magnitudes[k];
      return e;
    };
    double even = 0.0, odd = 0.0;
    for (std::size_t h = 1; h <= 8; ++h)
      (h % 2 == 0 ? even : odd) += harmonic_energy(h);
    out.harmonic_ratio = even / (odd + 1e-12);
  }

  // Real cepstrum, first K coefficients.
  auto spec = fft_real(buf);
  std::vector<std::complex<double>> log_mag(nfft);
  for (std::size_t k = 0; k < nfft; ++k)
    log_mag[k] = std::log(std::abs(spec[k]) + 1e-30);
  const auto ceps = ifft(log_mag);
  const int keep = std::min<int>(config.cepstrum_len, static_cast<int>(nfft));
  for (int k = 0; k < keep; ++k)
    out.cepstrum.push_back(ceps[static_cast<std::size_t>(k)].real());
  out.cepstrum.resize(static_cast<std::size_t>(config.cepstrum_len), 0.0);
  return out;
}

TimeFrequencyResult time_frequency_features(const FootstepSegment& segment,
                                            const FeatureConfig& config) {
  TimeFrequencyResult out;
  const double fs = segment.sample_rate_hz;

  double max_abs = 0.0;
  for (double v : segment.samples) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs < 1e-15) {
    out.warnings.push_back("time_frequency: zero signal");
    out.value.cwt_image =
        Eigen::MatrixXd::Zero(config.image_rows, config.image_cols);
    out.value.hht_image =
        Eigen::MatrixXd::Zero(config.image_rows, config.image_cols);
    const Stft stft0 = stft_magnitudes(segment, config);
    out.value.f0_contour.assign(stft0.frames.size(), 0.0);
    return out;
  }

  // CWT image: log-spaced analysis frequencies, time averaged to the
  // configured width.
  std::vector<double> freqs;
  const double f_low = config.cwt_freq_low;
  const double f_high = 0.45 * fs;
  for (int r = 0; r < config.image_rows; ++r) {
    const double t = static_cast<double>(r) / (config.image_rows - 1);
    freqs.push_back(f_low * std::pow(f_high / f_low, t));
  }
  VibrationSignal as_signal;
  as_signal.samples = segment.samples;
  as_signal.sample_rate_hz = fs;
  out.value.cwt_image =
      downsample_columns(cwt(as_signal, freqs), config.image_cols);

  EmdResult decomposition = emd(segment.samples, config.emd);
  for (auto& w : decomposition.warnings) out.warnings.push_back("emd: " + w);
  out.value.hht_image = hilbert_spectrum(decomposition, fs, config.image_rows,
                                         config.image_cols);

  const Stft stft = stft_magnitudes(segment, config);
  for (const auto& frame : stft.frames) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < frame.size(); ++k)
      if (frame[k] > frame[best]) best = k;
    out.value.f0_contour.push_back(stft.bin_freqs[best]);
  }
  return out;
}

std::vector<double> lpc_coefficients(const std::vector<double>& x, int order) {
  std::vector<double> r(static_cast<std::size_t>(order) + 1, 0.0);
  const std::size_t n = x.size();
  for (int lag = 0; lag <= order; ++lag)
    for (std::size_t i = static_cast<std::size_t>(lag); i < n; ++i)
      r[static_cast<std::size_t>(lag)] +=
          x[i] * x[i - static_cast<std::size_t>(lag)];

  std::vector<double> a(static_cast<std::size_t>(order), 0.0);
  if (r[0] <= 1e-24) return a;  // zero signal

  // Levinson-Durbin recursion.
  double err = r[0];
  for (int i = 0; i < order; ++i) {
    double acc = r[static_cast<std::size_t>(i) + 1];
    for (int j = 0; j < i; ++j)
      acc -= a[static_cast<std::size_t>(j)] * r[static_cast<std::size_t>(i - j)];
    const double k = acc / err;
    std::vector<double> prev(a.begin(), a.begin() + i);
    a[static_cast<std::size_t>(i)] = k;
    for (int j = 0; j < i; ++j)
      a[static_cast<std::size_t>(j)] =
          prev[static_cast<std::size_t>(j)] -
          k * prev[static_cast<std::size_t>(i - 1 - j)];
    err *= (1.0 - k * k);
    if (err <= 0.0) break;
  }
  return a;
}

std::vector<double> legendre_coefficients(const std::vector<double>& x,
                                          int order) {
  const int n = static_cast<int>(x.size());
  const int cols = order + 1;
  Eigen::MatrixXd design(n, cols);
  for (int i = 0; i < n; ++i) {
    const double t = n > 1 ? -1.0 + 2.0 * i / (n - 1) : 0.0;
    // Bonnet recursion for P_0..P_order.
    double p_prev = 1.0, p_cur = t;
    design(i, 0) = 1.0;
    if (cols > 1) design(i, 1) = t;
    for (int k = 2; k < cols; ++k) {
      const double p_next =
          ((2.0 * k - 1.0) * t * p_cur - (k - 1.0) * p_prev) / k;
      design(i, k) = p_next;
      p_prev = p_cur;
      p_cur = p_next;
    }
  }
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs(i) = x[static_cast<std::size_t>(i)];
  const Eigen::VectorXd c = design.colPivHouseholderQr().solve(rhs);
  return std::vector<double>(c.data(), c.data() + cols);
}

CompactResult compact_features(const FootstepSegment& segment,
                               const FeatureConfig& config) {
  CompactResult out;
  out.value.lpc = lpc_coefficients(segment.samples, config.lpc_order);
  bool all_zero = true;
  for (double v : out.value.lpc)
    if (v != 0.0) all_zero = false;
  if (all_zero) {
    double e = 0.0;
    for (double v : segment.samples) e += v * v;
    if (e <= 1e-24)
      out.warnings.push_back("compact: singular autocorrelation, zero LPC");
  }
  out.value.legendre =
      legendre_coefficients(segment.samples, config.legendre_order);
  return out;
}

}  // namespace stepsense
