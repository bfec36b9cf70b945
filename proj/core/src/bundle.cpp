#include "stepsense/bundle.hpp"

#include <cmath>

#include "stepsense/error.hpp"
#include "stepsense/fft.hpp"

namespace stepsense {

namespace {

const std::vector<std::string> kGaitScalars = {
    "step_frequency", "double_support_time", "peak_ratio_hs_to",
    "fwhm_hs",        "fwhm_to",
};

const std::vector<std::string> kStatScalars = {
    "mean",          "median",     "std",         "max",
    "range",         "skewness",   "kurtosis",    "n_peaks",
    "n_valleys",     "autocorr_lag1", "max_rise_slope", "max_fall_slope",
};

const std::vector<std::string> kSpectralScalars = {
    "spectral_centroid", "spectral_crest",    "spectral_decrease",
    "spectral_entropy",  "spectral_flatness", "spectral_kurtosis",
    "spectral_skewness", "spectral_rolloff",  "spectral_slope",
};

const std::vector<std::string> kDeltaScalars = {
    "delta_centroid", "delta_crest",    "delta_decrease", "delta_entropy",
    "delta_flatness", "delta_kurtosis", "delta_skewness", "delta_rolloff",
    "delta_slope",    "spectral_flux",
};

const std::vector<std::string> kTimeDomainScalars = {
    "jitter", "shimmer", "jitter_rap", "zcr"};

int energy_contour_length(const FeatureConfig& config, double fs) {
  const int window = std::max(1, static_cast<int>(config.energy_window_s * fs + 0.5));
  return segment_length(fs) / window;
}

int f0_contour_length(const FeatureConfig& config, double fs) {
  const int n = segment_length(fs);
  if (n < config.stft_frame) return 0;
  return (n - config.stft_frame) / config.stft_hop + 1;
}

int fft_length(double fs) {
  return static_cast<int>(next_pow2(static_cast<std::size_t>(segment_length(fs)))) / 2 + 1;
}

}  // namespace

const char* feature_set_name(FeatureSet set) {
  switch (set) {
    case FeatureSet::Combined: return "combined";
    case FeatureSet::GaitOnly: return "gait_only";
    case FeatureSet::VibrationOnly: return "vibration_only";
  }
  return "?";
}

BundleLayout bundle_layout(const FeatureConfig& config, double fs,
                           FeatureSet set) {
  BundleLayout layout;
  const bool gait = set != FeatureSet::VibrationOnly;
  const bool vib = set != FeatureSet::GaitOnly;

  if (gait)
    layout.scalar_names.insert(layout.scalar_names.end(), kGaitScalars.begin(),
                               kGaitScalars.end());
  if (vib) {
    for (const auto* group :
         {&kStatScalars, &kSpectralScalars, &kDeltaScalars, &kTimeDomainScalars})
      layout.scalar_names.insert(layout.scalar_names.end(), group->begin(),
                                 group->end());
    layout.scalar_names.push_back("harmonic_ratio");
  }

  if (gait) {
    const int elen = energy_contour_length(config, fs);
    layout.sequences.push_back({"energy_raw", elen});
    layout.sequences.push_back({"energy_smoothed", elen});
    layout.sequences.push_back({"energy_log", elen});
  }
  if (vib) {
    layout.sequences.push_back({"f0_contour", f0_contour_length(config, fs)});
    layout.sequences.push_back({"fft_magnitudes", fft_length(fs)});
    layout.sequences.push_back({"cepstrum", config.cepstrum_len});
    layout.sequences.push_back({"lpc", config.lpc_order});
    layout.sequences.push_back({"legendre", config.legendre_order + 1});
    layout.images.push_back({"cwt_image", config.image_rows, config.image_cols});
    layout.images.push_back({"hht_image", config.image_rows, config.image_cols});
  }
  return layout;
}

bool FeatureBundle::matches(const BundleLayout& layout) const {
  if (scalars.size() != layout.scalar_dim()) return false;
  if (sequences.size() != layout.sequences.size()) return false;
  for (std::size_t i = 0; i < sequences.size(); ++i)
    if (sequences[i].size() != layout.sequences[i].length) return false;
  if (images.size() != layout.images.size()) return false;
  for (std::size_t i = 0; i < images.size(); ++i)
    if (images[i].rows() != layout.images[i].rows ||
        images[i].cols() != layout.images[i].cols)
      return false;
  return true;
}

BundleExtraction extract_bundle(const FootstepSegment& segment,
                                const TrajectoryContext& context,
                                const FeatureConfig& config, FeatureSet set) {
  BundleExtraction out;
  const double fs = segment.sample_rate_hz;
  const BundleLayout layout = bundle_layout(config, fs, set);
  const bool gait = set != FeatureSet::VibrationOnly;
  const bool vib = set != FeatureSet::GaitOnly;

  std::vector<double> scalars;
  auto push_vec = [&](const std::vector<double>& v, int expected) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(expected);
    for (int i = 0; i < expected && i < static_cast<int>(v.size()); ++i)
      e(i) = v[static_cast<std::size_t>(i)];
    out.bundle.sequences.push_back(std::move(e));
  };

  int seq_index = 0;
  if (gait) {
    double freq = 0.0;
    if (context.peak_times_s.size() >= 2) {
      freq = step_frequency(context.peak_times_s);
    } else {
      out.warnings.push_back("step_frequency: fewer than two peaks, 0");
    }
    const auto ds = double_support_time(segment, config);
    const auto pr = peak_ratio_and_fwhm(segment, config);
    for (const auto& w : ds.warnings) out.warnings.push_back(w);
    for (const auto& w : pr.warnings) out.warnings.push_back(w);
    scalars.insert(scalars.end(), {freq, ds.value, pr.peak_ratio_hs_to,
                                   pr.fwhm_hs, pr.fwhm_to});

    const EnergyContours energy = energy_contours(segment, config);
    push_vec(energy.raw, layout.sequences[seq_index++].length);
    push_vec(energy.smoothed, layout.sequences[seq_index++].length);
    push_vec(energy.log, layout.sequences[seq_index++].length);
  }

  if (vib) {
    const StatisticalFeatures st = statistical_features(segment);
    scalars.insert(scalars.end(),
                   {st.mean, st.median, st.std_dev, st.max, st.range,
                    st.skewness, st.kurtosis, st.n_peaks, st.n_valleys,
                    st.autocorr_lag1, st.max_rise_slope, st.max_fall_slope});

    const FrequencyFeatures fr = frequency_features(segment, config);
    std::vector<double> bin_freqs;
    const std::size_t nfft = next_pow2(segment.samples.size());
    for (std::size_t k = 0; k < fr.fft_magnitudes.size(); ++k)
      bin_freqs.push_back(static_cast<double>(k) * fs /
                          static_cast<double>(nfft));
    const auto shape = spectral_shape(fr.fft_magnitudes, bin_freqs);
    for (const auto& w : shape.warnings) out.warnings.push_back(w);
    const SpectralShape& s = shape.value;
    scalars.insert(scalars.end(),
                   {s.centroid, s.crest, s.decrease, s.entropy, s.flatness,
                    s.kurtosis, s.skewness, s.rolloff, s.slope});

    const DeltaSpectral ds = delta_spectral_features(segment, config);
    for (const auto& w : ds.warnings) out.warnings.push_back(w);
    scalars.insert(scalars.end(),
                   {ds.delta.centroid, ds.delta.crest, ds.delta.decrease,
                    ds.delta.entropy, ds.delta.flatness, ds.delta.kurtosis,
                    ds.delta.skewness, ds.delta.rolloff, ds.delta.slope,
                    ds.flux});

    const TimeDomainResult td = time_domain_features(segment);
    for (const auto& w : td.warnings) out.warnings.push_back(w);
    scalars.insert(scalars.end(), {td.value.jitter, td.value.shimmer,
                                   td.value.jitter_rap, td.value.zcr});
    scalars.push_back(fr.harmonic_ratio);

    const TimeFrequencyResult tf = time_frequency_features(segment, config);
    for (const auto& w : tf.warnings) out.warnings.push_back(w);
    const CompactResult cf = compact_features(segment, config);
    for (const auto& w : cf.warnings) out.warnings.push_back(w);

    push_vec(tf.value.f0_contour, layout.sequences[seq_index++].length);
    push_vec(fr.fft_magnitudes, layout.sequences[seq_index++].length);
    push_vec(fr.cepstrum, layout.sequences[seq_index++].length);
    push_vec(cf.value.lpc, layout.sequences[seq_index++].length);
    push_vec(cf.value.legendre, layout.sequences[seq_index++].length);
    out.bundle.images.push_back(tf.value.cwt_image);
    out.bundle.images.push_back(tf.value.hht_image);
  }

  out.bundle.scalars = Eigen::Map<const Eigen::VectorXd>(
      scalars.data(), static_cast<Eigen::Index>(scalars.size()));

  if (!out.bundle.matches(layout))
    fail(ErrorKind::Numeric, "bundle does not match the expected layout");
  for (Eigen::Index i = 0; i < out.bundle.scalars.size(); ++i)
    if (!std::isfinite(out.bundle.scalars(i)))
      fail(ErrorKind::Numeric, "non-finite scalar feature at slot " +
                                   layout.scalar_names[static_cast<std::size_t>(i)]);
  for (const auto& seq : out.bundle.sequences)
    if (!seq.allFinite()) fail(ErrorKind::Numeric, "non-finite sequence feature");
  for (const auto& img : out.bundle.images)
    if (!img.allFinite()) fail(ErrorKind::Numeric, "non-finite image feature");
  return out;
}

FeatureDataset restrict_dataset(const FeatureDataset& dataset, FeatureSet set) {
  if (set == FeatureSet::Combined) return dataset;
  const bool gait = set == FeatureSet::GaitOnly;
  const int n_gait_scalars = static_cast<int>(kGaitScalars.size());
  const int n_gait_seqs = 3;  // the three energy contours
  if (dataset.layout.scalar_dim() < n_gait_scalars ||
      static_cast<int>(dataset.layout.sequences.size()) < n_gait_seqs ||
      dataset.layout.scalar_names[0] != kGaitScalars[0] ||
      dataset.layout.sequences[0].name != "energy_raw")
    fail(ErrorKind::InvalidArgument,
         "restrict_dataset needs a combined-layout dataset");

  FeatureDataset out;
  out.sample_rate_hz = dataset.sample_rate_hz;
  out.fingerprint = dataset.fingerprint;
  const int s0 = gait ? 0 : n_gait_scalars;
  const int s1 = gait ? n_gait_scalars : dataset.layout.scalar_dim();
  const std::size_t q0 = gait ? 0 : static_cast<std::size_t>(n_gait_seqs);
  const std::size_t q1 = gait ? static_cast<std::size_t>(n_gait_seqs)
                              : dataset.layout.sequences.size();
  out.layout.scalar_names.assign(dataset.layout.scalar_names.begin() + s0,
                                 dataset.layout.scalar_names.begin() + s1);
  out.layout.sequences.assign(dataset.layout.sequences.begin() +
                                  static_cast<std::ptrdiff_t>(q0),
                              dataset.layout.sequences.begin() +
                                  static_cast<std::ptrdiff_t>(q1));
  if (!gait) out.layout.images = dataset.layout.images;

  for (const FeatureSample& s : dataset.samples) {
    FeatureSample r;
    r.label = s.label;
    r.person_id = s.person_id;
    r.trajectory_id = s.trajectory_id;
    r.bundle.scalars = s.bundle.scalars.segment(s0, s1 - s0);
    r.bundle.sequences.assign(s.bundle.sequences.begin() +
                                  static_cast<std::ptrdiff_t>(q0),
                              s.bundle.sequences.begin() +
                                  static_cast<std::ptrdiff_t>(q1));
    if (!gait) r.bundle.images = s.bundle.images;
    out.samples.push_back(std::move(r));
  }
  return out;
}

}  // namespace stepsense
