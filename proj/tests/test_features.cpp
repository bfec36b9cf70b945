#include <doctest.h>

#include <cmath>
#include <random>

#include "stepsense/error.hpp"
#include "stepsense/features.hpp"

using namespace stepsense;

namespace {

FootstepSegment make_segment(std::vector<double> samples, double fs = 500.0) {
  FootstepSegment segment;
  segment.samples = std::move(samples);
  segment.sample_rate_hz = fs;
  return segment;
}

std::vector<double> gabor_burst(double center_s, double carrier_hz,
                                double sigma_s, double amplitude, double fs,
                                int n) {
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs - center_s;
    out[static_cast<std::size_t>(i)] =
        amplitude * std::exp(-0.5 * t * t / (sigma_s * sigma_s)) *
        std::cos(2.0 * M_PI * carrier_hz * t);
  }
  return out;
}

}  // namespace

TEST_CASE("step frequency is 1 / mean interval") {
  CHECK(step_frequency({0.0, 0.5, 1.0, 1.5}) == doctest::Approx(2.0));
  CHECK(step_frequency({1.0, 1.4}) == doctest::Approx(2.5));
  CHECK_THROWS_AS(step_frequency({1.0}), Error);
  CHECK_THROWS_AS(step_frequency({1.0, 1.0}), Error);
}

TEST_CASE("zcr of a 10 Hz sine at 500 Hz over 1 s is exactly 20 per second") {
  std::vector<double> x(500);
  for (int i = 0; i < 500; ++i)
    x[static_cast<std::size_t>(i)] = std::sin(2.0 * M_PI * 10.0 * i / 500.0);
  const auto result = time_domain_features(make_segment(std::move(x)));
  CHECK(result.value.zcr == 20.0);
}

TEST_CASE("jitter and shimmer vanish for a perfectly periodic tone") {
  std::vector<double> x(500);
  for (int i = 0; i < 500; ++i)
    x[static_cast<std::size_t>(i)] = std::sin(2.0 * M_PI * 20.0 * i / 500.0);
  const auto result = time_domain_features(make_segment(std::move(x)));
  CHECK(result.value.jitter < 1e-3);
  CHECK(result.value.jitter_rap < 1e-3);
  CHECK(result.value.shimmer < 1e-3);
}

TEST_CASE("period modulation raises jitter") {
  // frequency-modulated tone: alternating long/short cycles
  std::vector<double> x;
  double phase = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double f = 20.0 * (1.0 + 0.1 * std::sin(2.0 * M_PI * 2.0 * i / 500.0));
    phase += 2.0 * M_PI * f / 500.0;
    x.push_back(std::sin(phase));
  }
  const auto result = time_domain_features(make_segment(std::move(x)));
  CHECK(result.value.jitter > 0.01);
}

TEST_CASE("too-short signals warn and zero the jitter family") {
  const auto result = time_domain_features(make_segment({0.1, -0.1, 0.1}));
  CHECK_FALSE(result.warnings.empty());
  CHECK(result.value.jitter == 0.0);
}

TEST_CASE("Gaussian envelope FWHM matches 2 sqrt(2 ln 2) sigma") {
  const double fs = 500.0;
  const double sigma = 0.015;
  for (double carrier : {150.0, 130.0}) {
    auto samples = gabor_burst(0.175, carrier, sigma, 1.0, fs, 175);
    const auto result = peak_ratio_and_fwhm(make_segment(std::move(samples)));
    const double expected = 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma;
    CHECK(std::abs(result.fwhm_hs - expected) <= 1.0 / fs);
  }
}

TEST_CASE("peak ratio reflects the band amplitudes") {
  const double fs = 500.0;
  auto hs = gabor_burst(0.1, 150.0, 0.01, 2.0, fs, 175);
  const auto toe = gabor_burst(0.22, 25.0, 0.02, 1.0, fs, 175);
  for (std::size_t i = 0; i < hs.size(); ++i) hs[i] += toe[i];
  const auto result = peak_ratio_and_fwhm(make_segment(std::move(hs)));
  CHECK(result.peak_ratio_hs_to == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("double support time recovers the planted burst lag") {
  const double fs = 500.0;
  auto hs = gabor_burst(0.08, 150.0, 0.008, 2.0, fs, 175);
  const auto toe = gabor_burst(0.08 + 0.12, 25.0, 0.017, 1.0, fs, 175);
  for (std::size_t i = 0; i < hs.size(); ++i) hs[i] += toe[i];
  const auto result = double_support_time(make_segment(std::move(hs)));
  CHECK(result.warnings.empty());
  CHECK(result.value == doctest::Approx(0.12).epsilon(0.15));
}

TEST_CASE("flat noise envelope warns instead of guessing a lag") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(0.0, 1e-4);
  std::vector<double> x(175);
  for (auto& v : x) v = dist(rng);
  const auto result = double_support_time(make_segment(std::move(x)));
  CHECK_FALSE(result.warnings.empty());
  CHECK(result.value == 0.0);
}

TEST_CASE("energy contours: lengths, windowing, log transform") {
  FeatureConfig config;
  std::vector<double> x(175, 2.0);  // constant power
  const auto contours = energy_contours(make_segment(std::move(x)), config);
  // 175 samples / 25-sample windows -> 7 windows
  REQUIRE(contours.raw.size() == 7);
  REQUIRE(contours.smoothed.size() == 7);
  REQUIRE(contours.log.size() == 7);
  for (double e : contours.raw) CHECK(e == doctest::Approx(100.0));  // 25 * 4
  for (std::size_t i = 0; i < 7; ++i)
    CHECK(contours.log[i] ==
          doctest::Approx(std::log(contours.smoothed[i] + config.log_epsilon)));
}

TEST_CASE("statistical features on a known array") {
  const auto s = statistical_features(
      make_segment({1.0, 3.0, 2.0, 5.0, 4.0, 4.0, 1.0}));
  CHECK(s.mean == doctest::Approx(20.0 / 7.0));
  CHECK(s.median == doctest::Approx(3.0));
  CHECK(s.max == doctest::Approx(5.0));
  CHECK(s.range == doctest::Approx(4.0));
  CHECK(s.n_peaks == 2.0);    // 3 and 5 are strict local maxima
  CHECK(s.n_valleys == 1.0);  // 2 is the strict local minimum
  // slopes are per second; the fall slope keeps its negative sign
  CHECK(s.max_rise_slope == doctest::Approx(3.0 * 500.0));  // 2 -> 5
  CHECK(s.max_fall_slope == doctest::Approx(-3.0 * 500.0));  // 4 -> 1
}

TEST_CASE("skewness and kurtosis match closed forms") {
  // symmetric two-point distribution: skewness 0, excess kurtosis -2
  const auto s = statistical_features(make_segment({1.0, -1.0, 1.0, -1.0}));
  CHECK(s.skewness == doctest::Approx(0.0));
  CHECK(s.kurtosis == doctest::Approx(-2.0));
  // constant signal: both zero by convention
  const auto c = statistical_features(make_segment({2.0, 2.0, 2.0}));
  CHECK(c.skewness == 0.0);
  CHECK(c.kurtosis == 0.0);
}

TEST_CASE("spectral shape of flat and single-bin spectra") {
  std::vector<double> flat(64, 1.0);
  std::vector<double> freqs(64);
  for (int k = 0; k < 64; ++k) freqs[static_cast<std::size_t>(k)] = k * 2.0;
  const auto flat_shape = spectral_shape(flat, freqs);
  CHECK(flat_shape.value.flatness == doctest::Approx(1.0));
  CHECK(flat_shape.value.centroid == doctest::Approx(63.0));  // mean freq
  CHECK(flat_shape.value.crest == doctest::Approx(1.0));  // max == mean

  std::vector<double> single(64, 0.0);
  single[10] = 3.0;
  const auto single_shape = spectral_shape(single, freqs);
  CHECK(single_shape.value.centroid == doctest::Approx(20.0));
  CHECK(single_shape.value.entropy == doctest::Approx(0.0));
  CHECK(single_shape.value.rolloff == doctest::Approx(20.0));

  const auto empty = spectral_shape(std::vector<double>(64, 0.0), freqs);
  CHECK_FALSE(empty.warnings.empty());
}

TEST_CASE("delta descriptors vanish on a stationary tone") {
  std::vector<double> x(175);
  for (int i = 0; i < 175; ++i)
    x[static_cast<std::size_t>(i)] = std::sin(2.0 * M_PI * 50.0 * i / 500.0);
  const auto result = delta_spectral_features(make_segment(std::move(x)));
  CHECK(result.delta.centroid < 1.0);
  CHECK(result.flux < 0.05);
}

TEST_CASE("spectral flux is large when content jumps") {
  std::vector<double> x(175);
  for (int i = 0; i < 175; ++i) {
    const double f = i < 88 ? 30.0 : 180.0;
    x[static_cast<std::size_t>(i)] = std::sin(2.0 * M_PI * f * i / 500.0);
  }
  const auto moving = delta_spectral_features(make_segment(std::move(x)));
  CHECK(moving.flux > 0.1);
}

TEST_CASE("fft magnitudes and cepstrum have the declared lengths") {
  std::vector<double> x(175, 0.0);
  x[80] = 1.0;
  FeatureConfig config;
  const auto result = frequency_features(make_segment(std::move(x)), config);
  CHECK(result.fft_magnitudes.size() == 129);  // next_pow2(175)/2 + 1
  CHECK(result.cepstrum.size() == 20);
}

TEST_CASE("harmonic ratio favors even harmonics when planted") {
  const double fs = 500.0;
  std::vector<double> even(350), odd(350);
  for (int i = 0; i < 350; ++i) {
    const double t = i / fs;
    // fundamental at 20 Hz; even multiples strong vs odd multiples strong
    even[static_cast<std::size_t>(i)] = std::sin(2 * M_PI * 20 * t) +
                                        2.0 * std::sin(2 * M_PI * 40 * t) +
                                        2.0 * std::sin(2 * M_PI * 80 * t);
    odd[static_cast<std::size_t>(i)] = std::sin(2 * M_PI * 20 * t) +
                                       2.0 * std::sin(2 * M_PI * 60 * t) +
                                       2.0 * std::sin(2 * M_PI * 100 * t);
  }
  const auto r_even = frequency_features(make_segment(std::move(even)));
  const auto r_odd = frequency_features(make_segment(std::move(odd)));
  CHECK(r_even.harmonic_ratio > r_odd.harmonic_ratio);
}

TEST_CASE("LPC recovers an AR(1) coefficient of 0.9 across seeds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> x(2000, 0.0);
    for (std::size_t i = 1; i < x.size(); ++i)
      x[i] = 0.9 * x[i - 1] + dist(rng);
    const auto a = lpc_coefficients(x, 12);
    REQUIRE(a.size() == 12);
    CHECK(std::abs(a[0] - 0.9) <= 0.05);
  }
}

TEST_CASE("LPC of silence is all zeros") {
  const auto a = lpc_coefficients(std::vector<double>(100, 0.0), 12);
  for (double v : a) CHECK(v == 0.0);
}

TEST_CASE("Legendre fit reproduces a polynomial exactly") {
  // x(t) = 2 P0 - 1.5 P1 + 0.5 P3 sampled on [-1, 1]
  const int n = 100;
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) {
    const double t = -1.0 + 2.0 * i / (n - 1.0);
    x[static_cast<std::size_t>(i)] =
        2.0 - 1.5 * t + 0.5 * (2.5 * t * t * t - 1.5 * t);
  }
  const auto c = legendre_coefficients(x, 10);
  REQUIRE(c.size() == 11);
  CHECK(c[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(c[1] == doctest::Approx(-1.5).epsilon(1e-9));
  CHECK(std::abs(c[2]) < 1e-9);
  CHECK(c[3] == doctest::Approx(0.5).epsilon(1e-9));
  for (std::size_t k = 4; k < c.size(); ++k) CHECK(std::abs(c[k]) < 1e-9);
}

TEST_CASE("time-frequency images have the configured shape") {
  std::vector<double> x(175);
  for (int i = 0; i < 175; ++i)
    x[static_cast<std::size_t>(i)] = std::sin(2.0 * M_PI * 40.0 * i / 500.0);
  const auto result = time_frequency_features(make_segment(std::move(x)));
  CHECK(result.value.cwt_image.rows() == 32);
  CHECK(result.value.cwt_image.cols() == 64);
  CHECK(result.value.hht_image.rows() == 32);
  CHECK(result.value.hht_image.cols() == 64);
  CHECK(result.value.f0_contour.size() == 9);
  // the CWT image of a 40 Hz tone has its energy off the lowest rows
  CHECK(result.value.cwt_image.maxCoeff() > 0.0);
}

TEST_CASE("f0 contour tracks the tone") {
  std::vector<double> x(175);
  for (int i = 0; i < 175; ++i)
    x[static_cast<std::size_t>(i)] = std::sin(2.0 * M_PI * 62.5 * i / 500.0);
  const auto result = time_frequency_features(make_segment(std::move(x)));
  for (double f : result.value.f0_contour)
    CHECK(f == doctest::Approx(62.5).epsilon(0.15));
}

TEST_CASE("zero signal produces finite, empty-ish features") {
  const auto tf = time_frequency_features(make_segment(std::vector<double>(175, 0.0)));
  CHECK(tf.value.cwt_image.allFinite());
  CHECK(tf.value.hht_image.allFinite());
  const auto cf = compact_features(make_segment(std::vector<double>(175, 0.0)));
  for (double v : cf.value.lpc) CHECK(v == 0.0);
}
