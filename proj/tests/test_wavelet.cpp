#include <doctest.h>

#include <cmath>

#include "stepsense/error.hpp"
#include "stepsense/wavelet.hpp"

using namespace stepsense;

TEST_CASE("Morse peak radian frequency follows (beta/gamma)^(1/gamma)") {
  MorseWavelet w;
  CHECK(w.peak_radian_freq() ==
        doctest::Approx(std::pow(20.0 / 3.0, 1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("frequency response peaks at the peak frequency") {
  MorseWavelet w;
  const double wp = w.peak_radian_freq();
  const double at_peak = w.response(wp);
  CHECK(at_peak > w.response(wp * 0.9));
  CHECK(at_peak > w.response(wp * 1.1));
  CHECK(w.response(0.0) == 0.0);          // analytic: no DC
  CHECK(w.response(-1.0) == 0.0);         // no negative frequencies
  // numeric peak search confirms the analytic formula
  double best_w = 0.0, best = 0.0;
  for (double x = 0.01; x < 10.0; x += 0.001) {
    if (w.response(x) > best) {
      best = w.response(x);
      best_w = x;
    }
  }
  CHECK(best_w == doctest::Approx(wp).epsilon(1e-3));
}

TEST_CASE("CWT of a tone peaks at the tone frequency and is time-flat") {
  const double fs = 500.0;
  VibrationSignal signal;
  signal.sample_rate_hz = fs;
  for (int i = 0; i < 1000; ++i)
    signal.samples.push_back(std::sin(2.0 * M_PI * 40.0 * i / fs));

  std::vector<double> freqs;
  for (double f = 10.0; f <= 100.0; f += 5.0) freqs.push_back(f);
  const Eigen::MatrixXd m = cwt(signal, freqs);
  REQUIRE(m.rows() == static_cast<Eigen::Index>(freqs.size()));
  REQUIRE(m.cols() == 1000);

  Eigen::Index best_row = 0;
  double best = 0.0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double mid = m(r, 500);
    if (mid > best) {
      best = mid;
      best_row = r;
    }
  }
  CHECK(freqs[static_cast<std::size_t>(best_row)] == 40.0);
  // peak response 2 plus the one-sided analytic spectrum -> unit ridge
  // magnitude for a real unit sine
  CHECK(m(best_row, 500) == doctest::Approx(1.0).epsilon(0.02));
  // stationary input -> flat ridge away from the edges
  CHECK(m(best_row, 300) == doctest::Approx(m(best_row, 700)).epsilon(1e-6));
}

TEST_CASE("CWT is linear") {
  const double fs = 500.0;
  VibrationSignal a, b, sum;
  a.sample_rate_hz = b.sample_rate_hz = sum.sample_rate_hz = fs;
  for (int i = 0; i < 256; ++i) {
    const double va = std::sin(2.0 * M_PI * 30.0 * i / fs);
    const double vb = std::cos(2.0 * M_PI * 55.0 * i / fs);
    a.samples.push_back(va);
    b.samples.push_back(vb);
    sum.samples.push_back(va + 2.0 * vb);
  }
  const std::vector<double> freqs = {30.0, 55.0};
  const Eigen::MatrixXcd ca = cwt_complex(a, freqs);
  const Eigen::MatrixXcd cb = cwt_complex(b, freqs);
  const Eigen::MatrixXcd cs = cwt_complex(sum, freqs);
  CHECK((cs - ca - 2.0 * cb).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("CWT rejects out-of-range frequencies") {
  VibrationSignal signal;
  signal.sample_rate_hz = 500.0;
  signal.samples.assign(64, 0.0);
  CHECK_THROWS_AS(cwt(signal, {0.0}), Error);
  CHECK_THROWS_AS(cwt(signal, {250.0}), Error);
  CHECK_THROWS_AS(cwt(signal, {300.0}), Error);
  CHECK_NOTHROW(cwt(signal, {100.0}));
}

TEST_CASE("time spread shrinks with frequency") {
  MorseWavelet w;
  CHECK(w.time_spread_s(10.0) > w.time_spread_s(50.0));
  CHECK(w.time_spread_s(50.0) ==
        doctest::Approx(std::sqrt(20.0 * 3.0) / (2.0 * M_PI * 50.0))
            .epsilon(1e-12));
}
