#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace stepsense {

struct EmdConfig {
  int max_imfs = 8;
  int max_sift_iterations = 100;
  /// Standard-deviation sifting stop criterion.
  double sd_threshold = 0.25;
};

struct EmdResult {
  std::vector<std::vector<double>> imfs;
  std::vector<double> residue;
  std::vector<std::string> warnings;
};

/// Empirical mode decomposition via sifting with natural cubic-spline
/// envelopes through the local extrema. By construction
/// sum(imfs) + residue reconstructs the input exactly (up to float
/// accumulation error).
EmdResult emd(const std::vector<double>& x, const EmdConfig& config = {});

/// Hilbert spectrum of the IMFs: squared instantaneous amplitude binned
/// over (instantaneous frequency, time) into a rows x cols image.
/// Frequency axis spans [0, sample_rate/2].
Eigen::MatrixXd hilbert_spectrum(const EmdResult& decomposition,
                                 double sample_rate_hz, int rows, int cols);

/// Natural cubic spline evaluated at every integer 0..n-1, given knots
/// (xs strictly increasing). Exposed for envelope tests.
std::vector<double> natural_spline(const std::vector<double>& xs,
                                   const std::vector<double>& ys, int n);

}  // namespace stepsense
