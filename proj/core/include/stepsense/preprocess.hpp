#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stepsense/signal.hpp"
#include "stepsense/wavelet.hpp"

namespace stepsense {

struct DetectionConfig {
  double band_low_hz = 30.0;
  double band_high_hz = 70.0;
  double band_step_hz = 5.0;
  /// Threshold on the band-summed |CWT|: median + mad_factor * MAD.
  double mad_factor = 4.0;
  double min_step_period_s = 0.3;
};

/// Footstep peak indices: local maxima of the band-summed |CWT| above an
/// adaptive threshold, at least min_step_period apart, sorted ascending.
/// Peaks within half a wavelet support of either signal edge are dropped.
std::vector<std::int64_t> detect_footsteps(const VibrationSignal& signal,
                                           const DetectionConfig& config = {});

/// Cuts the [-0.15 s, +0.2 s) window around peak_index. Throws
/// Error(InvalidArgument) when the window does not fit inside the signal.
FootstepSegment segment_footstep(const VibrationSignal& signal,
                                 std::int64_t peak_index);

struct ClippedRun {
  std::int64_t start_index = 0;  // inclusive
  std::int64_t end_index = 0;    // inclusive
  enum class Polarity { Upper, Lower } polarity = Polarity::Upper;

  std::int64_t length() const { return end_index - start_index + 1; }
};

/// Maximal runs of samples pinned at +limit or -limit (within a relative
/// tolerance of 1e-9) with length >= min_run.
std::vector<ClippedRun> detect_clipping(const VibrationSignal& signal,
                                        double limit, int min_run = 3);

struct RepairResult {
  VibrationSignal signal;
  std::vector<std::string> warnings;  // runs left unrepaired, and why
};

/// Least-squares polynomial reconstruction of each clipped run from
/// n_neighbors unclipped samples on each side. Runs without enough
/// support on both sides are left at the limit and reported. Order 4 is
/// the lowest that tracks the even curvature of a symmetric clipped
/// excursion to within a few percent.
RepairResult repair_clipping(const VibrationSignal& signal,
                             const std::vector<ClippedRun>& runs,
                             int poly_order = 4, int n_neighbors = 8);

struct SegmentationOptions {
  DetectionConfig detection;
  /// When a clip limit is known, repair before segmenting.
  std::optional<double> clip_limit;
  bool repair_before_segmentation = true;
  int repair_poly_order = 4;
  int repair_n_neighbors = 8;
};

/// Full preprocessing of one signal: optional clipping repair, footstep
/// detection, segment extraction (boundary-violating peaks are dropped).
std::vector<FootstepSegment> preprocess_signal(
    const VibrationSignal& signal, const SegmentationOptions& options = {});

}  // namespace stepsense
