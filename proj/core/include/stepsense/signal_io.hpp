#pragma once

#include <filesystem>

#include "stepsense/signal.hpp"

namespace stepsense {

/// Format is inferred from the extension: ".csv" is text (one sample per
/// line under a `#META {json}` header), anything else is the binary
/// format (magic "VIBS1", length-prefixed metadata JSON, raw little-endian
/// float64 samples).
VibrationSignal read_signal(const std::filesystem::path& path);
void write_signal(const VibrationSignal& signal,
                  const std::filesystem::path& path);

/// Segment container files reuse the binary signal format, one record per
/// segment, with the peak index carried in the metadata.
std::vector<FootstepSegment> read_segments(const std::filesystem::path& path);
void write_segments(const std::vector<FootstepSegment>& segments,
                    const std::filesystem::path& path);

}  // namespace stepsense
