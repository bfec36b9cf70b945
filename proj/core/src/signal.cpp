#include "stepsense/signal.hpp"

#include <cmath>

#include "stepsense/error.hpp"

namespace stepsense {

const char* quadrant_name(EmotionQuadrant q) {
  switch (q) {
    case EmotionQuadrant::HVHA: return "HVHA";
    case EmotionQuadrant::HVLA: return "HVLA";
    case EmotionQuadrant::LVHA: return "LVHA";
    case EmotionQuadrant::LVLA: return "LVLA";
  }
  return "?";
}

std::optional<EmotionQuadrant> quadrant_from_name(const std::string& name) {
  if (name == "HVHA") return EmotionQuadrant::HVHA;
  if (name == "HVLA") return EmotionQuadrant::HVLA;
  if (name == "LVHA") return EmotionQuadrant::LVHA;
  if (name == "LVLA") return EmotionQuadrant::LVLA;
  return std::nullopt;
}

EmotionQuadrant quadrant_of(const EmotionLabel& label) {
  const bool high_v = label.valence > 5.0;
  const bool high_a = label.arousal > 5.0;
  if (high_v) return high_a ? EmotionQuadrant::HVHA : EmotionQuadrant::HVLA;
  return high_a ? EmotionQuadrant::LVHA : EmotionQuadrant::LVLA;
}

void VibrationSignal::validate() const {
  if (samples.empty()) fail(ErrorKind::InvalidArgument, "signal has no samples");
  if (!(sample_rate_hz > 0.0))
    fail(ErrorKind::InvalidArgument, "sample_rate_hz must be positive");
  for (double s : samples) {
    if (!std::isfinite(s))
      fail(ErrorKind::InvalidArgument, "signal contains a non-finite sample");
  }
}

}  // namespace stepsense
