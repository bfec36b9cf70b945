#pragma once

#include <filesystem>
#include <sstream>
#include <string>

namespace stepsense {

/// Minimal SVG emitter for the heatmap and the per-person bar charts.
class SvgWriter {
 public:
  SvgWriter(double width, double height);

  void rect(double x, double y, double w, double h, const std::string& fill);
  void text(double x, double y, const std::string& content, int font_size = 10);
  void line(double x1, double y1, double x2, double y2,
            const std::string& stroke = "#444444");

  /// Blue-white-red map for values in [-1, 1].
  static std::string diverging_color(double value);

  void save(const std::filesystem::path& path) const;

 private:
  double width_, height_;
  std::ostringstream body_;
};

}  // namespace stepsense
