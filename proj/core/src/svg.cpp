#include "stepsense/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "stepsense/error.hpp"

namespace stepsense {

SvgWriter::SvgWriter(double width, double height)
    : width_(width), height_(height) {}

void SvgWriter::rect(double x, double y, double w, double h,
                     const std::string& fill) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" "
                "fill=\"%s\"/>\n",
                x, y, w, h, fill.c_str());
  body_ << buf;
}

void SvgWriter::text(double x, double y, const std::string& content,
                     int font_size) {
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.1f\" y=\"%.1f\" font-size=\"%d\" "
                "font-family=\"sans-serif\">",
                x, y, font_size);
  body_ << buf << content << "</text>\n";
}

void SvgWriter::line(double x1, double y1, double x2, double y2,
                     const std::string& stroke) {
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                "stroke=\"%s\"/>\n",
                x1, y1, x2, y2, stroke.c_str());
  body_ << buf;
}

std::string SvgWriter::diverging_color(double value) {
  const double v = std::clamp(value, -1.0, 1.0);
  int r = 255, g = 255, b = 255;
  if (v > 0) {
    g = b = static_cast<int>(255.0 * (1.0 - v));
  } else {
    r = g = static_cast<int>(255.0 * (1.0 + v));
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

void SvgWriter::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_
      << "\" height=\"" << height_ << "\">\n"
      << body_.str() << "</svg>\n";
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace stepsense
