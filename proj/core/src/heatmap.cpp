#include "stepsense/heatmap.hpp"

#include <cmath>
#include <fstream>

#include "stepsense/error.hpp"
#include "stepsense/svg.hpp"

namespace stepsense {

HeatmapResult feature_deviation_heatmap(const FeatureDataset& dataset) {
  if (dataset.samples.empty())
    fail(ErrorKind::InvalidArgument, "heatmap needs a non-empty dataset");

  HeatmapResult out;
  out.feature_names = dataset.layout.scalar_names;
  const int n_features = dataset.layout.scalar_dim();
  out.cells = Eigen::MatrixXd::Zero(n_features, kNumQuadrants);

  Eigen::VectorXd mean_all = Eigen::VectorXd::Zero(n_features);
  Eigen::VectorXd sq_all = Eigen::VectorXd::Zero(n_features);
  Eigen::MatrixXd mean_q = Eigen::MatrixXd::Zero(n_features, kNumQuadrants);
  Eigen::Vector4d counts = Eigen::Vector4d::Zero();

  for (const FeatureSample& s : dataset.samples) {
    const int q = static_cast<int>(quadrant_of(s.label));
    mean_all += s.bundle.scalars;
    sq_all += s.bundle.scalars.cwiseProduct(s.bundle.scalars);
    mean_q.col(q) += s.bundle.scalars;
    counts(q) += 1.0;
  }
  const double n = static_cast<double>(dataset.samples.size());
  mean_all /= n;
  for (int q = 0; q < kNumQuadrants; ++q) {
    if (counts(q) > 0.0)
      mean_q.col(q) /= counts(q);
    else
      out.warnings.push_back(std::string("empty quadrant ") +
                             quadrant_name(static_cast<EmotionQuadrant>(q)));
  }

  for (int f = 0; f < n_features; ++f) {
    const double variance =
        std::max(0.0, sq_all(f) / n - mean_all(f) * mean_all(f));
    const double stddev = std::sqrt(variance);
    double max_dev = 0.0;
    for (int q = 0; q < kNumQuadrants; ++q)
      if (counts(q) > 0.0)
        max_dev = std::max(max_dev, std::abs(mean_q(f, q) - mean_all(f)));
    const double denom = std::max({max_dev, stddev, 1e-300});
    if (max_dev == 0.0) continue;  // constant feature: all-zero row
    for (int q = 0; q < kNumQuadrants; ++q)
      if (counts(q) > 0.0)
        out.cells(f, q) = (mean_q(f, q) - mean_all(f)) / denom;
  }
  return out;
}

void write_heatmap_csv(const HeatmapResult& heatmap,
                       const std::filesystem::path& path,
                       const std::string& fingerprint) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  if (!fingerprint.empty()) out << "# config_fingerprint " << fingerprint << "\n";
  out << "feature,HVHA,HVLA,LVHA,LVLA\n";
  char buf[64];
  for (std::size_t f = 0; f < heatmap.feature_names.size(); ++f) {
    out << heatmap.feature_names[f];
    for (int q = 0; q < kNumQuadrants; ++q) {
      std::snprintf(buf, sizeof(buf), ",%.6f",
                    heatmap.cells(static_cast<Eigen::Index>(f), q));
      out << buf;
    }
    out << "\n";
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

void write_heatmap_svg(const HeatmapResult& heatmap,
                       const std::filesystem::path& path,
                       const std::string& fingerprint) {
  const int n = static_cast<int>(heatmap.feature_names.size());
  const double cell = 18.0, left = 160.0, top = 30.0;
  SvgWriter svg(left + kNumQuadrants * cell + 20.0, top + n * cell + 20.0);
  static const char* kCols[] = {"HVHA", "HVLA", "LVHA", "LVLA"};
  for (int q = 0; q < kNumQuadrants; ++q)
    svg.text(left + q * cell + 2.0, top - 8.0, kCols[q], 9);
  for (int f = 0; f < n; ++f) {
    svg.text(4.0, top + f * cell + 12.0,
             heatmap.feature_names[static_cast<std::size_t>(f)], 9);
    for (int q = 0; q < kNumQuadrants; ++q) {
      const double v = heatmap.cells(f, q);  // in [-1, 1]
      svg.rect(left + q * cell, top + f * cell, cell - 1.0, cell - 1.0,
               SvgWriter::diverging_color(v));
    }
  }
  if (!fingerprint.empty())
    svg.text(4.0, top + n * cell + 14.0, "config " + fingerprint, 8);
  svg.save(path);
}

}  // namespace stepsense
