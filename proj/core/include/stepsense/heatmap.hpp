#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "stepsense/bundle.hpp"

namespace stepsense {

/// Per-feature, per-quadrant normalized deviation of the scalar features.
/// cells(f, q) = (mean_q - mean_all) / denom_f with denom_f the larger of
/// the row's max |deviation| and the feature's overall std, so rows whose
/// quadrant means only wobble within noise stay near zero. Values lie in
/// [-1, 1]. Column order: HVHA, HVLA, LVHA, LVLA.
struct HeatmapResult {
  std::vector<std::string> feature_names;
  Eigen::MatrixXd cells;
  std::vector<std::string> warnings;
};

HeatmapResult feature_deviation_heatmap(const FeatureDataset& dataset);

void write_heatmap_csv(const HeatmapResult& heatmap,
                       const std::filesystem::path& path,
                       const std::string& fingerprint = "");
void write_heatmap_svg(const HeatmapResult& heatmap,
                       const std::filesystem::path& path,
                       const std::string& fingerprint = "");

}  // namespace stepsense
