#pragma once

#include <filesystem>

#include "stepsense/bundle.hpp"

namespace stepsense {

/// Binary feature table: magic "FTAB1", length-prefixed JSON header
/// (layout, sample rate, fingerprint, row count), then row-major
/// float64 values per sample (scalars, sequences, images) preceded by a
/// small per-row JSON metadata record.
void write_feature_table(const FeatureDataset& dataset,
                         const std::filesystem::path& path);
FeatureDataset read_feature_table(const std::filesystem::path& path);

/// Scalar features only, one row per sample, with metadata columns.
void export_feature_csv(const FeatureDataset& dataset,
                        const std::filesystem::path& path);

}  // namespace stepsense
