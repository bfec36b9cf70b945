#pragma once

#include <filesystem>
#include <string>

#include "stepsense/network.hpp"

namespace stepsense {

/// Versioned binary model checkpoint: magic "SNCK1", length-prefixed
/// JSON header (network config, bundle layout, standardizer, config
/// fingerprint), then per-tensor raw float64 values plus masks for
/// prunable tensors.
void save_checkpoint(const Network& network, const Standardizer& standardizer,
                     const std::string& fingerprint,
                     const std::filesystem::path& path);

struct LoadedCheckpoint {
  Network network;
  Standardizer standardizer;
  std::string fingerprint;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace stepsense
