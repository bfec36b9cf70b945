#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stepsense/network.hpp"

namespace stepsense {

/// Three-phase iterative magnitude pruning: warmup trains unpruned,
/// the prune phase masks a fraction of the remaining weights after each
/// epoch, fine-tuning trains under the frozen final mask.
struct PruningSchedule {
  int warmup_epochs = 1;
  int prune_epochs = 0;
  int finetune_epochs = 0;
  double prune_fraction_per_epoch = 0.2;
  /// Whether the recurrent branch's weights participate in pruning.
  bool prune_lstm = true;

  int total_epochs() const {
    return warmup_epochs + prune_epochs + finetune_epochs;
  }

  /// Final retained fraction of prunable weights, (1-f)^prune_epochs.
  double final_retention() const;

  /// Throws Error(Config) on out-of-range fields or a schedule whose
  /// retention would round to zero weights for the given network.
  void validate(const Network& network) const;
};

/// Masks `fraction` of the currently unmasked prunable weights, ranked
/// globally by |weight| with ties broken by tensor-then-element index.
/// Returns the number of weights newly masked.
std::int64_t prune_step(Network& network, double fraction,
                        bool include_lstm = true);

struct SparsityRecord {
  int epoch = 0;
  std::string phase;  // warmup | prune | finetune
  std::int64_t nonzero = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
};

void write_sparsity_trace_csv(const std::vector<SparsityRecord>& trace,
                              const std::filesystem::path& path);

}  // namespace stepsense
