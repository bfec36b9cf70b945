#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stepsense/network.hpp"
#include "stepsense/pruning.hpp"

namespace stepsense {

enum class LossMode { WeightedMae, CrossEntropy };

struct TrainOptions {
  int epochs = 30;
  double learning_rate = 1e-3;
  int batch_size = 32;
  std::uint64_t seed = 0;
  LossMode loss = LossMode::WeightedMae;
  /// Cross-entropy class weights (one per output class); empty = uniform.
  std::vector<double> class_weights;
  /// Keep the parameters from the best-validation epoch of the final
  /// phase instead of the last epoch (no-op without a validation split).
  bool best_validation = true;
};

/// Σ w_i (|Δv_i| + |Δa_i|) / (2 Σ w_i). Throws Error(InvalidArgument)
/// on length mismatch or an all-zero weight vector.
double weighted_mae_loss(const std::vector<Eigen::VectorXd>& predictions,
                         const std::vector<Eigen::VectorXd>& labels,
                         const std::vector<double>& weights);

struct EpochRecord {
  int epoch = 0;           // 1-based, global across phases
  std::string phase;       // train | warmup | prune | finetune
  double train_loss = 0.0;
  double valid_loss = 0.0; // NaN when no validation split
  std::int64_t nonzero_weights = 0;
};

struct TrainResult {
  std::vector<EpochRecord> trace;
  int best_epoch = 0;
};

/// One view into a feature dataset: which rows to train and validate on,
/// per-row sample weights (indexed like dataset.samples; rows outside
/// the view are ignored) and, for cross-entropy, per-row class targets.
struct TrainingView {
  std::vector<int> train_indices;
  std::vector<int> valid_indices;
  std::vector<double> weights;      // empty = all 1.0
  std::vector<int> class_targets;   // required for CrossEntropy
};

/// Deterministic mini-batch training with the weighted MAE (or
/// cross-entropy) loss. When a pruning schedule is given the epochs
/// follow its three phases and options.epochs is ignored.
/// Throws Error(Numeric) naming epoch and batch if the loss goes
/// non-finite.
TrainResult train_network(Network& network, const Standardizer& standardizer,
                          const FeatureDataset& dataset,
                          const TrainingView& view, const TrainOptions& options,
                          const PruningSchedule* schedule = nullptr);

void write_loss_trace_csv(const std::vector<EpochRecord>& trace,
                          const std::filesystem::path& path);

}  // namespace stepsense
