#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stepsense/personalize.hpp"
#include "stepsense/train.hpp"

namespace stepsense {

/// Row indices into dataset.samples; whole trajectories stay together.
struct SplitIndices {
  std::vector<int> train, valid, test;
};

/// All of the target person's rows go to test; the other persons'
/// trajectories are shuffled and split 9:1 into train/valid.
SplitIndices split_scenario_a(const FeatureDataset& dataset,
                              const std::string& target_person,
                              std::uint64_t seed);

/// target_seconds worth of the target's trajectories (each assumed
/// trajectory_seconds long) join the train/valid pool; the rest of the
/// target's data is the test set. target_seconds = 0 degenerates to
/// Scenario A.
SplitIndices split_scenario_b(const FeatureDataset& dataset,
                              const std::string& target_person,
                              double target_seconds, double trajectory_seconds,
                              std::uint64_t seed);

/// Trajectory-atomic 9:1 train/valid split over the whole dataset
/// (empty test set); used when training a general model with no held-out
/// target person.
SplitIndices split_holdout(const FeatureDataset& dataset, std::uint64_t seed);

/// Elementwise median of per-footstep (valence, arousal) predictions;
/// even lengths average the middle two.
Eigen::Vector2d trajectory_score(const std::vector<Eigen::Vector2d>& preds);

struct Metrics {
  double mae_valence = 0.0, mae_arousal = 0.0;
  double pearson_valence = 0.0, pearson_arousal = 0.0;  // NaN when undefined
  double error_rate_valence = 0.0, error_rate_arousal = 0.0;  // MAE / 8
  std::vector<std::string> warnings;
};

Metrics compute_metrics(const std::vector<Eigen::Vector2d>& predictions,
                        const std::vector<Eigen::Vector2d>& truths);

struct TrajectoryPrediction {
  std::string trajectory_id, person_id;
  double predicted_valence = 0, predicted_arousal = 0;
  double true_valence = 0, true_arousal = 0;
  int n_footsteps = 0;
};

struct PersonResult {
  std::string person_id;
  Metrics metrics;
  std::vector<TrajectoryPrediction> trajectories;
};

struct EvaluationReport {
  std::string scenario;     // "A" or "B"
  std::string feature_set;  // combined | gait_only | vibration_only
  bool personalized = false;
  bool pruned = false;
  std::string fingerprint;
  std::vector<PersonResult> per_person;
  Metrics overall;  // pooled over every test trajectory
};

struct StudyOptions {
  std::string scenario = "B";
  FeatureSet feature_set = FeatureSet::Combined;
  bool personalized = true;
  bool pruned = true;
  NetworkConfig network;
  TrainOptions training;
  PruningSchedule schedule;
  int finetune_epochs = 10;
  /// Step size of the personalization pass, decoupled from the initial
  /// training rate.
  double finetune_learning_rate = 1e-3;
  double gsi_epsilon = 1e-9;
  double target_seconds = 60.0;
  double trajectory_seconds = 12.0;
  /// Persons evaluated as target; empty = every person in the dataset.
  std::vector<std::string> target_persons;
  std::uint64_t seed = 0;
};

/// Trains and evaluates one pipeline configuration, looping over the
/// target persons and pooling their trajectory-median predictions.
EvaluationReport run_study(const FeatureDataset& dataset,
                           const StudyOptions& options);

/// Gait-only features, general model, no personalization.
EvaluationReport run_baseline(const FeatureDataset& dataset,
                              const StudyOptions& options);

/// {combined, gait_only, vibration_only} x {personalized, general}
/// x {pruned, unpruned}, all sharing splits and seeds.
std::vector<EvaluationReport> run_ablations(const FeatureDataset& dataset,
                                            const StudyOptions& options);

struct ClassificationReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  Eigen::MatrixXd confusion;  // rows = truth, cols = prediction, HVHA..LVLA
  std::string fingerprint;
};

/// Swaps the regression head for a 4-way quadrant softmax; optional
/// inverse-frequency class weights in the cross-entropy loss.
ClassificationReport classify_quadrants(const FeatureDataset& dataset,
                                        const StudyOptions& options,
                                        bool weight_classes = true);

void write_report_json(const EvaluationReport& report,
                       const std::filesystem::path& path);
void write_report_summary_csv(const std::vector<EvaluationReport>& reports,
                              const std::filesystem::path& path);
void write_confusion_csv(const ClassificationReport& report,
                         const std::filesystem::path& path);
/// Per-person MAE bar chart (valence and arousal side by side).
void write_person_bar_svg(const EvaluationReport& report,
                          const std::filesystem::path& path);

}  // namespace stepsense
