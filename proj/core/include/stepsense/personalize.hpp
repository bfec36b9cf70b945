#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stepsense/network.hpp"
#include "stepsense/train.hpp"

namespace stepsense {

/// Concatenation-layer activations (dropout off) of one person's samples.
struct EmbeddingSet {
  std::string person_id;
  std::vector<Eigen::VectorXd> embeddings;
};

/// One embedding per selected dataset row, grouped by person in first-
/// appearance order.
std::vector<EmbeddingSet> embed_dataset(const Network& network,
                                        const Standardizer& standardizer,
                                        const FeatureDataset& dataset,
                                        const std::vector<int>& indices);

/// Euclidean distance; throws on length mismatch.
double pairwise_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Mean distance over all pairs (target sample, train sample); throws
/// on an empty set.
double person_distance(const EmbeddingSet& target, const EmbeddingSet& train);

struct GaitSimilarity {
  std::string person_id;
  double mean_distance = 0.0;
  double gsi = 0.0;  // in (0, 1], 1 for the closest person
};

/// gsi_i = (1/(D_i+eps)) / max_j (1/(D_j+eps)); input order preserved.
std::vector<GaitSimilarity> gsi_all(
    const std::vector<std::pair<std::string, double>>& distances,
    double epsilon = 1e-9);

void write_gsi_csv(const std::vector<GaitSimilarity>& table,
                   const std::filesystem::path& path);

/// Per-row training weights for similarity-weighted fine-tuning: each
/// row gets its person's gsi; rows of `target_person` get weight 1.0.
/// Throws if a row's person has no gsi entry.
std::vector<double> personalization_weights(
    const FeatureDataset& dataset, const std::vector<int>& train_indices,
    const std::vector<GaitSimilarity>& gsi, const std::string& target_person);

/// Fine-tunes the (pruned) general model in place with gsi-derived
/// sample weights; prune masks stay frozen.
TrainResult fine_tune(Network& network, const Standardizer& standardizer,
                      const FeatureDataset& dataset, const TrainingView& view,
                      const TrainOptions& options);

}  // namespace stepsense
