#include "stepsense/personalize.hpp"

#include <cstdio>
#include <fstream>
#include <map>

#include "stepsense/error.hpp"

namespace stepsense {

std::vector<EmbeddingSet> embed_dataset(const Network& network,
                                        const Standardizer& standardizer,
                                        const FeatureDataset& dataset,
                                        const std::vector<int>& indices) {
  std::vector<EmbeddingSet> sets;
  std::map<std::string, std::size_t> by_person;
  for (int row : indices) {
    const FeatureSample& s = dataset.samples[static_cast<std::size_t>(row)];
    auto it = by_person.find(s.person_id);
    if (it == by_person.end()) {
      it = by_person.emplace(s.person_id, sets.size()).first;
      sets.push_back({s.person_id, {}});
    }
    const NetInput input = network.adapt(s.bundle, standardizer);
    sets[it->second].embeddings.push_back(network.forward(input).embedding);
  }
  return sets;
}

double pairwise_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size())
    fail(ErrorKind::InvalidArgument, "embedding length mismatch");
  return (a - b).norm();
}

double person_distance(const EmbeddingSet& target, const EmbeddingSet& train) {
  if (target.embeddings.empty() || train.embeddings.empty())
    fail(ErrorKind::InvalidArgument, "person_distance needs non-empty sets");
  double sum = 0.0;
  for (const auto& a : target.embeddings)
    for (const auto& b : train.embeddings) sum += pairwise_distance(a, b);
  return sum / (static_cast<double>(target.embeddings.size()) *
                static_cast<double>(train.embeddings.size()));
}

std::vector<GaitSimilarity> gsi_all(
    const std::vector<std::pair<std::string, double>>& distances,
    double epsilon) {
  if (distances.empty())
    fail(ErrorKind::InvalidArgument, "gsi_all needs at least one person");
  std::vector<GaitSimilarity> table;
  double max_inv = 0.0;
  for (const auto& [person, d] : distances) {
    if (d < 0.0)
      fail(ErrorKind::InvalidArgument, "negative distance for " + person);
    const double inv = 1.0 / (d + epsilon);
    table.push_back({person, d, inv});
    max_inv = std::max(max_inv, inv);
  }
  for (GaitSimilarity& g : table) g.gsi /= max_inv;
  return table;
}

void write_gsi_csv(const std::vector<GaitSimilarity>& table,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  out << "person_id,mean_distance,gsi\n";
  char buf[64];
  for (const GaitSimilarity& g : table) {
    std::snprintf(buf, sizeof(buf), ",%.9g,%.9g\n", g.mean_distance, g.gsi);
    out << g.person_id << buf;
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

std::vector<double> personalization_weights(
    const FeatureDataset& dataset, const std::vector<int>& train_indices,
    const std::vector<GaitSimilarity>& gsi, const std::string& target_person) {
  std::map<std::string, double> by_person;
  for (const GaitSimilarity& g : gsi) by_person[g.person_id] = g.gsi;
  std::vector<double> weights(dataset.samples.size(), 0.0);
  for (int row : train_indices) {
    const std::string& person =
        dataset.samples[static_cast<std::size_t>(row)].person_id;
    if (person == target_person) {
      weights[static_cast<std::size_t>(row)] = 1.0;
      continue;
    }
    auto it = by_person.find(person);
    if (it == by_person.end())
      fail(ErrorKind::InvalidArgument,
           "no gait similarity entry for person " + person);
    weights[static_cast<std::size_t>(row)] = it->second;
  }
  return weights;
}

TrainResult fine_tune(Network& network, const Standardizer& standardizer,
                      const FeatureDataset& dataset, const TrainingView& view,
                      const TrainOptions& options) {
  network.apply_masks();
  return train_network(network, standardizer, dataset, view, options);
}

}  // namespace stepsense
