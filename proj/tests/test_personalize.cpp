#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "stepsense/error.hpp"
#include "stepsense/personalize.hpp"

using namespace stepsense;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

BundleLayout mini_layout() {
  BundleLayout layout;
  layout.scalar_names = {"a", "b", "c"};
  layout.sequences = {{"s", 5}};
  layout.images = {{"img", 6, 8}};
  return layout;
}

NetworkConfig mini_config() {
  NetworkConfig config;
  config.dense_widths = {4};
  config.lstm_units = 2;
  config.seq_timesteps = 4;
  config.conv_channels = {2, 2, 2, 2};
  config.head_widths = {5};
  config.output_dim = 2;
  config.seed = 11;
  return config;
}

FeatureDataset mini_dataset(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  FeatureDataset dataset;
  dataset.layout = mini_layout();
  for (int k = 0; k < n; ++k) {
    FeatureSample sample;
    sample.bundle.scalars = Eigen::VectorXd::Zero(3);
    for (int i = 0; i < 3; ++i) sample.bundle.scalars(i) = dist(rng);
    Eigen::VectorXd seq(5);
    for (int i = 0; i < 5; ++i) seq(i) = dist(rng);
    sample.bundle.sequences.push_back(seq);
    Eigen::MatrixXd img(6, 8);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 8; ++c) img(r, c) = dist(rng);
    sample.bundle.images.push_back(img);
    sample.label = {5.0, 5.0};
    sample.person_id = "p" + std::to_string(k % 3);
    sample.trajectory_id = sample.person_id + "_t0";
    dataset.samples.push_back(std::move(sample));
  }
  return dataset;
}

}  // namespace

TEST_CASE("pairwise distance worked example and symmetry") {
  CHECK(pairwise_distance(vec({1.0, 2.0}), vec({2.0, 2.0})) ==
        doctest::Approx(1.0));
  CHECK(pairwise_distance(vec({0.0, 3.0, 4.0}), vec({0.0, 0.0, 0.0})) ==
        doctest::Approx(5.0));
  CHECK_THROWS_AS(pairwise_distance(vec({1.0}), vec({1.0, 2.0})), Error);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd a(6), b(6);
    for (int i = 0; i < 6; ++i) {
      a(i) = dist(rng);
      b(i) = dist(rng);
    }
    CHECK(pairwise_distance(a, b) == doctest::Approx(pairwise_distance(b, a)));
    CHECK(pairwise_distance(a, a) == doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("person distance averages over all cross pairs") {
  EmbeddingSet target{"t", {vec({0.0}), vec({2.0})}};
  EmbeddingSet train{"u", {vec({1.0}), vec({3.0})}};
  // pairs: |0-1|, |0-3|, |2-1|, |2-3| -> (1+3+1+1)/4
  CHECK(person_distance(target, train) == doctest::Approx(1.5));

  EmbeddingSet single{"s", {vec({1.0, 2.0})}};
  EmbeddingSet other{"o", {vec({2.0, 2.0})}};
  CHECK(person_distance(single, other) == doctest::Approx(1.0));

  EmbeddingSet empty{"e", {}};
  CHECK_THROWS_AS(person_distance(empty, train), Error);
  CHECK_THROWS_AS(person_distance(target, empty), Error);
}

TEST_CASE("person distance matches a brute-force oracle") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    EmbeddingSet a{"a", {}};
    EmbeddingSet b{"b", {}};
    const int ka = 1 + static_cast<int>(rng() % 5);
    const int kb = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < ka; ++i) {
      Eigen::VectorXd v(4);
      for (int j = 0; j < 4; ++j) v(j) = dist(rng);
      a.embeddings.push_back(v);
    }
    for (int i = 0; i < kb; ++i) {
      Eigen::VectorXd v(4);
      for (int j = 0; j < 4; ++j) v(j) = dist(rng);
      b.embeddings.push_back(v);
    }
    double acc = 0.0;
    for (const auto& u : a.embeddings)
      for (const auto& w : b.embeddings) acc += (u - w).norm();
    acc /= static_cast<double>(ka * kb);
    CHECK(person_distance(a, b) == doctest::Approx(acc));
  }
}

TEST_CASE("gsi is the normalized inverse distance") {
  const auto table = gsi_all({{"a", 2.0}, {"b", 4.0}, {"c", 8.0}});
  REQUIRE(table.size() == 3);
  CHECK(table[0].person_id == "a");
  CHECK(table[0].gsi == doctest::Approx(1.0));
  CHECK(table[1].gsi == doctest::Approx(0.5));
  CHECK(table[2].gsi == doctest::Approx(0.25));
  for (const auto& row : table) CHECK(row.mean_distance > 0.0);
}

TEST_CASE("gsi handles single persons and zero distance") {
  const auto solo = gsi_all({{"only", 3.7}});
  REQUIRE(solo.size() == 1);
  CHECK(solo[0].gsi == doctest::Approx(1.0));

  // a zero distance saturates at gsi 1 without dividing by zero
  const auto zero = gsi_all({{"same", 0.0}, {"far", 1.0}});
  CHECK(zero[0].gsi == doctest::Approx(1.0));
  CHECK(std::isfinite(zero[0].gsi));
  CHECK(zero[1].gsi > 0.0);
  CHECK(zero[1].gsi < 1e-6);  // 1e-9 / (1 + 1e-9)
}

TEST_CASE("gsi is invariant to a common distance scale") {
  const auto a = gsi_all({{"x", 1.0}, {"y", 3.0}, {"z", 9.0}});
  const auto b = gsi_all({{"x", 100.0}, {"y", 300.0}, {"z", 900.0}});
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i].gsi == doctest::Approx(b[i].gsi).epsilon(1e-6));
}

TEST_CASE("embedding sets group rows by person in first appearance order") {
  const FeatureDataset dataset = mini_dataset(9, 1);
  const Network net(dataset.layout, mini_config());
  const Standardizer s = Standardizer::fit(dataset, {0, 1, 2, 3, 4, 5, 6, 7, 8});
  const auto sets = embed_dataset(net, s, dataset, {0, 1, 2, 3, 4, 5, 6, 7, 8});
  REQUIRE(sets.size() == 3);
  CHECK(sets[0].person_id == "p0");
  CHECK(sets[1].person_id == "p1");
  CHECK(sets[2].person_id == "p2");
  for (const auto& set : sets) {
    CHECK(set.embeddings.size() == 3);
    for (const auto& e : set.embeddings) {
      CHECK(e.size() == net.embedding_dim());
      CHECK(e.allFinite());
    }
  }
  // embeddings are deterministic (dropout off)
  const auto again = embed_dataset(net, s, dataset, {0, 1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(again[0].embeddings[0] == sets[0].embeddings[0]);
}

TEST_CASE("personalization weights give the target 1.0 and others their gsi") {
  const FeatureDataset dataset = mini_dataset(9, 2);
  const std::vector<GaitSimilarity> gsi = {{"p0", 2.0, 0.4},
                                           {"p1", 1.0, 1.0},
                                           {"p2", 4.0, 0.2}};
  const std::vector<int> train = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  const auto weights = personalization_weights(dataset, train, gsi, "p1");
  REQUIRE(weights.size() == dataset.samples.size());
  for (int i : train) {
    const auto& person = dataset.samples[static_cast<std::size_t>(i)].person_id;
    const double expected = person == "p1" ? 1.0 : (person == "p0" ? 0.4 : 0.2);
    CHECK(weights[static_cast<std::size_t>(i)] == doctest::Approx(expected));
  }
}

TEST_CASE("rows of an unknown person are rejected") {
  const FeatureDataset dataset = mini_dataset(3, 3);
  const std::vector<GaitSimilarity> gsi = {{"p0", 1.0, 1.0}};
  CHECK_THROWS_AS(personalization_weights(dataset, {0, 1, 2}, gsi, "p0"),
                  Error);
}

TEST_CASE("uniform gsi weighting reproduces unweighted fine-tuning") {
  FeatureDataset dataset = mini_dataset(12, 4);
  const std::vector<int> train = {0, 1, 2, 3, 4, 5, 6, 7};
  const Standardizer s = Standardizer::fit(dataset, train);
  TrainOptions options;
  options.epochs = 3;

  auto run = [&](std::vector<double> weights) {
    Network net(dataset.layout, mini_config());
    TrainingView view;
    view.train_indices = train;
    view.weights = std::move(weights);
    return fine_tune(net, s, dataset, view, options);
  };
  std::vector<double> ones(dataset.samples.size(), 1.0);
  const TrainResult weighted = run(ones);
  const TrainResult unweighted = run({});
  REQUIRE(weighted.trace.size() == unweighted.trace.size());
  for (std::size_t i = 0; i < weighted.trace.size(); ++i)
    CHECK(weighted.trace[i].train_loss ==
          doctest::Approx(unweighted.trace[i].train_loss).epsilon(1e-12));
}

TEST_CASE("fine-tuning preserves prune masks") {
  FeatureDataset dataset = mini_dataset(8, 5);
  const std::vector<int> train = {0, 1, 2, 3, 4, 5, 6, 7};
  const Standardizer s = Standardizer::fit(dataset, train);
  Network net(dataset.layout, mini_config());
  prune_step(net, 0.5);
  const auto before = net.unmasked_weight_count();
  std::vector<Eigen::MatrixXd> masks;
  for (const auto& t : net.tensors()) masks.push_back(t.mask);

  TrainingView view;
  view.train_indices = train;
  TrainOptions options;
  options.epochs = 4;
  fine_tune(net, s, dataset, view, options);

  CHECK(net.unmasked_weight_count() == before);
  std::size_t k = 0;
  for (const auto& t : net.tensors()) {
    CHECK(t.mask == masks[k]);
    if (t.prunable)
      for (Eigen::Index i = 0; i < t.value.size(); ++i)
        if (t.mask(i) == 0.0) CHECK(t.value(i) == 0.0);
    ++k;
  }
}

TEST_CASE("gsi CSV lists every person") {
  const std::filesystem::path path = "gsi_test.csv";
  write_gsi_csv({{"p0", 1.5, 1.0}, {"p1", 3.0, 0.5}}, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line.find("person") != std::string::npos);
  int rows = 0;
  bool saw_p1 = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    if (line.find("p1") != std::string::npos) saw_p1 = true;
  }
  CHECK(rows == 2);
  CHECK(saw_p1);
  std::filesystem::remove(path);
}
