#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "stepsense/checkpoint.hpp"
#include "stepsense/error.hpp"
#include "stepsense/pipeline_config.hpp"
#include "stepsense/pruning.hpp"

using namespace stepsense;

TEST_CASE("defaults validate and carry the published parameter values") {
  PipelineConfig config;
  CHECK_NOTHROW(config.validate());
  CHECK(config.network.dense_widths == std::vector<int>{64});
  CHECK(config.network.lstm_units == 4);
  CHECK(config.network.conv_channels == std::vector<int>{4, 4, 8, 8});
  CHECK(config.network.dropout_rate == 0.5);
  CHECK(config.training.learning_rate == 1e-3);
  CHECK(config.training.batch_size == 32);
  CHECK(config.segmentation.detection.band_low_hz == 30.0);
  CHECK(config.segmentation.detection.band_high_hz == 70.0);
  CHECK(config.segmentation.detection.min_step_period_s == 0.3);
  CHECK(config.scenario == "B");
  CHECK(config.feature_set == "combined");
}

TEST_CASE("serialization round-trips every field") {
  PipelineConfig config;
  config.seed = 99;
  config.corpus.n_persons = 7;
  config.segmentation.detection.mad_factor = 3.5;
  config.segmentation.repair_poly_order = 5;
  config.features.lpc_order = 10;
  config.network.lstm_units = 6;
  config.training.epochs = 17;
  config.pruning.prune_epochs = 4;
  config.personalize_epochs = 3;
  config.scenario = "A";
  config.feature_set = "gait_only";
  config.target_persons = {"p1", "p4"};

  const std::string text = pipeline_config_json(config);
  const PipelineConfig back = pipeline_config_from_json(text, "test");
  CHECK(pipeline_config_json(back) == text);
  CHECK(back.seed == 99);
  CHECK(back.corpus.n_persons == 7);
  CHECK(back.segmentation.detection.mad_factor == 3.5);
  CHECK(back.segmentation.repair_poly_order == 5);
  CHECK(back.features.lpc_order == 10);
  CHECK(back.network.lstm_units == 6);
  CHECK(back.training.epochs == 17);
  CHECK(back.pruning.prune_epochs == 4);
  CHECK(back.scenario == "A");
  CHECK(back.target_persons == std::vector<std::string>{"p1", "p4"});
}

TEST_CASE("missing keys take defaults, unknown keys are rejected by path") {
  const PipelineConfig partial =
      pipeline_config_from_json(R"({"seed": 5})", "test");
  CHECK(partial.seed == 5);
  CHECK(partial.network.lstm_units == 4);

  try {
    pipeline_config_from_json(R"({"detection": {"bandwidth": 3}})", "test");
    FAIL("expected Error(Config)");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    CHECK(std::string(e.what()).find("detection.bandwidth") !=
          std::string::npos);
  }

  CHECK_THROWS_AS(pipeline_config_from_json(R"({"sneaky": 1})", "test"),
                  Error);
  CHECK_THROWS_AS(pipeline_config_from_json("{not json", "test"), Error);
}

TEST_CASE("validation rejects out-of-range values") {
  PipelineConfig config;
  config.scenario = "C";
  CHECK_THROWS_AS(config.validate(), Error);
  config = PipelineConfig{};
  config.feature_set = "everything";
  CHECK_THROWS_AS(config.validate(), Error);
  config = PipelineConfig{};
  config.training.batch_size = 0;
  CHECK_THROWS_AS(config.validate(), Error);
  config = PipelineConfig{};
  config.corpus.n_persons = 0;
  CHECK_THROWS_AS(config.validate(), Error);
}

TEST_CASE("fingerprint is stable, format-insensitive, value-sensitive") {
  PipelineConfig config;
  const std::string fp = config.fingerprint();
  CHECK(fp.size() == 16);  // 64-bit hash in hex
  CHECK(fp == PipelineConfig{}.fingerprint());

  // whitespace in the source text does not matter, values do
  const PipelineConfig a = pipeline_config_from_json(R"({"seed":3})", "t");
  const PipelineConfig b =
      pipeline_config_from_json("{\n  \"seed\": 3\n}", "t");
  CHECK(a.fingerprint() == b.fingerprint());

  PipelineConfig changed;
  changed.training.learning_rate = 2e-3;
  CHECK(changed.fingerprint() != fp);
  PipelineConfig reseeded;
  reseeded.seed = 1;
  CHECK(reseeded.fingerprint() != fp);
}

TEST_CASE("config files round-trip through disk") {
  const std::filesystem::path path = "config_test.json";
  PipelineConfig config;
  config.seed = 1234;
  save_pipeline_config(config, path);
  const PipelineConfig back = load_pipeline_config(path);
  CHECK(back.seed == 1234);
  CHECK(back.fingerprint() == config.fingerprint());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_pipeline_config("does_not_exist.json"), Error);
}

TEST_CASE("checkpoints restore the exact model") {
  BundleLayout layout;
  layout.scalar_names = {"a", "b", "c"};
  layout.sequences = {{"s", 5}};
  layout.images = {{"img", 6, 8}};
  NetworkConfig net_config;
  net_config.dense_widths = {4};
  net_config.lstm_units = 2;
  net_config.seq_timesteps = 4;
  net_config.conv_channels = {2, 2, 2, 2};
  net_config.head_widths = {5};
  net_config.seed = 8;
  Network net(layout, net_config);
  prune_step(net, 0.3);  // make masks non-trivial

  Standardizer standardizer;
  standardizer.scalar_mean = Eigen::VectorXd::Constant(3, 1.5);
  standardizer.scalar_std = Eigen::VectorXd::Constant(3, 2.0);
  standardizer.seq_mean = {0.25};
  standardizer.seq_std = {1.25};
  standardizer.image_scale = {3.0};

  const std::filesystem::path path = "checkpoint_test.ckpt";
  save_checkpoint(net, standardizer, "feedc0de00000000", path);
  const LoadedCheckpoint loaded = load_checkpoint(path);
  CHECK(loaded.fingerprint == "feedc0de00000000");
  CHECK(loaded.network.layout() == layout);
  CHECK(loaded.network.config().lstm_units == 2);
  REQUIRE(loaded.network.tensors().size() == net.tensors().size());
  for (std::size_t i = 0; i < net.tensors().size(); ++i) {
    CHECK(loaded.network.tensors()[i].name == net.tensors()[i].name);
    CHECK(loaded.network.tensors()[i].value == net.tensors()[i].value);
    CHECK(loaded.network.tensors()[i].mask == net.tensors()[i].mask);
  }
  CHECK(loaded.standardizer.scalar_mean == standardizer.scalar_mean);
  CHECK(loaded.standardizer.seq_std == standardizer.seq_std);
  CHECK(loaded.standardizer.image_scale == standardizer.image_scale);

  // restored and original networks agree on a forward pass
  std::mt19937_64 rng(2);
  std::normal_distribution<double> dist(0.0, 1.0);
  FeatureBundle bundle;
  bundle.scalars = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < 3; ++i) bundle.scalars(i) = dist(rng);
  Eigen::VectorXd seq(5);
  for (int i = 0; i < 5; ++i) seq(i) = dist(rng);
  bundle.sequences.push_back(seq);
  Eigen::MatrixXd img(6, 8);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 8; ++c) img(r, c) = dist(rng);
  bundle.images.push_back(img);
  const auto a = net.forward(net.adapt(bundle, standardizer));
  const auto b =
      loaded.network.forward(loaded.network.adapt(bundle, loaded.standardizer));
  CHECK(a.output == b.output);
  CHECK(a.embedding == b.embedding);
  std::filesystem::remove(path);
}

TEST_CASE("corrupt checkpoints are rejected as parse errors") {
  const std::filesystem::path path = "checkpoint_corrupt.ckpt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "SNCK1garbage";
  }
  CHECK_THROWS_AS(load_checkpoint(path), Error);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint("missing.ckpt"), Error);
}
