#include <doctest.h>

#include <cmath>
#include <fstream>

#include "stepsense/error.hpp"
#include "stepsense/pruning.hpp"

using namespace stepsense;

namespace {

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
  config.seed = 3;
  return config;
}

// Sets every prunable weight to ±10 so that planted small values are the
// unambiguous pruning victims.
void flatten_prunable(Network& net) {
  for (auto& t : net.tensors())
    if (t.prunable)
      for (Eigen::Index i = 0; i < t.value.size(); ++i)
        t.value(i) = t.value(i) >= 0.0 ? 10.0 : -10.0;
}

Tensor& first_prunable(Network& net) {
  for (auto& t : net.tensors())
    if (t.prunable) return t;
  throw std::logic_error("no prunable tensor");
}

}  // namespace

TEST_CASE("prune_step removes exactly the smallest magnitudes") {
  Network net(mini_layout(), mini_config());
  flatten_prunable(net);
  Tensor& t = first_prunable(net);
  REQUIRE(t.value.size() >= 4);
  t.value(0) = 1.0;
  t.value(1) = -2.0;  // magnitude decides, not sign
  t.value(2) = 3.0;
  t.value(3) = 4.0;

  const auto total = net.prunable_weight_count();
  const auto masked =
      prune_step(net, 3.0 / static_cast<double>(total));
  CHECK(masked == 3);
  CHECK(t.mask(0) == 0.0);
  CHECK(t.mask(1) == 0.0);
  CHECK(t.mask(2) == 0.0);
  CHECK(t.mask(3) == 1.0);
  CHECK(t.value(0) == 0.0);
  CHECK(t.value(1) == 0.0);
  CHECK(t.value(2) == 0.0);
  CHECK(t.value(3) == 4.0);
  CHECK(net.unmasked_weight_count() == total - 3);
}

TEST_CASE("repeated 50% pruning halves the remaining weights") {
  Network net(mini_layout(), mini_config());
  const auto n0 = net.prunable_weight_count();
  prune_step(net, 0.5);
  const auto n1 = net.unmasked_weight_count();
  CHECK(n1 == n0 - static_cast<std::int64_t>(0.5 * n0 + 0.5));
  prune_step(net, 0.5);
  const auto n2 = net.unmasked_weight_count();
  CHECK(n2 == n1 - static_cast<std::int64_t>(0.5 * n1 + 0.5));
  // already-masked weights are never re-counted
  CHECK(n2 < n1);
  CHECK(n1 < n0);
}

TEST_CASE("ties break by tensor index, then element index") {
  Network net(mini_layout(), mini_config());
  flatten_prunable(net);
  // two equal-magnitude candidates in the same tensor
  Tensor& t = first_prunable(net);
  t.value(2) = 0.5;
  t.value(7) = -0.5;
  const auto total = net.prunable_weight_count();
  prune_step(net, 1.0 / static_cast<double>(total));
  CHECK(t.mask(2) == 0.0);  // lower element index loses first
  CHECK(t.mask(7) == 1.0);

  // equal magnitudes across two tensors: the earlier tensor loses
  Network net2(mini_layout(), mini_config());
  flatten_prunable(net2);
  Tensor* a = nullptr;
  Tensor* b = nullptr;
  for (auto& tensor : net2.tensors())
    if (tensor.prunable) {
      if (!a) {
        a = &tensor;
      } else if (!b) {
        b = &tensor;
      }
    }
  REQUIRE(b != nullptr);
  a->value(4) = 0.5;
  b->value(1) = 0.5;
  prune_step(net2, 1.0 / static_cast<double>(total));
  CHECK(a->mask(4) == 0.0);
  CHECK(b->mask(1) == 1.0);
}

TEST_CASE("invalid prune fractions") {
  Network net(mini_layout(), mini_config());
  CHECK(prune_step(net, 0.0) == 0);
  CHECK(prune_step(net, -0.3) == 0);
  CHECK_THROWS_AS(prune_step(net, 1.0), Error);
}

TEST_CASE("the recurrent branch can be exempted") {
  Network net(mini_layout(), mini_config());
  flatten_prunable(net);
  Tensor* lstm = nullptr;
  for (auto& t : net.tensors())
    if (t.name == "lstm_w") lstm = &t;
  REQUIRE(lstm != nullptr);
  REQUIRE(lstm->prunable);
  lstm->value.setConstant(1e-6);  // would be pruned first if eligible
  const auto total = net.prunable_weight_count();
  prune_step(net, 5.0 / static_cast<double>(total), /*include_lstm=*/false);
  CHECK(lstm->mask.minCoeff() == 1.0);
  CHECK(net.unmasked_weight_count() < total);
}

TEST_CASE("final retention is the compounded survival rate") {
  PruningSchedule schedule;
  schedule.prune_epochs = 3;
  schedule.prune_fraction_per_epoch = 0.2;
  CHECK(schedule.final_retention() == doctest::Approx(0.512));
  schedule.prune_epochs = 0;
  CHECK(schedule.final_retention() == doctest::Approx(1.0));
}

TEST_CASE("schedule validation") {
  const Network net(mini_layout(), mini_config());
  PruningSchedule ok;
  ok.warmup_epochs = 1;
  ok.prune_epochs = 2;
  ok.prune_fraction_per_epoch = 0.2;
  CHECK_NOTHROW(ok.validate(net));

  PruningSchedule bad = ok;
  bad.warmup_epochs = 0;
  CHECK_THROWS_AS(bad.validate(net), Error);

  bad = ok;
  bad.prune_fraction_per_epoch = 1.5;
  CHECK_THROWS_AS(bad.validate(net), Error);

  bad = ok;
  bad.finetune_epochs = -1;
  CHECK_THROWS_AS(bad.validate(net), Error);

  // retention so low that no weight would survive
  bad = ok;
  bad.prune_epochs = 50;
  bad.prune_fraction_per_epoch = 0.5;
  CHECK_THROWS_AS(bad.validate(net), Error);
}

TEST_CASE("sparsity trace CSV has one row per record") {
  const std::filesystem::path path = "sparsity_trace_test.csv";
  write_sparsity_trace_csv({{1, "warmup", 500, 0.9, 1.0},
                            {2, "prune", 400, 0.8, 0.9},
                            {3, "finetune", 400, 0.7, 0.8}},
                           path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,phase,nonzero,train_loss,valid_loss");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
  std::filesystem::remove(path);
}
