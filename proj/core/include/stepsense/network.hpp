#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stepsense/bundle.hpp"

namespace stepsense {

enum class Activation { Relu, Tanh };

struct NetworkConfig {
  std::vector<int> dense_widths = {64};
  int lstm_units = 4;
  /// Every 1-D sequence slot is linearly resampled to this many steps and
  /// the slots are stacked as the per-step input vector.
  int seq_timesteps = 32;
  std::vector<int> conv_channels = {4, 4, 8, 8};  // one entry per conv layer
  int conv_kernel = 3;
  double dropout_rate = 0.5;
  std::vector<int> head_widths = {64, 32};
  int output_dim = 2;
  Activation activation = Activation::Relu;
  std::uint64_t seed = 0;

  void validate() const;  // throws Error(Config)
};

/// Per-slot affine normalization fitted on the training split and applied
/// before the network sees a bundle.
struct Standardizer {
  Eigen::VectorXd scalar_mean, scalar_std;
  std::vector<double> seq_mean, seq_std;    // one per sequence slot
  std::vector<double> image_scale;          // one per image slot

  static Standardizer fit(const FeatureDataset& dataset,
                          const std::vector<int>& indices);
};

struct Tensor {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd mask;  // 1 keeps the weight, 0 prunes it
  bool prunable = false;

  // training state
  Eigen::MatrixXd grad, adam_m, adam_v;
};

/// Network inputs after standardization and resampling.
struct NetInput {
  Eigen::VectorXd scalars;            // may be empty
  Eigen::MatrixXd sequence;           // T x S, may be empty
  std::vector<Eigen::MatrixXd> images;
};

class Network {
 public:
  Network(const BundleLayout& layout, const NetworkConfig& config);

  const BundleLayout& layout() const { return layout_; }
  const NetworkConfig& config() const { return config_; }
  int embedding_dim() const { return embedding_dim_; }

  NetInput adapt(const FeatureBundle& bundle,
                 const Standardizer& standardizer) const;

  struct Cache;  // forward intermediates for backward()

  /// Deterministic when training is false; dropout draws from rng when
  /// training is true. embedding is the concatenation-layer activation
  /// before dropout.
  struct Result {
    Eigen::VectorXd output;
    Eigen::VectorXd embedding;
  };
  Result forward(const NetInput& input, bool training = false,
                 std::mt19937_64* rng = nullptr, Cache* cache = nullptr) const;

  /// Accumulates parameter gradients for one sample; d_output is the loss
  /// gradient at the network output.
  void backward(const Cache& cache, const Eigen::VectorXd& d_output);

  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }

  void zero_gradients();
  /// Adam update; masked weights stay exactly 0.
  void adam_step(double learning_rate, int step_number, double beta1 = 0.9,
                 double beta2 = 0.999, double epsilon = 1e-8);
  void apply_masks();

  std::int64_t prunable_weight_count() const;
  std::int64_t unmasked_weight_count() const;

  /// Replaces the output layer with a fresh randomly-initialized one of
  /// the given dimension (classification head swap).
  void reset_output_layer(int output_dim, std::uint64_t seed);

  struct Cache {
    NetInput input;
    // dense branch
    std::vector<Eigen::VectorXd> dense_pre, dense_act;
    // lstm branch, one entry per timestep
    std::vector<Eigen::VectorXd> lstm_gates;  // pre-activation, 4H
    std::vector<Eigen::VectorXd> lstm_h, lstm_c;
    // conv branch: per layer pre-activation maps, activations, pooled maps
    std::vector<std::vector<Eigen::MatrixXd>> conv_pre, conv_act, conv_pool;
    Eigen::VectorXd embedding;
    Eigen::VectorXd dropout_mask;  // empty when dropout was off
    std::vector<Eigen::VectorXd> head_pre, head_act;
    Eigen::VectorXd output;
  };

 private:
  struct BranchIndex {
    // tensor indices: weight/bias pairs in order
    std::vector<int> dense_w, dense_b;
    int lstm_w = -1, lstm_b = -1;
    std::vector<int> conv_w, conv_b;
    std::vector<int> head_w, head_b;
    int out_w = -1, out_b = -1;
  };

  int add_tensor(const std::string& name, int rows, int cols, bool prunable,
                 std::mt19937_64& rng);

  double act(double x) const;
  double act_grad(double pre) const;

  BundleLayout layout_;
  NetworkConfig config_;
  BranchIndex index_;
  std::vector<Tensor> tensors_;
  int embedding_dim_ = 0;
  int seq_slots_ = 0;
  std::vector<int> conv_h_, conv_w_;  // per-layer input sizes
  int conv_flat_ = 0;
};

}  // namespace stepsense
