#include "stepsense/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "stepsense/error.hpp"

namespace stepsense {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  Eigen::VectorXd p = (z.array() - z.maxCoeff()).exp();
  return p / p.sum();
}

struct PhasePlan {
  std::vector<std::string> phase_of_epoch;  // size = total epochs
  int first_trackable = 0;                  // 0-based first best-val epoch
};

PhasePlan plan_phases(const TrainOptions& options,
                      const PruningSchedule* schedule) {
  PhasePlan plan;
  if (!schedule) {
    plan.phase_of_epoch.assign(static_cast<std::size_t>(options.epochs),
                               "train");
    return plan;
  }
  for (int e = 0; e < schedule->warmup_epochs; ++e)
    plan.phase_of_epoch.push_back("warmup");
  for (int e = 0; e < schedule->prune_epochs; ++e)
    plan.phase_of_epoch.push_back("prune");
  for (int e = 0; e < schedule->finetune_epochs; ++e)
    plan.phase_of_epoch.push_back("finetune");
  // Restoring parameters from before a prune step would undo the mask,
  // so best-validation tracking starts after the last prune epoch.
  plan.first_trackable = schedule->warmup_epochs + schedule->prune_epochs;
  if (schedule->prune_epochs == 0) plan.first_trackable = 0;
  return plan;
}

}  // namespace

double weighted_mae_loss(const std::vector<Eigen::VectorXd>& predictions,
                         const std::vector<Eigen::VectorXd>& labels,
                         const std::vector<double>& weights) {
  if (predictions.size() != labels.size() ||
      predictions.size() != weights.size())
    fail(ErrorKind::InvalidArgument, "loss inputs must have equal lengths");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].size() != labels[i].size())
      fail(ErrorKind::InvalidArgument, "prediction/label dimension mismatch");
    num += weights[i] * (predictions[i] - labels[i]).cwiseAbs().sum();
    den += weights[i];
  }
  if (den == 0.0)
    fail(ErrorKind::InvalidArgument, "degenerate batch: all weights zero");
  return num / (2.0 * den);
}

TrainResult train_network(Network& network, const Standardizer& standardizer,
                          const FeatureDataset& dataset,
                          const TrainingView& view, const TrainOptions& options,
                          const PruningSchedule* schedule) {
  if (view.train_indices.empty())
    fail(ErrorKind::InvalidArgument, "training set is empty");
  if (options.batch_size < 1)
    fail(ErrorKind::Config, "batch_size must be >= 1");
  if (options.loss == LossMode::CrossEntropy && view.class_targets.empty())
    fail(ErrorKind::InvalidArgument,
         "cross-entropy training needs class targets");
  if (schedule) schedule->validate(network);

  auto weight_of = [&](int row) {
    return view.weights.empty() ? 1.0
                                : view.weights[static_cast<std::size_t>(row)];
  };
  auto class_weight_of = [&](int cls) {
    return options.class_weights.empty()
               ? 1.0
               : options.class_weights[static_cast<std::size_t>(cls)];
  };
  auto target_vec = [&](int row) {
    const EmotionLabel& l = dataset.samples[static_cast<std::size_t>(row)].label;
    Eigen::VectorXd y(2);
    y << l.valence, l.arousal;
    return y;
  };

  // Standardized inputs are reused across epochs.
  std::vector<NetInput> inputs(dataset.samples.size());
  std::vector<char> prepared(dataset.samples.size(), 0);
  auto input_of = [&](int row) -> const NetInput& {
    if (!prepared[static_cast<std::size_t>(row)]) {
      inputs[static_cast<std::size_t>(row)] = network.adapt(
          dataset.samples[static_cast<std::size_t>(row)].bundle, standardizer);
      prepared[static_cast<std::size_t>(row)] = 1;
    }
    return inputs[static_cast<std::size_t>(row)];
  };

  const PhasePlan plan = plan_phases(options, schedule);
  const int n_epochs = static_cast<int>(plan.phase_of_epoch.size());
  std::mt19937_64 rng(options.seed ^ 0x7261696eULL);
  std::vector<int> order = view.train_indices;
  TrainResult result;
  int adam_step_count = 0;
  double best_valid = std::numeric_limits<double>::infinity();
  std::vector<Eigen::MatrixXd> best_values;

  auto validation_loss = [&]() {
    if (view.valid_indices.empty())
      return std::numeric_limits<double>::quiet_NaN();
    double num = 0.0, den = 0.0;
    for (int row : view.valid_indices) {
      const Eigen::VectorXd out = network.forward(input_of(row)).output;
      if (options.loss == LossMode::WeightedMae) {
        num += (out - target_vec(row)).cwiseAbs().sum();
        den += 1.0;
      } else {
        const Eigen::VectorXd p = softmax(out);
        const int cls = view.class_targets[static_cast<std::size_t>(row)];
        num -= std::log(std::max(p(cls), 1e-300));
        den += 0.5;  // keeps the 1/(2 den) form below consistent
      }
    }
    return num / (2.0 * den);
  };

  for (int epoch = 0; epoch < n_epochs; ++epoch) {
    const std::string& phase = plan.phase_of_epoch[static_cast<std::size_t>(epoch)];
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_num = 0.0, epoch_den = 0.0;
    const int n_batches =
        (static_cast<int>(order.size()) + options.batch_size - 1) /
        options.batch_size;
    for (int b = 0; b < n_batches; ++b) {
      const int begin = b * options.batch_size;
      const int end = std::min<int>(begin + options.batch_size,
                                    static_cast<int>(order.size()));
      std::vector<Network::Cache> caches(static_cast<std::size_t>(end - begin));
      std::vector<Eigen::VectorXd> outputs(caches.size());
      double wsum = 0.0;
      for (int i = begin; i < end; ++i) {
        const int row = order[static_cast<std::size_t>(i)];
        outputs[static_cast<std::size_t>(i - begin)] =
            network
                .forward(input_of(row), true, &rng,
                         &caches[static_cast<std::size_t>(i - begin)])
                .output;
        if (options.loss == LossMode::WeightedMae) {
          wsum += weight_of(row);
        } else {
          wsum += class_weight_of(
              view.class_targets[static_cast<std::size_t>(row)]);
        }
      }
      if (wsum == 0.0)
        fail(ErrorKind::InvalidArgument,
             "degenerate batch: all weights zero at epoch " +
                 std::to_string(epoch + 1) + " batch " + std::to_string(b + 1));

      network.zero_gradients();
      double batch_loss = 0.0;
      for (int i = begin; i < end; ++i) {
        const int row = order[static_cast<std::size_t>(i)];
        const Eigen::VectorXd& out = outputs[static_cast<std::size_t>(i - begin)];
        Eigen::VectorXd d_out;
        if (options.loss == LossMode::WeightedMae) {
          const double w = weight_of(row);
          const Eigen::VectorXd err = out - target_vec(row);
          batch_loss += w * err.cwiseAbs().sum() / (2.0 * wsum);
          d_out = err.unaryExpr([](double e) { return sign(e); }) *
                  (w / (2.0 * wsum));
        } else {
          const int cls = view.class_targets[static_cast<std::size_t>(row)];
          const double cw = class_weight_of(cls);
          const Eigen::VectorXd p = softmax(out);
          batch_loss += cw * -std::log(std::max(p(cls), 1e-300)) / wsum;
          d_out = p * (cw / wsum);
          d_out(cls) -= cw / wsum;
        }
        network.backward(caches[static_cast<std::size_t>(i - begin)], d_out);
      }
      if (!std::isfinite(batch_loss))
        fail(ErrorKind::Numeric, "non-finite training loss at epoch " +
                                     std::to_string(epoch + 1) + " batch " +
                                     std::to_string(b + 1));
      network.adam_step(options.learning_rate, ++adam_step_count);
      epoch_num += batch_loss * wsum;
      epoch_den += wsum;
    }

    if (schedule && phase == "prune")
      prune_step(network, schedule->prune_fraction_per_epoch,
                 schedule->prune_lstm);

    EpochRecord record;
    record.epoch = epoch + 1;
    record.phase = phase;
    record.train_loss = epoch_num / epoch_den;
    record.valid_loss = validation_loss();
    record.nonzero_weights = network.unmasked_weight_count();
    result.trace.push_back(record);

    if (options.best_validation && epoch >= plan.first_trackable &&
        std::isfinite(record.valid_loss) && record.valid_loss < best_valid) {
      best_valid = record.valid_loss;
      result.best_epoch = epoch + 1;
      best_values.clear();
      for (const Tensor& t : network.tensors()) best_values.push_back(t.value);
    }
  }

  if (!best_values.empty()) {
    auto& tensors = network.tensors();
    for (std::size_t t = 0; t < tensors.size(); ++t)
      tensors[t].value = best_values[t];
    network.apply_masks();
  } else {
    result.best_epoch = n_epochs;
  }
  return result;
}

void write_loss_trace_csv(const std::vector<EpochRecord>& trace,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  out << "epoch,phase,train_loss,valid_loss,nonzero_weights\n";
  char buf[112];
  for (const EpochRecord& r : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.9g,%.9g,%lld\n", r.epoch,
                  r.phase.c_str(), r.train_loss, r.valid_loss,
                  static_cast<long long>(r.nonzero_weights));
    out << buf;
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace stepsense
