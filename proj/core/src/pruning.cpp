#include "stepsense/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <tuple>

#include "stepsense/error.hpp"

namespace stepsense {

double PruningSchedule::final_retention() const {
  return std::pow(1.0 - prune_fraction_per_epoch, prune_epochs);
}

void PruningSchedule::validate(const Network& network) const {
  if (warmup_epochs < 1)
    fail(ErrorKind::Config, "pruning: warmup_epochs must be >= 1");
  if (prune_epochs < 0 || finetune_epochs < 0)
    fail(ErrorKind::Config, "pruning: epoch counts must be >= 0");
  if (prune_epochs > 0 && !(prune_fraction_per_epoch > 0.0 &&
                            prune_fraction_per_epoch < 1.0))
    fail(ErrorKind::Config,
         "pruning: prune_fraction_per_epoch must be in (0, 1)");
  const double retained =
      final_retention() * static_cast<double>(network.prunable_weight_count());
  if (prune_epochs > 0 && retained < 1.0)
    fail(ErrorKind::Config,
         "pruning: schedule would remove every prunable weight");
}

std::int64_t prune_step(Network& network, double fraction, bool include_lstm) {
  if (fraction <= 0.0) return 0;
  if (fraction >= 1.0)
    fail(ErrorKind::InvalidArgument, "prune fraction must be in (0, 1)");

  struct Entry {
    double magnitude;
    int tensor;
    Eigen::Index element;
  };
  std::vector<Entry> unmasked;
  auto& tensors = network.tensors();
  for (int t = 0; t < static_cast<int>(tensors.size()); ++t) {
    const Tensor& tensor = tensors[static_cast<std::size_t>(t)];
    if (!tensor.prunable) continue;
    if (!include_lstm && tensor.name == "lstm_w") continue;
    for (Eigen::Index i = 0; i < tensor.value.size(); ++i)
      if (tensor.mask(i) != 0.0)
        unmasked.push_back({std::abs(tensor.value(i)), t, i});
  }
  const std::int64_t n_mask = static_cast<std::int64_t>(
      fraction * static_cast<double>(unmasked.size()) + 0.5);
  if (n_mask <= 0) return 0;

  std::sort(unmasked.begin(), unmasked.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.magnitude, a.tensor, a.element) <
           std::tie(b.magnitude, b.tensor, b.element);
  });
  for (std::int64_t i = 0; i < n_mask; ++i) {
    Tensor& tensor =
        tensors[static_cast<std::size_t>(unmasked[static_cast<std::size_t>(i)].tensor)];
    tensor.mask(unmasked[static_cast<std::size_t>(i)].element) = 0.0;
    tensor.value(unmasked[static_cast<std::size_t>(i)].element) = 0.0;
  }
  return n_mask;
}

void write_sparsity_trace_csv(const std::vector<SparsityRecord>& trace,
                              const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  out << "epoch,phase,nonzero,train_loss,valid_loss\n";
  char buf[96];
  for (const SparsityRecord& r : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%lld,%.9g,%.9g\n", r.epoch,
                  r.phase.c_str(), static_cast<long long>(r.nonzero),
                  r.train_loss, r.valid_loss);
    out << buf;
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace stepsense
