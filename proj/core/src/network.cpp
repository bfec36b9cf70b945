#include "stepsense/network.hpp"

#include <cmath>

#include "stepsense/error.hpp"

namespace stepsense {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// im2col for same-padded k x k convolution over channel maps.
Eigen::MatrixXd im2col(const std::vector<Eigen::MatrixXd>& maps, int k) {
  const int c_in = static_cast<int>(maps.size());
  const int h = static_cast<int>(maps[0].rows());
  const int w = static_cast<int>(maps[0].cols());
  const int pad = k / 2;
  Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(c_in * k * k, h * w);
  for (int c = 0; c < c_in; ++c) {
    const Eigen::MatrixXd& m = maps[static_cast<std::size_t>(c)];
    for (int kr = 0; kr < k; ++kr) {
      for (int kc = 0; kc < k; ++kc) {
        const int row = (c * k + kr) * k + kc;
        for (int r = 0; r < h; ++r) {
          const int sr = r + kr - pad;
          if (sr < 0 || sr >= h) continue;
          for (int cc = 0; cc < w; ++cc) {
            const int sc = cc + kc - pad;
            if (sc < 0 || sc >= w) continue;
            cols(row, r * w + cc) = m(sr, sc);
          }
        }
      }
    }
  }
  return cols;
}

// Adjoint of im2col: scatter column gradients back onto channel maps.
void col2im(const Eigen::MatrixXd& d_cols, int k, int h, int w,
            std::vector<Eigen::MatrixXd>* d_maps) {
  const int c_in = static_cast<int>(d_maps->size());
  const int pad = k / 2;
  for (int c = 0; c < c_in; ++c) {
    Eigen::MatrixXd& m = (*d_maps)[static_cast<std::size_t>(c)];
    for (int kr = 0; kr < k; ++kr) {
      for (int kc = 0; kc < k; ++kc) {
        const int row = (c * k + kr) * k + kc;
        for (int r = 0; r < h; ++r) {
          const int sr = r + kr - pad;
          if (sr < 0 || sr >= h) continue;
          for (int cc = 0; cc < w; ++cc) {
            const int sc = cc + kc - pad;
            if (sc < 0 || sc >= w) continue;
            m(sr, sc) += d_cols(row, r * w + cc);
          }
        }
      }
    }
  }
}

// 2x2 average pooling with clipped edge windows (output dims = ceil/2).
Eigen::MatrixXd avg_pool(const Eigen::MatrixXd& m) {
  const int oh = static_cast<int>((m.rows() + 1) / 2);
  const int ow = static_cast<int>((m.cols() + 1) / 2);
  Eigen::MatrixXd out(oh, ow);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      const int r1 = std::min<int>(2 * r + 2, static_cast<int>(m.rows()));
      const int c1 = std::min<int>(2 * c + 2, static_cast<int>(m.cols()));
      out(r, c) =
          m.block(2 * r, 2 * c, r1 - 2 * r, c1 - 2 * c).mean();
    }
  }
  return out;
}

Eigen::MatrixXd avg_unpool(const Eigen::MatrixXd& d_out, int in_h, int in_w) {
  Eigen::MatrixXd d_in = Eigen::MatrixXd::Zero(in_h, in_w);
  for (int r = 0; r < d_out.rows(); ++r) {
    for (int c = 0; c < d_out.cols(); ++c) {
      const int r1 = std::min(2 * r + 2, in_h);
      const int c1 = std::min(2 * c + 2, in_w);
      const double share =
          d_out(r, c) / static_cast<double>((r1 - 2 * r) * (c1 - 2 * c));
      for (int rr = 2 * r; rr < r1; ++rr)
        for (int cc = 2 * c; cc < c1; ++cc) d_in(rr, cc) += share;
    }
  }
  return d_in;
}

}  // namespace

void NetworkConfig::validate() const {
  if (conv_channels.size() != 4)
    fail(ErrorKind::Config, "conv branch must have exactly 4 layers");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    fail(ErrorKind::Config, "dropout_rate must be in [0, 1)");
  if (output_dim < 1) fail(ErrorKind::Config, "output_dim must be >= 1");
  if (lstm_units < 1) fail(ErrorKind::Config, "lstm_units must be >= 1");
  if (seq_timesteps < 2) fail(ErrorKind::Config, "seq_timesteps must be >= 2");
  if (conv_kernel < 1 || conv_kernel % 2 == 0)
    fail(ErrorKind::Config, "conv_kernel must be odd");
}

Standardizer Standardizer::fit(const FeatureDataset& dataset,
                               const std::vector<int>& indices) {
  Standardizer s;
  const int n_scalars = dataset.layout.scalar_dim();
  s.scalar_mean = Eigen::VectorXd::Zero(n_scalars);
  s.scalar_std = Eigen::VectorXd::Ones(n_scalars);
  s.seq_mean.assign(dataset.layout.sequences.size(), 0.0);
  s.seq_std.assign(dataset.layout.sequences.size(), 1.0);
  s.image_scale.assign(dataset.layout.images.size(), 1.0);
  if (indices.empty()) return s;
  const double n = static_cast<double>(indices.size());

  Eigen::VectorXd sq = Eigen::VectorXd::Zero(n_scalars);
  for (int i : indices) {
    const auto& b = dataset.samples[static_cast<std::size_t>(i)].bundle;
    s.scalar_mean += b.scalars;
    sq += b.scalars.cwiseProduct(b.scalars);
  }
  s.scalar_mean /= n;
  for (int f = 0; f < n_scalars; ++f) {
    const double var = std::max(0.0, sq(f) / n - s.scalar_mean(f) * s.scalar_mean(f));
    s.scalar_std(f) = std::sqrt(var) > 1e-12 ? std::sqrt(var) : 1.0;
  }

  for (std::size_t slot = 0; slot < dataset.layout.sequences.size(); ++slot) {
    double sum = 0.0, sumsq = 0.0, count = 0.0;
    for (int i : indices) {
      const auto& seq =
          dataset.samples[static_cast<std::size_t>(i)].bundle.sequences[slot];
      sum += seq.sum();
      sumsq += seq.squaredNorm();
      count += static_cast<double>(seq.size());
    }
    const double mean = sum / count;
    const double var = std::max(0.0, sumsq / count - mean * mean);
    s.seq_mean[slot] = mean;
    s.seq_std[slot] = std::sqrt(var) > 1e-12 ? std::sqrt(var) : 1.0;
  }

  for (std::size_t slot = 0; slot < dataset.layout.images.size(); ++slot) {
    double sumsq = 0.0, count = 0.0;
    for (int i : indices) {
      const auto& img =
          dataset.samples[static_cast<std::size_t>(i)].bundle.images[slot];
      sumsq += img.squaredNorm();
      count += static_cast<double>(img.size());
    }
    const double rms = std::sqrt(sumsq / count);
    s.image_scale[slot] = rms > 1e-12 ? rms : 1.0;
  }
  return s;
}

int Network::add_tensor(const std::string& name, int rows, int cols,
                        bool prunable, std::mt19937_64& rng) {
  Tensor t;
  t.name = name;
  t.prunable = prunable;
  t.value = Eigen::MatrixXd::Zero(rows, cols);
  if (prunable) {
    // fan-in scaled uniform init; biases start at zero
    const double bound = std::sqrt(1.0 / static_cast<double>(cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) t.value(r, c) = dist(rng);
    t.mask = Eigen::MatrixXd::Ones(rows, cols);
  }
  tensors_.push_back(std::move(t));
  return static_cast<int>(tensors_.size()) - 1;
}

Network::Network(const BundleLayout& layout, const NetworkConfig& config)
    : layout_(layout), config_(config) {
  config_.validate();
  std::mt19937_64 rng(config_.seed ^ 0x5e9d5e9dULL);
  seq_slots_ = static_cast<int>(layout_.sequences.size());

  int concat = 0;
  if (layout_.scalar_dim() > 0) {
    int in = layout_.scalar_dim();
    for (std::size_t l = 0; l < config_.dense_widths.size(); ++l) {
      const int out = config_.dense_widths[l];
      index_.dense_w.push_back(add_tensor("dense_w" + std::to_string(l), out,
                                          in, true, rng));
      index_.dense_b.push_back(
          add_tensor("dense_b" + std::to_string(l), out, 1, false, rng));
      in = out;
    }
    concat += in;
  }
  if (seq_slots_ > 0) {
    const int h = config_.lstm_units;
    index_.lstm_w =
        add_tensor("lstm_w", 4 * h, seq_slots_ + h, true, rng);
    index_.lstm_b = add_tensor("lstm_b", 4 * h, 1, false, rng);
    // Standard trick: start the forget gate open.
    tensors_[static_cast<std::size_t>(index_.lstm_b)]
        .value.block(h, 0, h, 1)
        .setConstant(1.0);
    concat += h;
  }
  if (!layout_.images.empty()) {
    for (std::size_t i = 1; i < layout_.images.size(); ++i)
      if (layout_.images[i].rows != layout_.images[0].rows ||
          layout_.images[i].cols != layout_.images[0].cols)
        fail(ErrorKind::Config, "image slots must share one size");
    int c_in = static_cast<int>(layout_.images.size());
    int h = layout_.images[0].rows;
    int w = layout_.images[0].cols;
    const int k = config_.conv_kernel;
    for (std::size_t l = 0; l < config_.conv_channels.size(); ++l) {
      const int c_out = config_.conv_channels[l];
      conv_h_.push_back(h);
      conv_w_.push_back(w);
      index_.conv_w.push_back(add_tensor("conv_w" + std::to_string(l), c_out,
                                         c_in * k * k, true, rng));
      index_.conv_b.push_back(
          add_tensor("conv_b" + std::to_string(l), c_out, 1, false, rng));
      c_in = c_out;
      h = (h + 1) / 2;
      w = (w + 1) / 2;
    }
    conv_flat_ = c_in * h * w;
    concat += conv_flat_;
  }
  if (concat == 0) fail(ErrorKind::Config, "layout feeds no branch");
  embedding_dim_ = concat;

  int in = concat;
  for (std::size_t l = 0; l < config_.head_widths.size(); ++l) {
    const int out = config_.head_widths[l];
    index_.head_w.push_back(
        add_tensor("head_w" + std::to_string(l), out, in, true, rng));
    index_.head_b.push_back(
        add_tensor("head_b" + std::to_string(l), out, 1, false, rng));
    in = out;
  }
  index_.out_w = add_tensor("out_w", config_.output_dim, in, true, rng);
  index_.out_b = add_tensor("out_b", config_.output_dim, 1, false, rng);
}

double Network::act(double x) const {
  return config_.activation == Activation::Relu ? (x > 0.0 ? x : 0.0)
                                                : std::tanh(x);
}

double Network::act_grad(double pre) const {
  if (config_.activation == Activation::Relu) return pre > 0.0 ? 1.0 : 0.0;
  const double t = std::tanh(pre);
  return 1.0 - t * t;
}

NetInput Network::adapt(const FeatureBundle& bundle,
                        const Standardizer& standardizer) const {
  if (!bundle.matches(layout_))
    fail(ErrorKind::InvalidArgument, "bundle layout mismatch");
  NetInput in;
  if (layout_.scalar_dim() > 0)
    in.scalars = (bundle.scalars - standardizer.scalar_mean)
                     .cwiseQuotient(standardizer.scalar_std);
  if (seq_slots_ > 0) {
    const int t_steps = config_.seq_timesteps;
    in.sequence = Eigen::MatrixXd::Zero(t_steps, seq_slots_);
    for (int s = 0; s < seq_slots_; ++s) {
      const auto& seq = bundle.sequences[static_cast<std::size_t>(s)];
      const int len = static_cast<int>(seq.size());
      for (int t = 0; t < t_steps; ++t) {
        double v;
        if (len == 1) {
          v = seq(0);
        } else {
          const double pos =
              static_cast<double>(t) * (len - 1) / (t_steps - 1);
          const int i0 = std::min(static_cast<int>(pos), len - 2);
          const double frac = pos - i0;
          v = (1.0 - frac) * seq(i0) + frac * seq(i0 + 1);
        }
        in.sequence(t, s) = (v - standardizer.seq_mean[static_cast<std::size_t>(s)]) /
                            standardizer.seq_std[static_cast<std::size_t>(s)];
      }
    }
  }
  for (std::size_t i = 0; i < bundle.images.size(); ++i)
    in.images.push_back(bundle.images[i] / standardizer.image_scale[i]);
  return in;
}

Network::Result Network::forward(const NetInput& input, bool training,
                                 std::mt19937_64* rng, Cache* cache) const {
  Cache local;
  Cache& c = cache ? *cache : local;
  c = Cache{};
  c.input = input;

  Eigen::VectorXd concat(embedding_dim_);
  int offset = 0;

  if (layout_.scalar_dim() > 0) {
    Eigen::VectorXd h = input.scalars;
    for (std::size_t l = 0; l < index_.dense_w.size(); ++l) {
      const auto& w = tensors_[static_cast<std::size_t>(index_.dense_w[l])].value;
      const auto& b = tensors_[static_cast<std::size_t>(index_.dense_b[l])].value;
      Eigen::VectorXd pre = w * h + b.col(0);
      c.dense_pre.push_back(pre);
      for (Eigen::Index i = 0; i < pre.size(); ++i) pre(i) = act(pre(i));
      c.dense_act.push_back(pre);
      h = pre;
    }
    concat.segment(offset, h.size()) = h;
    offset += static_cast<int>(h.size());
  }

  if (seq_slots_ > 0) {
    const int hdim = config_.lstm_units;
    const auto& w = tensors_[static_cast<std::size_t>(index_.lstm_w)].value;
    const auto& b = tensors_[static_cast<std::size_t>(index_.lstm_b)].value;
    Eigen::VectorXd h = Eigen::VectorXd::Zero(hdim);
    Eigen::VectorXd cell = Eigen::VectorXd::Zero(hdim);
    for (int t = 0; t < config_.seq_timesteps; ++t) {
      Eigen::VectorXd xh(seq_slots_ + hdim);
      xh.head(seq_slots_) = input.sequence.row(t).transpose();
      xh.tail(hdim) = h;
      Eigen::VectorXd gates = w * xh + b.col(0);
      c.lstm_gates.push_back(gates);
      Eigen::VectorXd new_c(hdim), new_h(hdim);
      for (int u = 0; u < hdim; ++u) {
        const double ig = sigmoid(gates(u));
        const double fg = sigmoid(gates(hdim + u));
        const double gg = std::tanh(gates(2 * hdim + u));
        const double og = sigmoid(gates(3 * hdim + u));
        new_c(u) = fg * cell(u) + ig * gg;
        new_h(u) = og * std::tanh(new_c(u));
      }
      cell = new_c;
      h = new_h;
      c.lstm_c.push_back(cell);
      c.lstm_h.push_back(h);
    }
    concat.segment(offset, hdim) = h;
    offset += hdim;
  }

  if (!layout_.images.empty()) {
    std::vector<Eigen::MatrixXd> maps = input.images;
    const int k = config_.conv_kernel;
    for (std::size_t l = 0; l < index_.conv_w.size(); ++l) {
      const auto& kw = tensors_[static_cast<std::size_t>(index_.conv_w[l])].value;
      const auto& kb = tensors_[static_cast<std::size_t>(index_.conv_b[l])].value;
      const int h = static_cast<int>(maps[0].rows());
      const int wdt = static_cast<int>(maps[0].cols());
      const Eigen::MatrixXd cols = im2col(maps, k);
      const Eigen::MatrixXd z = kw * cols;  // c_out x (h*w)
      std::vector<Eigen::MatrixXd> pre, activated, pooled;
      for (int ch = 0; ch < z.rows(); ++ch) {
        Eigen::MatrixXd map(h, wdt);
        for (int r = 0; r < h; ++r)
          for (int cc = 0; cc < wdt; ++cc)
            map(r, cc) = z(ch, r * wdt + cc) + kb(ch, 0);
        pre.push_back(map);
        for (int r = 0; r < h; ++r)
          for (int cc = 0; cc < wdt; ++cc) map(r, cc) = act(map(r, cc));
        activated.push_back(map);
        pooled.push_back(avg_pool(map));
      }
      c.conv_pre.push_back(std::move(pre));
      c.conv_act.push_back(std::move(activated));
      c.conv_pool.push_back(pooled);
      maps = std::move(pooled);
    }
    int flat = 0;
    for (const auto& m : maps)
      for (int r = 0; r < m.rows(); ++r)
        for (int cc = 0; cc < m.cols(); ++cc) concat(offset + flat++) = m(r, cc);
    offset += conv_flat_;
  }

  c.embedding = concat;

  Eigen::VectorXd h = concat;
  if (training && config_.dropout_rate > 0.0) {
    if (!rng)
      fail(ErrorKind::InvalidArgument, "training forward needs a dropout rng");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double keep = 1.0 - config_.dropout_rate;
    c.dropout_mask = Eigen::VectorXd::Zero(h.size());
    for (Eigen::Index i = 0; i < h.size(); ++i)
      if (unit(*rng) < keep) c.dropout_mask(i) = 1.0 / keep;
    h = h.cwiseProduct(c.dropout_mask);
  }

  for (std::size_t l = 0; l < index_.head_w.size(); ++l) {
    const auto& w = tensors_[static_cast<std::size_t>(index_.head_w[l])].value;
    const auto& b = tensors_[static_cast<std::size_t>(index_.head_b[l])].value;
    Eigen::VectorXd pre = w * h + b.col(0);
    c.head_pre.push_back(pre);
    for (Eigen::Index i = 0; i < pre.size(); ++i) pre(i) = act(pre(i));
    c.head_act.push_back(pre);
    h = pre;
  }
  const auto& ow = tensors_[static_cast<std::size_t>(index_.out_w)].value;
  const auto& ob = tensors_[static_cast<std::size_t>(index_.out_b)].value;
  c.output = ow * h + ob.col(0);
  return {c.output, c.embedding};
}

void Network::backward(const Cache& cache, const Eigen::VectorXd& d_output) {
  auto& T = tensors_;
  Eigen::VectorXd d = d_output;

  // output layer
  {
    const Eigen::VectorXd& in = index_.head_w.empty()
                                    ? cache.embedding
                                    : cache.head_act.back();
    Eigen::VectorXd head_in = in;
    if (index_.head_w.empty() && cache.dropout_mask.size() > 0)
      head_in = cache.embedding.cwiseProduct(cache.dropout_mask);
    T[static_cast<std::size_t>(index_.out_w)].grad += d * head_in.transpose();
    T[static_cast<std::size_t>(index_.out_b)].grad.col(0) += d;
    d = T[static_cast<std::size_t>(index_.out_w)].value.transpose() * d;
  }

  // head layers (reverse)
  for (int l = static_cast<int>(index_.head_w.size()) - 1; l >= 0; --l) {
    const Eigen::VectorXd& pre = cache.head_pre[static_cast<std::size_t>(l)];
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) *= act_grad(pre(i));
    Eigen::VectorXd in;
    if (l > 0) {
      in = cache.head_act[static_cast<std::size_t>(l - 1)];
    } else {
      in = cache.dropout_mask.size() > 0
               ? cache.embedding.cwiseProduct(cache.dropout_mask).eval()
               : cache.embedding;
    }
    T[static_cast<std::size_t>(index_.head_w[l])].grad += d * in.transpose();
    T[static_cast<std::size_t>(index_.head_b[l])].grad.col(0) += d;
    d = T[static_cast<std::size_t>(index_.head_w[l])].value.transpose() * d;
  }

  if (cache.dropout_mask.size() > 0) d = d.cwiseProduct(cache.dropout_mask);

  int offset = 0;

  // dense branch
  if (layout_.scalar_dim() > 0) {
    const int width = static_cast<int>(cache.dense_act.back().size());
    Eigen::VectorXd dd = d.segment(offset, width);
    offset += width;
    for (int l = static_cast<int>(index_.dense_w.size()) - 1; l >= 0; --l) {
      const Eigen::VectorXd& pre = cache.dense_pre[static_cast<std::size_t>(l)];
      for (Eigen::Index i = 0; i < dd.size(); ++i) dd(i) *= act_grad(pre(i));
      const Eigen::VectorXd& in =
          l > 0 ? cache.dense_act[static_cast<std::size_t>(l - 1)]
                : cache.input.scalars;
      T[static_cast<std::size_t>(index_.dense_w[l])].grad += dd * in.transpose();
      T[static_cast<std::size_t>(index_.dense_b[l])].grad.col(0) += dd;
      dd = T[static_cast<std::size_t>(index_.dense_w[l])].value.transpose() * dd;
    }
  }

  // lstm branch (BPTT)
  if (seq_slots_ > 0) {
    const int hdim = config_.lstm_units;
    const auto& w = T[static_cast<std::size_t>(index_.lstm_w)].value;
    Eigen::VectorXd dh = d.segment(offset, hdim);
    offset += hdim;
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(hdim);
    for (int t = config_.seq_timesteps - 1; t >= 0; --t) {
      const Eigen::VectorXd& gates = cache.lstm_gates[static_cast<std::size_t>(t)];
      const Eigen::VectorXd& cell = cache.lstm_c[static_cast<std::size_t>(t)];
      const Eigen::VectorXd prev_c =
          t > 0 ? cache.lstm_c[static_cast<std::size_t>(t - 1)]
                : Eigen::VectorXd::Zero(hdim);
      const Eigen::VectorXd prev_h =
          t > 0 ? cache.lstm_h[static_cast<std::size_t>(t - 1)]
                : Eigen::VectorXd::Zero(hdim);
      Eigen::VectorXd d_gates(4 * hdim);
      for (int u = 0; u < hdim; ++u) {
        const double ig = sigmoid(gates(u));
        const double fg = sigmoid(gates(hdim + u));
        const double gg = std::tanh(gates(2 * hdim + u));
        const double og = sigmoid(gates(3 * hdim + u));
        const double tc = std::tanh(cell(u));
        const double dct = dc(u) + dh(u) * og * (1.0 - tc * tc);
        d_gates(u) = dct * gg * ig * (1.0 - ig);
        d_gates(hdim + u) = dct * prev_c(u) * fg * (1.0 - fg);
        d_gates(2 * hdim + u) = dct * ig * (1.0 - gg * gg);
        d_gates(3 * hdim + u) = dh(u) * tc * og * (1.0 - og);
        dc(u) = dct * fg;
      }
      Eigen::VectorXd xh(seq_slots_ + hdim);
      xh.head(seq_slots_) = cache.input.sequence.row(t).transpose();
      xh.tail(hdim) = prev_h;
      T[static_cast<std::size_t>(index_.lstm_w)].grad += d_gates * xh.transpose();
      T[static_cast<std::size_t>(index_.lstm_b)].grad.col(0) += d_gates;
      dh = w.rightCols(hdim).transpose() * d_gates;
    }
  }

  // conv branch
  if (!layout_.images.empty()) {
    const int k = config_.conv_kernel;
    const int n_layers = static_cast<int>(index_.conv_w.size());
    // rebuild pooled-output gradient from the tail of d
    const auto& last = cache.conv_pool.back();
    std::vector<Eigen::MatrixXd> d_maps;
    int flat = 0;
    for (const auto& m : last) {
      Eigen::MatrixXd g(m.rows(), m.cols());
      for (int r = 0; r < m.rows(); ++r)
        for (int cc = 0; cc < m.cols(); ++cc)
          g(r, cc) = d(offset + flat++);
      d_maps.push_back(std::move(g));
    }
    for (int l = n_layers - 1; l >= 0; --l) {
      const int h = conv_h_[static_cast<std::size_t>(l)];
      const int wdt = conv_w_[static_cast<std::size_t>(l)];
      const auto& pre = cache.conv_pre[static_cast<std::size_t>(l)];
      const int c_out = static_cast<int>(pre.size());
      Eigen::MatrixXd dz(c_out, h * wdt);
      for (int ch = 0; ch < c_out; ++ch) {
        const Eigen::MatrixXd d_act =
            avg_unpool(d_maps[static_cast<std::size_t>(ch)], h, wdt);
        const Eigen::MatrixXd& p = pre[static_cast<std::size_t>(ch)];
        for (int r = 0; r < h; ++r)
          for (int cc = 0; cc < wdt; ++cc)
            dz(ch, r * wdt + cc) = d_act(r, cc) * act_grad(p(r, cc));
      }
      const std::vector<Eigen::MatrixXd>& layer_in =
          l > 0 ? cache.conv_pool[static_cast<std::size_t>(l - 1)]
                : cache.input.images;
      const Eigen::MatrixXd cols = im2col(layer_in, k);
      T[static_cast<std::size_t>(index_.conv_w[l])].grad += dz * cols.transpose();
      T[static_cast<std::size_t>(index_.conv_b[l])].grad.col(0) += dz.rowwise().sum();
      if (l > 0) {
        const Eigen::MatrixXd d_cols =
            T[static_cast<std::size_t>(index_.conv_w[l])].value.transpose() * dz;
        std::vector<Eigen::MatrixXd> d_in(layer_in.size());
        for (std::size_t ch = 0; ch < layer_in.size(); ++ch)
          d_in[ch] = Eigen::MatrixXd::Zero(layer_in[ch].rows(),
                                           layer_in[ch].cols());
        col2im(d_cols, k, h, wdt, &d_in);
        d_maps = std::move(d_in);
      }
    }
  }
}

void Network::zero_gradients() {
  for (Tensor& t : tensors_) {
    t.grad = Eigen::MatrixXd::Zero(t.value.rows(), t.value.cols());
  }
}

void Network::adam_step(double learning_rate, int step_number, double beta1,
                        double beta2, double epsilon) {
  for (Tensor& t : tensors_) {
    if (t.adam_m.size() == 0) {
      t.adam_m = Eigen::MatrixXd::Zero(t.value.rows(), t.value.cols());
      t.adam_v = Eigen::MatrixXd::Zero(t.value.rows(), t.value.cols());
    }
    Eigen::MatrixXd g = t.grad;
    if (t.prunable) g = g.cwiseProduct(t.mask);
    t.adam_m = beta1 * t.adam_m + (1.0 - beta1) * g;
    t.adam_v = beta2 * t.adam_v + (1.0 - beta2) * g.cwiseProduct(g);
    const double bc1 = 1.0 - std::pow(beta1, step_number);
    const double bc2 = 1.0 - std::pow(beta2, step_number);
    const Eigen::MatrixXd m_hat = t.adam_m / bc1;
    const Eigen::MatrixXd v_hat = t.adam_v / bc2;
    t.value -= learning_rate *
               m_hat.cwiseQuotient(v_hat.cwiseSqrt().array().matrix() +
                                   Eigen::MatrixXd::Constant(
                                       t.value.rows(), t.value.cols(), epsilon));
    if (t.prunable) t.value = t.value.cwiseProduct(t.mask);
  }
}

void Network::apply_masks() {
  for (Tensor& t : tensors_)
    if (t.prunable) t.value = t.value.cwiseProduct(t.mask);
}

std::int64_t Network::prunable_weight_count() const {
  std::int64_t n = 0;
  for (const Tensor& t : tensors_)
    if (t.prunable) n += t.value.size();
  return n;
}

std::int64_t Network::unmasked_weight_count() const {
  std::int64_t n = 0;
  for (const Tensor& t : tensors_)
    if (t.prunable) n += static_cast<std::int64_t>(t.mask.sum() + 0.5);
  return n;
}

void Network::reset_output_layer(int output_dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x0077beefULL);
  Tensor& w = tensors_[static_cast<std::size_t>(index_.out_w)];
  Tensor& b = tensors_[static_cast<std::size_t>(index_.out_b)];
  const int in = static_cast<int>(w.value.cols());
  const double bound = std::sqrt(1.0 / static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  w.value = Eigen::MatrixXd::Zero(output_dim, in);
  for (int r = 0; r < output_dim; ++r)
    for (int c = 0; c < in; ++c) w.value(r, c) = dist(rng);
  w.mask = Eigen::MatrixXd::Ones(output_dim, in);
  w.adam_m.resize(0, 0);
  w.adam_v.resize(0, 0);
  b.value = Eigen::MatrixXd::Zero(output_dim, 1);
  b.adam_m.resize(0, 0);
  b.adam_v.resize(0, 0);
  config_.output_dim = output_dim;
}

}  // namespace stepsense
