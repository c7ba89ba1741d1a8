#include "kws/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "kws/kernels/backend.hpp"
#include "kws/util/errors.hpp"

namespace kws::nn {

namespace {

// x interpreted as [B, T, C]; rank-2 input is a single sequence.
struct Btc {
  int b, t, c;
};

Btc btc_of(const Tensor& x, const char* who) {
  if (x.rank() == 2) return {1, x.dim(0), x.dim(1)};
  if (x.rank() == 3) return {x.dim(0), x.dim(1), x.dim(2)};
  throw ShapeError(std::string(who) + ": expected [T,C] or [B,T,C], got " +
                   shape_str(x.shape()));
}

}  // namespace

BatchNorm::BatchNorm(std::string name_prefix, int channels)
    : gamma(name_prefix + "/gamma", Tensor::full({channels}, 1.0)),
      beta(name_prefix + "/beta", Tensor({channels})),
      running_mean(Tensor({channels})),
      running_var(Tensor::full({channels}, 1.0)) {}

Tape::NodeId depthwise_conv(Tape& tape, Tape::NodeId x, DepthwiseConv& layer) {
  const Tensor& xv = tape.value(x);
  const Btc s = btc_of(xv, "depthwise_conv");
  if (layer.dilation < 1) throw RangeError("depthwise_conv: dilation must be >= 1");
  if (layer.kernel.value.rank() != 2 || layer.kernel.value.dim(0) != 3 ||
      layer.kernel.value.dim(1) != s.c)
    throw ShapeError("depthwise_conv: kernel " +
                     shape_str(layer.kernel.value.shape()) +
                     " does not match input " + shape_str(xv.shape()));

  const Tape::NodeId k = tape.leaf(layer.kernel);
  const int d = layer.dilation;
  Tensor out(xv.shape());
  const auto& ops = kernels::active();
  const std::int64_t plane = std::int64_t(s.t) * s.c;
  for (int b = 0; b < s.b; ++b)
    ops.dwconv_fwd(xv.data() + b * plane, tape.value(k).data(),
                   out.data() + b * plane, s.t, s.c, d);

  return tape.make_node(std::move(out), {x, k},
                        [s, d, plane](Tape& t, Tape::NodeId self) {
                          const auto& g = t.grad(self);
                          const Tape::NodeId px = t.parent(self, 0);
                          const Tape::NodeId pk = t.parent(self, 1);
                          const auto& ops2 = kernels::active();
                          if (t.needs_grad(px)) {
                            Tensor& dx = t.grad(px);
                            for (int b = 0; b < s.b; ++b)
                              ops2.dwconv_dx(g.data() + b * plane,
                                             t.value(pk).data(),
                                             dx.data() + b * plane, s.t, s.c,
                                             d, true);
                          }
                          if (t.needs_grad(pk)) {
                            Tensor& dk = t.grad(pk);
                            for (int b = 0; b < s.b; ++b)
                              ops2.dwconv_dk(g.data() + b * plane,
                                             t.value(px).data() + b * plane,
                                             dk.data(), s.t, s.c, d, true);
                          }
                        });
}

Tape::NodeId pointwise_conv(Tape& tape, Tape::NodeId x, PointwiseConv& layer) {
  const Tensor& xv = tape.value(x);
  btc_of(xv, "pointwise_conv");
  const Tape::NodeId w = tape.leaf(layer.weight);
  return tape.linear(x, w);
}

namespace {

struct BnSaved {
  Tensor xhat;    // normalized input
  Tensor invstd;  // per channel
};

}  // namespace

Tape::NodeId batch_norm(Tape& tape, Tape::NodeId x, BatchNorm& layer,
                        Mode mode) {
  const Tensor& xv = tape.value(x);
  if (xv.rank() < 2)
    throw ShapeError("batch_norm: expected at least rank 2, got " +
                     shape_str(xv.shape()));
  const int c = xv.dim(xv.rank() - 1);
  const int rows = static_cast<int>(xv.size() / c);
  if (layer.gamma.value.dim(0) != c)
    throw ShapeError("batch_norm: channel mismatch");
  if (mode == Mode::kTrain && rows < 2)
    throw ShapeError("batch_norm: train mode needs more than one row per channel");

  const Tape::NodeId gamma = tape.leaf(layer.gamma);
  const Tape::NodeId beta = tape.leaf(layer.beta);
  const auto& ops = kernels::active();
  auto saved = std::make_shared<BnSaved>();
  saved->invstd = Tensor({c});
  Tensor out(xv.shape());

  if (mode == Mode::kTrain) {
    Tensor mean({c}), var({c}), neg_mean({c});
    ops.colsum(xv.data(), mean.data(), rows, c);
    for (int i = 0; i < c; ++i) {
      mean[i] /= double(rows);
      neg_mean[i] = -mean[i];
    }
    Tensor ones = Tensor::full({c}, 1.0);
    Tensor xc(xv.shape());
    ops.col_affine(xv.data(), ones.data(), neg_mean.data(), xc.data(), rows, c);
    ops.coldot(xc.data(), xc.data(), var.data(), rows, c);
    Tensor zeros({c});
    for (int i = 0; i < c; ++i) {
      var[i] /= double(rows);
      saved->invstd[i] = 1.0 / std::sqrt(var[i] + layer.eps);
    }
    saved->xhat = Tensor(xv.shape());
    ops.col_affine(xc.data(), saved->invstd.data(), zeros.data(),
                   saved->xhat.data(), rows, c);
    ops.col_affine(saved->xhat.data(), tape.value(gamma).data(),
                   tape.value(beta).data(), out.data(), rows, c);

    const double keep = layer.momentum;
    for (int i = 0; i < c; ++i) {
      layer.running_mean[i] = keep * layer.running_mean[i] + (1.0 - keep) * mean[i];
      layer.running_var[i] = keep * layer.running_var[i] + (1.0 - keep) * var[i];
    }
  } else {
    Tensor a({c}), bshift({c});
    for (int i = 0; i < c; ++i) {
      saved->invstd[i] = 1.0 / std::sqrt(layer.running_var[i] + layer.eps);
      a[i] = saved->invstd[i];
      bshift[i] = -layer.running_mean[i] * saved->invstd[i];
    }
    saved->xhat = Tensor(xv.shape());
    ops.col_affine(xv.data(), a.data(), bshift.data(), saved->xhat.data(),
                   rows, c);
    ops.col_affine(saved->xhat.data(), tape.value(gamma).data(),
                   tape.value(beta).data(), out.data(), rows, c);
  }

  const bool train = mode == Mode::kTrain;
  return tape.make_node(
      std::move(out), {x, gamma, beta},
      [saved, rows, c, train](Tape& t, Tape::NodeId self) {
        const Tensor& g = t.grad(self);
        const Tape::NodeId px = t.parent(self, 0);
        const Tape::NodeId pg = t.parent(self, 1);
        const Tape::NodeId pb = t.parent(self, 2);
        const auto& ops2 = kernels::active();
        Tensor col({c});
        if (t.needs_grad(pb)) {
          ops2.colsum(g.data(), col.data(), rows, c);
          ops2.axpy(1.0, col.data(), t.grad(pb).data(), c);
        }
        if (t.needs_grad(pg)) {
          ops2.coldot(g.data(), saved->xhat.data(), col.data(), rows, c);
          ops2.axpy(1.0, col.data(), t.grad(pg).data(), c);
        }
        if (!t.needs_grad(px)) return;
        const Tensor& gamma_v = t.value(pg);
        Tensor& dx = t.grad(px);
        if (train) {
          Tensor mg({c}), mgx({c});
          ops2.colsum(g.data(), mg.data(), rows, c);
          ops2.coldot(g.data(), saved->xhat.data(), mgx.data(), rows, c);
          for (int i = 0; i < c; ++i) {
            mg[i] /= double(rows);
            mgx[i] /= double(rows);
          }
          for (int r = 0; r < rows; ++r) {
            const std::int64_t off = std::int64_t(r) * c;
            const double* gr = g.data() + off;
            const double* xh = saved->xhat.data() + off;
            double* dxr = dx.data() + off;
            for (int i = 0; i < c; ++i)
              dxr[i] += gamma_v[i] * saved->invstd[i] *
                        (gr[i] - mg[i] - xh[i] * mgx[i]);
          }
        } else {
          for (int r = 0; r < rows; ++r) {
            const std::int64_t off = std::int64_t(r) * c;
            const double* gr = g.data() + off;
            double* dxr = dx.data() + off;
            for (int i = 0; i < c; ++i)
              dxr[i] += gamma_v[i] * saved->invstd[i] * gr[i];
          }
        }
      });
}

Tensor avg_pool_time(const Tensor& x) {
  if (x.rank() != 2) throw ShapeError("avg_pool_time: expected [T,C]");
  const int t = x.dim(0), c = x.dim(1);
  Tensor out({c});
  std::vector<double> column(static_cast<size_t>(t));
  for (int j = 0; j < c; ++j) {
    for (int i = 0; i < t; ++i) column[size_t(i)] = x.at(i, j);
    std::sort(column.begin(), column.end());
    double acc = 0.0;
    for (double v : column) acc += v;
    out[j] = acc / double(t);
  }
  return out;
}

Tape::NodeId avg_pool_time(Tape& tape, Tape::NodeId x) {
  const Tensor& xv = tape.value(x);
  const Btc s = btc_of(xv, "avg_pool_time");
  Tensor out({s.b, s.c});
  std::vector<double> column(static_cast<size_t>(s.t));
  for (int b = 0; b < s.b; ++b) {
    for (int j = 0; j < s.c; ++j) {
      for (int i = 0; i < s.t; ++i) column[size_t(i)] = xv.at(b, i, j);
      std::sort(column.begin(), column.end());
      double acc = 0.0;
      for (double v : column) acc += v;
      out.at(b, j) = acc / double(s.t);
    }
  }
  return tape.make_node(std::move(out), {x}, [s](Tape& t, Tape::NodeId self) {
    const Tape::NodeId px = t.parent(self, 0);
    if (!t.needs_grad(px)) return;
    const Tensor& g = t.grad(self);
    Tensor& dx = t.grad(px);
    const double inv_t = 1.0 / double(s.t);
    for (int b = 0; b < s.b; ++b)
      for (int i = 0; i < s.t; ++i)
        for (int j = 0; j < s.c; ++j)
          dx.at(b, i, j) += g.at(b, j) * inv_t;
  });
}

Tensor softmax_rows(const Tensor& logits) {
  if (logits.rank() != 2) throw ShapeError("softmax_rows: expected [B,K]");
  const int b = logits.dim(0), k = logits.dim(1);
  Tensor probs({b, k});
  for (int i = 0; i < b; ++i) {
    double mx = logits.at(i, 0);
    for (int j = 1; j < k; ++j) mx = std::max(mx, logits.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      probs.at(i, j) = std::exp(logits.at(i, j) - mx);
      sum += probs.at(i, j);
    }
    for (int j = 0; j < k; ++j) probs.at(i, j) /= sum;
  }
  return probs;
}

Tape::NodeId softmax_cross_entropy(Tape& tape, Tape::NodeId logits,
                                   const std::vector<int>& labels) {
  const Tensor& lv = tape.value(logits);
  if (lv.rank() != 2)
    throw ShapeError("softmax_cross_entropy: expected [B,K] logits");
  const int b = lv.dim(0), k = lv.dim(1);
  if (static_cast<int>(labels.size()) != b)
    throw ShapeError("softmax_cross_entropy: batch/label count mismatch");
  for (int lbl : labels)
    if (lbl < 0 || lbl >= k)
      throw ValueError("softmax_cross_entropy: label " + std::to_string(lbl) +
                       " outside [0," + std::to_string(k) + ")");

  auto probs = std::make_shared<Tensor>(softmax_rows(lv));
  double loss = 0.0;
  for (int i = 0; i < b; ++i) {
    double mx = lv.at(i, 0);
    for (int j = 1; j < k; ++j) mx = std::max(mx, lv.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += std::exp(lv.at(i, j) - mx);
    loss += std::log(sum) - (lv.at(i, labels[size_t(i)]) - mx);
  }
  loss /= double(b);

  auto labels_copy = std::make_shared<std::vector<int>>(labels);
  return tape.make_node(
      Tensor::scalar(loss), {logits},
      [probs, labels_copy, b, k](Tape& t, Tape::NodeId self) {
        const Tape::NodeId p = t.parent(self, 0);
        if (!t.needs_grad(p)) return;
        const double g = t.grad(self)[0];
        Tensor& dl = t.grad(p);
        const double scale = g / double(b);
        for (int i = 0; i < b; ++i) {
          for (int j = 0; j < k; ++j)
            dl.at(i, j) += scale * (*probs)[std::int64_t(i) * k + j];
          dl.at(i, (*labels_copy)[size_t(i)]) -= scale;
        }
      });
}

Tape::NodeId separable_unit(Tape& tape, Tape::NodeId x, SeparableUnit& unit,
                            Mode mode, bool final_relu) {
  Tape::NodeId h = depthwise_conv(tape, x, unit.dw);
  h = batch_norm(tape, h, unit.bn1, mode);
  h = tape.relu(h);
  h = pointwise_conv(tape, h, unit.pw);
  h = batch_norm(tape, h, unit.bn2, mode);
  return final_relu ? tape.relu(h) : h;
}

Tape::NodeId residual_block(Tape& tape, Tape::NodeId x, ResidualBlock& block,
                            Mode mode) {
  Tape::NodeId h = separable_unit(tape, x, block.unit1, mode, true);
  h = separable_unit(tape, h, block.unit2, mode, /*final_relu=*/false);
  return tape.relu(tape.add(h, x));
}

}  // namespace kws::nn
