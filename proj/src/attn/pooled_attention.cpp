#include "kws/attn/pooled_attention.hpp"

#include <cmath>
#include <memory>

#include "kws/kernels/backend.hpp"
#include "kws/util/errors.hpp"

namespace kws::attn {

namespace {

void check_heads(int d, int heads) {
  if (heads < 1) throw RangeError("attention: head count must be >= 1");
  if (d % heads != 0)
    throw ShapeError("attention: width " + std::to_string(d) +
                     " not divisible by " + std::to_string(heads) + " heads");
}

// Forward over one projected sequence p [T, D]. Writes the pooled query q
// [D], per-head softmax weights wts [heads, T] and the output y [D].
void pooled_heads_forward(const double* p, int t, int d, int heads, double* q,
                          double* wts, double* y) {
  const int h = d / heads;
  const double scale = 1.0 / std::sqrt(double(h));

  kernels::active().colsum(p, q, t, d);
  for (int j = 0; j < d; ++j) q[j] /= double(t);

  std::vector<double> scores(static_cast<size_t>(t));
  for (int head = 0; head < heads; ++head) {
    const int d0 = head * h;
    for (int i = 0; i < t; ++i) {
      const double* row = p + std::int64_t(i) * d + d0;
      double acc = 0.0;
      for (int j = 0; j < h; ++j) acc += q[d0 + j] * row[j];
      scores[size_t(i)] = acc * scale;
    }
    double mx = scores[0];
    for (int i = 1; i < t; ++i) mx = std::max(mx, scores[size_t(i)]);
    double sum = 0.0;
    double* w = wts + std::int64_t(head) * t;
    for (int i = 0; i < t; ++i) {
      w[i] = std::exp(scores[size_t(i)] - mx);
      sum += w[i];
    }
    for (int i = 0; i < t; ++i) w[i] /= sum;

    for (int j = 0; j < h; ++j) y[d0 + j] = 0.0;
    for (int i = 0; i < t; ++i) {
      const double* row = p + std::int64_t(i) * d + d0;
      const double wi = w[i];
      for (int j = 0; j < h; ++j) y[d0 + j] += wi * row[j];
    }
  }
}

// Reverse of pooled_heads_forward for one sequence. gy [D] is the upstream
// gradient; dp [T, D] is accumulated into. The three paths through p are the
// value sum, the key/score path, and the pooled query.
void pooled_heads_backward(const double* p, const double* q, const double* wts,
                           const double* gy, int t, int d, int heads,
                           double* dp) {
  const int h = d / heads;
  const double scale = 1.0 / std::sqrt(double(h));
  std::vector<double> gw(static_cast<size_t>(t));
  std::vector<double> gs(static_cast<size_t>(t));
  std::vector<double> dq(static_cast<size_t>(d), 0.0);

  for (int head = 0; head < heads; ++head) {
    const int d0 = head * h;
    const double* w = wts + std::int64_t(head) * t;

    // value path and dL/dw
    for (int i = 0; i < t; ++i) {
      const double* row = p + std::int64_t(i) * d + d0;
      double* drow = dp + std::int64_t(i) * d + d0;
      double acc = 0.0;
      for (int j = 0; j < h; ++j) {
        drow[j] += w[i] * gy[d0 + j];
        acc += gy[d0 + j] * row[j];
      }
      gw[size_t(i)] = acc;
    }

    // softmax backward: gs = w * (gw - sum_i w_i gw_i)
    double dot = 0.0;
    for (int i = 0; i < t; ++i) dot += w[i] * gw[size_t(i)];
    for (int i = 0; i < t; ++i) gs[size_t(i)] = w[i] * (gw[size_t(i)] - dot);

    // score path: s_i = scale * <q_head, p_i_head>
    for (int i = 0; i < t; ++i) {
      const double* row = p + std::int64_t(i) * d + d0;
      double* drow = dp + std::int64_t(i) * d + d0;
      const double gsi = gs[size_t(i)] * scale;
      for (int j = 0; j < h; ++j) {
        drow[j] += gsi * q[d0 + j];
        dq[size_t(d0 + j)] += gsi * row[j];
      }
    }
  }

  // query path: q = colmean(p)
  const double inv_t = 1.0 / double(t);
  for (int i = 0; i < t; ++i) {
    double* drow = dp + std::int64_t(i) * d;
    for (int j = 0; j < d; ++j) drow[j] += dq[size_t(j)] * inv_t;
  }
}

}  // namespace

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v) {
  if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2)
    throw ShapeError("scaled_dot_attention: rank-2 inputs required");
  if (q.dim(1) != k.dim(1))
    throw ShapeError("scaled_dot_attention: query dim " +
                     std::to_string(q.dim(1)) + " vs key dim " +
                     std::to_string(k.dim(1)));
  if (k.dim(0) != v.dim(0))
    throw ShapeError("scaled_dot_attention: key/value row mismatch");

  const int tq = q.dim(0), t = k.dim(0), dk = q.dim(1), dv = v.dim(1);
  const double scale = 1.0 / std::sqrt(double(dk));
  Tensor out({tq, dv});
  std::vector<double> scores(static_cast<size_t>(t));
  for (int i = 0; i < tq; ++i) {
    for (int r = 0; r < t; ++r) {
      double acc = 0.0;
      for (int j = 0; j < dk; ++j) acc += q.at(i, j) * k.at(r, j);
      scores[size_t(r)] = acc * scale;
    }
    double mx = scores[0];
    for (int r = 1; r < t; ++r) mx = std::max(mx, scores[size_t(r)]);
    double sum = 0.0;
    for (int r = 0; r < t; ++r) {
      scores[size_t(r)] = std::exp(scores[size_t(r)] - mx);
      sum += scores[size_t(r)];
    }
    for (int j = 0; j < dv; ++j) out.at(i, j) = 0.0;
    for (int r = 0; r < t; ++r) {
      const double w = scores[size_t(r)] / sum;
      for (int j = 0; j < dv; ++j) out.at(i, j) += w * v.at(r, j);
    }
  }
  return out;
}

Tensor pooled_attention(const Tensor& u, const Tensor& w, int heads) {
  if (u.rank() != 2 || w.rank() != 2 || u.dim(1) != w.dim(0))
    throw ShapeError("pooled_attention: input " + shape_str(u.shape()) +
                     " vs projection " + shape_str(w.shape()));
  const int t = u.dim(0), d = w.dim(1);
  check_heads(d, heads);

  Tensor p({t, d});
  kernels::active().matmul_nn(u.data(), w.data(), p.data(), t, u.dim(1), d,
                              false);
  Tensor q({d}), y({d});
  std::vector<double> wts(static_cast<size_t>(heads) * t);
  pooled_heads_forward(p.data(), t, d, heads, q.data(), wts.data(), y.data());
  return y;
}

std::vector<double> attention_weights(const Tensor& u, const Tensor& w,
                                      int heads, int head_index) {
  if (u.rank() != 2 || w.rank() != 2 || u.dim(1) != w.dim(0))
    throw ShapeError("attention_weights: input " + shape_str(u.shape()) +
                     " vs projection " + shape_str(w.shape()));
  const int t = u.dim(0), d = w.dim(1);
  check_heads(d, heads);
  if (head_index < 0 || head_index >= heads)
    throw RangeError("attention_weights: head index out of range");

  Tensor p({t, d});
  kernels::active().matmul_nn(u.data(), w.data(), p.data(), t, u.dim(1), d,
                              false);
  Tensor q({d}), y({d});
  std::vector<double> wts(static_cast<size_t>(heads) * t);
  pooled_heads_forward(p.data(), t, d, heads, q.data(), wts.data(), y.data());
  return std::vector<double>(wts.begin() + std::int64_t(head_index) * t,
                             wts.begin() + std::int64_t(head_index + 1) * t);
}

Tape::NodeId attention_pool(Tape& tape, Tape::NodeId p, int heads) {
  const Tensor& pv = tape.value(p);
  if (pv.rank() != 3)
    throw ShapeError("attention_pool: expected [B,T,D], got " +
                     shape_str(pv.shape()));
  const int b = pv.dim(0), t = pv.dim(1), d = pv.dim(2);
  check_heads(d, heads);

  auto q = std::make_shared<Tensor>(Tensor({b, d}));
  auto wts = std::make_shared<Tensor>(Tensor({b, heads, t}));
  Tensor out({b, d});
  const std::int64_t plane = std::int64_t(t) * d;
  for (int i = 0; i < b; ++i)
    pooled_heads_forward(pv.data() + i * plane, t, d, heads,
                         q->data() + std::int64_t(i) * d,
                         wts->data() + std::int64_t(i) * heads * t,
                         out.data() + std::int64_t(i) * d);

  return tape.make_node(
      std::move(out), {p},
      [q, wts, b, t, d, heads, plane](Tape& tp, Tape::NodeId self) {
        const Tape::NodeId parent = tp.parent(self, 0);
        if (!tp.needs_grad(parent)) return;
        const Tensor& g = tp.grad(self);
        const Tensor& pv2 = tp.value(parent);
        Tensor& dp = tp.grad(parent);
        for (int i = 0; i < b; ++i)
          pooled_heads_backward(pv2.data() + i * plane,
                                q->data() + std::int64_t(i) * d,
                                wts->data() + std::int64_t(i) * heads * t,
                                g.data() + std::int64_t(i) * d, t, d, heads,
                                dp.data() + i * plane);
      });
}

}  // namespace kws::attn
