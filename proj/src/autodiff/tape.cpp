#include "kws/autodiff/tape.hpp"

#include <cstdint>

#include "kws/kernels/backend.hpp"
#include "kws/util/errors.hpp"

namespace kws {

namespace {

// W[k,n] -> WT[n,k]. Small matrices only; lets matmul backward reuse the
// order-preserving nn kernel instead of a strided variant.
Tensor transposed(const Tensor& w) {
  const int k = w.dim(0), n = w.dim(1);
  Tensor wt({n, k});
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < n; ++j) wt.at(j, i) = w.at(i, j);
  return wt;
}

}  // namespace

Tape::NodeId Tape::leaf(Parameter& p) {
  Node node;
  node.value = p.value;
  node.needs_grad = p.trainable;
  node.param = &p;
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size()) - 1;
}

Tape::NodeId Tape::constant(Tensor x) {
  Node node;
  node.value = std::move(x);
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size()) - 1;
}

Tape::NodeId Tape::make_node(Tensor value, std::vector<NodeId> parents,
                             BackwardFn bwd) {
  Node node;
  node.value = std::move(value);
  node.parents = std::move(parents);
  for (NodeId p : node.parents) node.needs_grad |= nodes_[size_t(p)].needs_grad;
  if (node.needs_grad) node.bwd = std::move(bwd);
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size()) - 1;
}

Tensor& Tape::grad(NodeId id) {
  Node& n = nodes_[size_t(id)];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape());
  return n.grad;
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0))
    throw ShapeError("matmul shape mismatch " + shape_str(av.shape()) + " x " +
                     shape_str(bv.shape()));
  const int m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  Tensor out({m, n});
  kernels::active().matmul_nn(av.data(), bv.data(), out.data(), m, k, n,
                              false);
  return make_node(std::move(out), {a, b}, [m, k, n](Tape& t, NodeId self) {
    const auto& ps = t.nodes_[size_t(self)].parents;
    const Tensor& g = t.grad(self);
    const Tensor& av2 = t.value(ps[0]);
    const Tensor& bv2 = t.value(ps[1]);
    if (t.needs_grad(ps[0])) {
      Tensor bt = transposed(bv2);
      kernels::active().matmul_nn(g.data(), bt.data(), t.grad(ps[0]).data(), m,
                                  n, k, true);
    }
    if (t.needs_grad(ps[1])) {
      kernels::active().matmul_tn(av2.data(), g.data(), t.grad(ps[1]).data(),
                                  k, m, n, true);
    }
  });
}

Tape::NodeId Tape::linear(NodeId x, NodeId w) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  if (wv.rank() != 2 || xv.rank() < 1 ||
      xv.dim(xv.rank() - 1) != wv.dim(0))
    throw ShapeError("linear shape mismatch " + shape_str(xv.shape()) +
                     " x " + shape_str(wv.shape()));
  const int c = wv.dim(0), d = wv.dim(1);
  const int rows = static_cast<int>(xv.size() / c);
  std::vector<int> out_shape = xv.shape();
  out_shape.back() = d;
  Tensor out(out_shape);
  kernels::active().matmul_nn(xv.data(), wv.data(), out.data(), rows, c, d,
                              false);
  return make_node(std::move(out), {x, w},
                   [rows, c, d](Tape& t, NodeId self) {
                     const auto& ps = t.nodes_[size_t(self)].parents;
                     const Tensor& g = t.grad(self);
                     if (t.needs_grad(ps[0])) {
                       Tensor wt = transposed(t.value(ps[1]));
                       kernels::active().matmul_nn(g.data(), wt.data(),
                                                   t.grad(ps[0]).data(), rows,
                                                   d, c, true);
                     }
                     if (t.needs_grad(ps[1])) {
                       kernels::active().matmul_tn(t.value(ps[0]).data(),
                                                   g.data(),
                                                   t.grad(ps[1]).data(), c,
                                                   rows, d, true);
                     }
                   });
}

Tape::NodeId Tape::relu(NodeId x) {
  const Tensor& xv = value(x);
  Tensor out(xv.shape());
  kernels::active().relu_fwd(xv.data(), out.data(), xv.size());
  return make_node(std::move(out), {x}, [](Tape& t, NodeId self) {
    const NodeId p = t.nodes_[size_t(self)].parents[0];
    if (!t.needs_grad(p)) return;
    const Tensor& g = t.grad(self);
    const Tensor& xv2 = t.value(p);
    kernels::active().relu_bwd(xv2.data(), g.data(), t.grad(p).data(),
                               xv2.size(), true);
  });
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.same_shape(bv))
    throw ShapeError("add shape mismatch " + shape_str(av.shape()) + " vs " +
                     shape_str(bv.shape()));
  Tensor out(av.shape());
  kernels::active().add(av.data(), bv.data(), out.data(), av.size());
  return make_node(std::move(out), {a, b}, [](Tape& t, NodeId self) {
    const auto& ps = t.nodes_[size_t(self)].parents;
    const Tensor& g = t.grad(self);
    for (NodeId p : ps) {
      if (!t.needs_grad(p)) continue;
      kernels::active().axpy(1.0, g.data(), t.grad(p).data(), g.size());
    }
  });
}

Tape::NodeId Tape::mul(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.same_shape(bv))
    throw ShapeError("mul shape mismatch " + shape_str(av.shape()) + " vs " +
                     shape_str(bv.shape()));
  Tensor out(av.shape());
  kernels::active().mul(av.data(), bv.data(), out.data(), av.size());
  return make_node(std::move(out), {a, b}, [](Tape& t, NodeId self) {
    const auto& ps = t.nodes_[size_t(self)].parents;
    const Tensor& g = t.grad(self);
    const Tensor& av2 = t.value(ps[0]);
    const Tensor& bv2 = t.value(ps[1]);
    if (t.needs_grad(ps[0])) {
      Tensor& da = t.grad(ps[0]);
      for (std::int64_t i = 0; i < g.size(); ++i) da[i] += g[i] * bv2[i];
    }
    if (t.needs_grad(ps[1])) {
      Tensor& db = t.grad(ps[1]);
      for (std::int64_t i = 0; i < g.size(); ++i) db[i] += g[i] * av2[i];
    }
  });
}

Tape::NodeId Tape::sum(NodeId x) {
  const Tensor& xv = value(x);
  double s = 0.0;
  for (std::int64_t i = 0; i < xv.size(); ++i) s += xv[i];
  return make_node(Tensor::scalar(s), {x}, [](Tape& t, NodeId self) {
    const NodeId p = t.nodes_[size_t(self)].parents[0];
    if (!t.needs_grad(p)) return;
    const double gv = t.grad(self)[0];
    Tensor& d = t.grad(p);
    for (std::int64_t i = 0; i < d.size(); ++i) d[i] += gv;
  });
}

Tape::NodeId Tape::reshape(NodeId x, std::vector<int> shape) {
  Tensor out = value(x).reshaped(std::move(shape));
  return make_node(std::move(out), {x}, [](Tape& t, NodeId self) {
    const NodeId p = t.nodes_[size_t(self)].parents[0];
    if (!t.needs_grad(p)) return;
    const Tensor& g = t.grad(self);
    kernels::active().axpy(1.0, g.data(), t.grad(p).data(), g.size());
  });
}

void Tape::backward(NodeId loss) {
  if (value(loss).size() != 1)
    throw ShapeError("backward requires a scalar loss, got " +
                     shape_str(value(loss).shape()));
  for (Node& n : nodes_) n.grad = Tensor();
  grad(loss)[0] = 1.0;
  for (NodeId id = loss; id >= 0; --id) {
    Node& n = nodes_[size_t(id)];
    if (n.grad.empty() || !n.bwd) continue;
    n.bwd(*this, id);
  }
  for (Node& n : nodes_) {
    if (n.param && n.param->trainable && !n.grad.empty())
      kernels::active().axpy(1.0, n.grad.data(), n.param->grad.data(),
                             n.grad.size());
  }
}

void Tape::reset() { nodes_.clear(); }

}  // namespace kws
