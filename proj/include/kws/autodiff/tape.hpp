#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kws/autodiff/tensor.hpp"

namespace kws {

// A named, trainable tensor. Gradients accumulate across backward() calls
// until zero_grad() is invoked.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  void zero_grad() { grad.fill(0.0); }
};

// Reverse-mode tape. Nodes are appended in forward order, so creation order
// is already a topological order for the backward sweep. One tape instance
// is single-threaded; reset() drops the recording but leaves bound
// parameters untouched.
class Tape {
 public:
  using NodeId = int;
  using BackwardFn = std::function<void(Tape&, NodeId)>;

  NodeId leaf(Parameter& p);
  NodeId constant(Tensor x);

  // Generic hook for modules that define their own ops (conv, batch norm,
  // attention). `bwd` must add this node's contribution into each parent's
  // grad buffer, guarded by needs_grad().
  NodeId make_node(Tensor value, std::vector<NodeId> parents, BackwardFn bwd);

  // --- core tensor algebra ---
  NodeId matmul(NodeId a, NodeId b);        // [m,k] x [k,n] -> [m,n]
  NodeId linear(NodeId x, NodeId w);        // [...,C] x [C,D] -> [...,D]
  NodeId relu(NodeId x);
  NodeId add(NodeId a, NodeId b);           // same shape
  NodeId mul(NodeId a, NodeId b);           // elementwise
  NodeId sum(NodeId x);                     // -> scalar
  NodeId reshape(NodeId x, std::vector<int> shape);

  const Tensor& value(NodeId id) const { return nodes_[size_t(id)].value; }
  bool needs_grad(NodeId id) const { return nodes_[size_t(id)].needs_grad; }
  NodeId parent(NodeId id, int i) const {
    return nodes_[size_t(id)].parents[size_t(i)];
  }
  // Grad buffer for a node, zero-allocated on first touch.
  Tensor& grad(NodeId id);

  // Seeds d(loss)/d(loss) = 1, runs the reverse sweep, then adds every
  // trainable leaf's grad into its Parameter::grad. May be called repeatedly;
  // parameter grads accumulate, node grads are re-derived per call.
  void backward(NodeId loss);

  void reset();
  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // empty until touched during backward
    std::vector<NodeId> parents;
    BackwardFn bwd;
    bool needs_grad = false;
    Parameter* param = nullptr;
  };

  std::vector<Node> nodes_;
};

}  // namespace kws
