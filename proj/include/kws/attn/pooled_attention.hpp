#pragma once

#include <vector>

#include "kws/autodiff/tape.hpp"

namespace kws::attn {

// Generic scaled dot-product attention: rowwise softmax(Q K^T / sqrt(Dk)) V.
// This is the reference kernel that both the plain and the pooled-query
// formulations reduce to; the pooled path is checked against it in tests.
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v);

// Temporally pooled multi-head attention over u [T, D_u] with one shared
// projection w [D_u, D] whose column slices are the heads: per head i,
//   q_i = AvgPool_t(u) W_i,  K_i = V_i = u W_i,
//   h_i = softmax(q_i K_i^T / sqrt(D/n)) V_i,
// and the h_i are concatenated into a length-D vector.
Tensor pooled_attention(const Tensor& u, const Tensor& w, int heads);

// The T softmax weights head `head_index` assigns to the timesteps of u.
std::vector<double> attention_weights(const Tensor& u, const Tensor& w,
                                      int heads, int head_index);

// Tape op over the already-projected sequence p = u W, shape [B, T, D]
// (pooling commutes with the shared linear projection). Output [B, D].
Tape::NodeId attention_pool(Tape& tape, Tape::NodeId p, int heads);

}  // namespace kws::attn
