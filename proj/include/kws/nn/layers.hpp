#pragma once

#include <vector>

#include "kws/autodiff/tape.hpp"

namespace kws::nn {

enum class Mode { kTrain, kInfer };

// Per-channel 3-tap temporal filter, stride 1, zero padding of `dilation`
// frames per side so time length is preserved. Bias-free.
struct DepthwiseConv {
  Parameter kernel;  // [3, C]
  int dilation = 1;
};

// 1x1 cross-channel mix; a per-timestep linear map. Bias-free.
struct PointwiseConv {
  Parameter weight;  // [C_in, C_out]
};

struct BatchNorm {
  Parameter gamma, beta;           // [C]
  Tensor running_mean, running_var;  // [C]; start at 0 / 1
  double eps = 1e-5;
  double momentum = 0.9;  // fraction of the old running estimate kept

  explicit BatchNorm(std::string name_prefix = "", int channels = 1);
};

// DW -> BN -> ReLU -> PW -> BN -> ReLU. The trailing ReLU is optional so a
// residual block can add the shortcut first.
struct SeparableUnit {
  DepthwiseConv dw;
  BatchNorm bn1;
  PointwiseConv pw;
  BatchNorm bn2;
};

// Two separable units plus an identity shortcut; the final ReLU runs after
// the addition (post-activation residual). Input and output shapes match.
struct ResidualBlock {
  SeparableUnit unit1, unit2;
};

// --- tape ops (x is [B, T, C]) ---
Tape::NodeId depthwise_conv(Tape& tape, Tape::NodeId x, DepthwiseConv& layer);
Tape::NodeId pointwise_conv(Tape& tape, Tape::NodeId x, PointwiseConv& layer);
Tape::NodeId batch_norm(Tape& tape, Tape::NodeId x, BatchNorm& layer,
                        Mode mode);
Tape::NodeId avg_pool_time(Tape& tape, Tape::NodeId x);  // -> [B, C]
Tape::NodeId softmax_cross_entropy(Tape& tape, Tape::NodeId logits,
                                   const std::vector<int>& labels);
Tape::NodeId separable_unit(Tape& tape, Tape::NodeId x, SeparableUnit& unit,
                            Mode mode, bool final_relu = true);
Tape::NodeId residual_block(Tape& tape, Tape::NodeId x, ResidualBlock& block,
                            Mode mode);

// --- plain helpers ---
// Column mean over time. Summation runs over a value-sorted ordering, so the
// result is exactly invariant under any permutation of the time frames.
Tensor avg_pool_time(const Tensor& x);  // [T, C] -> [C]
Tensor softmax_rows(const Tensor& logits);

}  // namespace kws::nn
