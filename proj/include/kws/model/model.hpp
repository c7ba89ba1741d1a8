#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "kws/attn/pooled_attention.hpp"
#include "kws/nn/layers.hpp"

namespace kws::model {

enum class Reduction { kAvgPool, kPooledAttention };

struct ModelSpec {
  std::string name;
  int channels = 45;
  int dilated_blocks = 4;
  int plain_blocks = 0;
  int heads = 5;
  Reduction reduction = Reduction::kPooledAttention;
  int num_classes = 12;
  int frames = 98;
  int features = 40;

  // Known variants: ST-AttNet4, ST-AttNet4-wide, ST-AttNet7, ST-Net4.
  static ModelSpec for_variant(const std::string& name);
  static const std::vector<std::string>& variant_names();
};

// Dilation of the i-th depthwise layer counted across the dilated residual
// blocks from 0 (two layers per block): d = 2^floor(i/3). Four blocks give
// 1,1,1,2,2,2,4,4. The input conv and the plain blocks stay at d = 1.
int dilation_for_layer(int layer_index);

class Model {
 public:
  Model(ModelSpec spec, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }

  // input [B, frames, features] -> logits [B, num_classes]
  Tape::NodeId forward(Tape& tape, Tape::NodeId input, nn::Mode mode);

  // Inference-mode posteriors [B, num_classes].
  Tensor predict_probs(const Tensor& batch);

  // Trainable parameters in a stable order (checkpoint / optimizer order).
  std::vector<Parameter*> parameters();
  // Batch-norm running statistics, named, same order as parameters() visits.
  std::vector<std::pair<std::string, Tensor*>> buffers();

  void zero_grad();

  nn::SeparableUnit input_unit;
  std::vector<nn::ResidualBlock> blocks;
  Parameter attention_w;  // [C, C], column slices are the heads
  Parameter fc_weight;    // [C, num_classes], bias-free

 private:
  ModelSpec spec_;
};

}  // namespace kws::model
