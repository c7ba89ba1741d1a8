#include "kws/model/model.hpp"

#include <cmath>
#include <random>

#include "kws/util/errors.hpp"

namespace kws::model {

ModelSpec ModelSpec::for_variant(const std::string& name) {
  ModelSpec s;
  s.name = name;
  if (name == "ST-AttNet4") {
    s.channels = 45;
    s.plain_blocks = 0;
    s.reduction = Reduction::kPooledAttention;
  } else if (name == "ST-AttNet4-wide") {
    s.channels = 65;
    s.plain_blocks = 0;
    s.reduction = Reduction::kPooledAttention;
  } else if (name == "ST-AttNet7") {
    s.channels = 45;
    s.plain_blocks = 3;
    s.reduction = Reduction::kPooledAttention;
  } else if (name == "ST-Net4") {
    s.channels = 45;
    s.plain_blocks = 0;
    s.reduction = Reduction::kAvgPool;
  } else {
    std::string known;
    for (const auto& v : variant_names()) known += " " + v;
    throw ConfigError("unknown model variant '" + name + "'; known:" + known);
  }
  return s;
}

const std::vector<std::string>& ModelSpec::variant_names() {
  static const std::vector<std::string> names = {"ST-AttNet4", "ST-AttNet4-wide",
                                                 "ST-AttNet7", "ST-Net4"};
  return names;
}

int dilation_for_layer(int layer_index) { return 1 << (layer_index / 3); }

namespace {

void he_uniform(Tensor& t, int fan_in, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / double(fan_in));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
}

nn::SeparableUnit make_unit(const std::string& prefix, int c_in, int c_out,
                            int dilation, std::mt19937_64& rng) {
  nn::SeparableUnit u{
      .dw = {Parameter(prefix + "/dw/kernel", Tensor({3, c_in})), dilation},
      .bn1 = nn::BatchNorm(prefix + "/bn1", c_in),
      .pw = {Parameter(prefix + "/pw/weight", Tensor({c_in, c_out}))},
      .bn2 = nn::BatchNorm(prefix + "/bn2", c_out),
  };
  he_uniform(u.dw.kernel.value, 3, rng);
  he_uniform(u.pw.weight.value, c_in, rng);
  return u;
}

}  // namespace

Model::Model(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  std::mt19937_64 rng(seed);
  const int c = spec_.channels;

  input_unit = make_unit("input", spec_.features, c, 1, rng);

  int dw_index = 0;
  for (int b = 0; b < spec_.dilated_blocks; ++b) {
    const std::string p = "block" + std::to_string(b);
    nn::ResidualBlock blk{
        make_unit(p + "/u1", c, c, dilation_for_layer(dw_index), rng),
        make_unit(p + "/u2", c, c, dilation_for_layer(dw_index + 1), rng)};
    dw_index += 2;
    blocks.push_back(std::move(blk));
  }
  for (int b = 0; b < spec_.plain_blocks; ++b) {
    const std::string p = "block" + std::to_string(spec_.dilated_blocks + b);
    blocks.push_back(nn::ResidualBlock{make_unit(p + "/u1", c, c, 1, rng),
                                       make_unit(p + "/u2", c, c, 1, rng)});
  }

  if (spec_.reduction == Reduction::kPooledAttention) {
    attention_w = Parameter("attention/w", Tensor({c, c}));
    he_uniform(attention_w.value, c, rng);
    if (c % spec_.heads != 0)
      throw ConfigError("channel width " + std::to_string(c) +
                        " not divisible by " + std::to_string(spec_.heads) +
                        " heads");
  }

  fc_weight = Parameter("fc/weight", Tensor({c, spec_.num_classes}));
  he_uniform(fc_weight.value, c, rng);
}

Tape::NodeId Model::forward(Tape& tape, Tape::NodeId input, nn::Mode mode) {
  const Tensor& x = tape.value(input);
  if (x.rank() != 3 || x.dim(1) != spec_.frames || x.dim(2) != spec_.features)
    throw ShapeError("model forward: expected [B," +
                     std::to_string(spec_.frames) + "," +
                     std::to_string(spec_.features) + "], got " +
                     shape_str(x.shape()));

  Tape::NodeId h = nn::separable_unit(tape, input, input_unit, mode);
  for (auto& blk : blocks) h = nn::residual_block(tape, h, blk, mode);

  Tape::NodeId reduced;
  if (spec_.reduction == Reduction::kPooledAttention) {
    Tape::NodeId w = tape.leaf(attention_w);
    Tape::NodeId projected = tape.linear(h, w);
    reduced = attn::attention_pool(tape, projected, spec_.heads);
  } else {
    reduced = nn::avg_pool_time(tape, h);
  }

  Tape::NodeId fc = tape.leaf(fc_weight);
  return tape.linear(reduced, fc);
}

Tensor Model::predict_probs(const Tensor& batch) {
  Tape tape;
  Tape::NodeId logits = forward(tape, tape.constant(batch), nn::Mode::kInfer);
  return nn::softmax_rows(tape.value(logits));
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out;
  auto add_unit = [&out](nn::SeparableUnit& u) {
    out.push_back(&u.dw.kernel);
    out.push_back(&u.bn1.gamma);
    out.push_back(&u.bn1.beta);
    out.push_back(&u.pw.weight);
    out.push_back(&u.bn2.gamma);
    out.push_back(&u.bn2.beta);
  };
  add_unit(input_unit);
  for (auto& blk : blocks) {
    add_unit(blk.unit1);
    add_unit(blk.unit2);
  }
  if (spec_.reduction == Reduction::kPooledAttention)
    out.push_back(&attention_w);
  out.push_back(&fc_weight);
  return out;
}

std::vector<std::pair<std::string, Tensor*>> Model::buffers() {
  std::vector<std::pair<std::string, Tensor*>> out;
  auto add_bn = [&out](const std::string& prefix, nn::BatchNorm& bn) {
    out.emplace_back(prefix + "/running_mean", &bn.running_mean);
    out.emplace_back(prefix + "/running_var", &bn.running_var);
  };
  auto add_unit = [&](const std::string& prefix, nn::SeparableUnit& u) {
    add_bn(prefix + "/bn1", u.bn1);
    add_bn(prefix + "/bn2", u.bn2);
  };
  add_unit("input", input_unit);
  for (size_t b = 0; b < blocks.size(); ++b) {
    const std::string p = "block" + std::to_string(b);
    add_unit(p + "/u1", blocks[b].unit1);
    add_unit(p + "/u2", blocks[b].unit2);
  }
  return out;
}

void Model::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

}  // namespace kws::model
