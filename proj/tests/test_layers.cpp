#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "kws/nn/layers.hpp"
#include "kws/util/errors.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace kws;
using kws::testing::bit_equal;
using kws::testing::random_int_tensor;
using kws::testing::random_tensor;

namespace {

Tensor run_dwconv(const Tensor& x, const Tensor& kernel, int dilation) {
  Tape tape;
  nn::DepthwiseConv layer{Parameter("k", kernel), dilation};
  return tape.value(nn::depthwise_conv(tape, tape.constant(x), layer));
}

}  // namespace

TEST_SUITE_BEGIN("layers");

TEST_CASE("depthwise conv: identity kernel reproduces the input") {
  std::mt19937_64 rng(3);
  const Tensor x = random_tensor({9, 5}, rng);
  Tensor kernel({3, 5});
  for (int c = 0; c < 5; ++c) kernel.at(1, c) = 1.0;
  for (int d : {1, 2, 4}) CHECK(bit_equal(run_dwconv(x, kernel, d), x));
}

TEST_CASE("depthwise conv: hand-worked differences at d = 1 and d = 2") {
  const Tensor x({4, 1}, {1, 2, 3, 4});
  const Tensor kernel({3, 1}, {1, 0, -1});

  const Tensor d1 = run_dwconv(x, kernel, 1);
  const Tensor want1({4, 1}, {-2, -2, -2, 3});
  CHECK(bit_equal(d1, want1));

  const Tensor d2 = run_dwconv(x, kernel, 2);
  const Tensor want2({4, 1}, {-3, -4, 1, 2});
  CHECK(bit_equal(d2, want2));
}

TEST_CASE("depthwise conv matches the nested-loop oracle exactly") {
  std::mt19937_64 rng(5);
  for (int d : {1, 2, 4}) {
    for (int iter = 0; iter < 40; ++iter) {
      const int t = 1 + int(rng() % 16);
      const int c = 1 + int(rng() % 7);
      const Tensor x = random_tensor({t, c}, rng);
      const Tensor kernel = random_tensor({3, c}, rng);
      CHECK(bit_equal(run_dwconv(x, kernel, d),
                      kws::testing::naive_dwconv(x, kernel, d)));
    }
  }
}

TEST_CASE("depthwise conv preserves time length for every dilation") {
  std::mt19937_64 rng(7);
  for (int d : {1, 2, 4}) {
    const Tensor x = random_tensor({2, 98, 6}, rng);
    Tape tape;
    nn::DepthwiseConv layer{Parameter("k", random_tensor({3, 6}, rng)), d};
    const Tensor& y = tape.value(nn::depthwise_conv(tape, tape.constant(x), layer));
    CHECK(y.shape() == x.shape());
  }
}

TEST_CASE("depthwise conv rejects bad dilation and channel mismatch") {
  std::mt19937_64 rng(9);
  Tape tape;
  const auto x = tape.constant(random_tensor({5, 4}, rng));
  nn::DepthwiseConv bad_ch{Parameter("k", Tensor({3, 6})), 1};
  CHECK_THROWS_AS(nn::depthwise_conv(tape, x, bad_ch), ShapeError);
  nn::DepthwiseConv bad_d{Parameter("k", Tensor({3, 4})), 0};
  CHECK_THROWS_AS(nn::depthwise_conv(tape, x, bad_d), RangeError);
}

TEST_CASE("pointwise conv: identity, hand product, and matmul oracle") {
  Tape tape;
  std::mt19937_64 rng(11);

  Tensor eye({4, 4});
  for (int i = 0; i < 4; ++i) eye.at(i, i) = 1.0;
  nn::PointwiseConv id{Parameter("w", eye)};
  const Tensor x = random_tensor({6, 4}, rng);
  CHECK(bit_equal(tape.value(nn::pointwise_conv(tape, tape.constant(x), id)), x));

  nn::PointwiseConv sum2{Parameter("w", Tensor({2, 1}, {1, 1}))};
  const Tensor one_row({1, 2}, {1, 2});
  CHECK(tape.value(nn::pointwise_conv(tape, tape.constant(one_row), sum2))[0] ==
        3.0);

  nn::PointwiseConv mix{Parameter("w", random_tensor({5, 3}, rng))};
  const Tensor x2 = random_tensor({7, 5}, rng);
  CHECK(bit_equal(
      tape.value(nn::pointwise_conv(tape, tape.constant(x2), mix)),
      kws::testing::naive_matmul(x2, mix.weight.value)));
}

TEST_CASE("separable pair equals the dense 3-tap conv built by outer product") {
  // integer-valued weights/inputs so both groupings are exact in doubles
  std::mt19937_64 rng(13);
  for (int iter = 0; iter < 20; ++iter) {
    const int t = 8, ci = 4, co = 4;
    const Tensor x = random_int_tensor({t, ci}, rng);
    const Tensor dw = random_int_tensor({3, ci}, rng);
    const Tensor pw = random_int_tensor({ci, co}, rng);

    Tape tape;
    nn::DepthwiseConv dconv{Parameter("dw", dw), 1};
    nn::PointwiseConv pconv{Parameter("pw", pw)};
    const Tensor got = tape.value(nn::pointwise_conv(
        tape, nn::depthwise_conv(tape, tape.constant(x), dconv), pconv));

    // dense kernel K[j][i][o] = dw[j,i] * pw[i,o], brute-force conv
    Tensor want({t, co});
    for (int i = 0; i < t; ++i)
      for (int o = 0; o < co; ++o) {
        double acc = 0.0;
        for (int j = 0; j < 3; ++j) {
          const int src = i + j - 1;
          if (src < 0 || src >= t) continue;
          for (int ch = 0; ch < ci; ++ch)
            acc += dw.at(j, ch) * pw.at(ch, o) * x.at(src, ch);
        }
        want.at(i, o) = acc;
      }
    CHECK(bit_equal(got, want));
  }
}

TEST_CASE("batch norm train mode standardizes and scales per channel") {
  std::mt19937_64 rng(17);
  const int rows = 64, c = 5;
  const Tensor x = random_tensor({rows, c}, rng, -3.0, 7.0);

  nn::BatchNorm bn("bn", c);
  Tape tape;
  const Tensor y =
      tape.value(nn::batch_norm(tape, tape.constant(x), bn, nn::Mode::kTrain));
  for (int j = 0; j < c; ++j) {
    double mean = 0.0, var = 0.0;
    for (int r = 0; r < rows; ++r) mean += y.at(r, j);
    mean /= rows;
    for (int r = 0; r < rows; ++r) var += (y.at(r, j) - mean) * (y.at(r, j) - mean);
    var /= rows;
    CHECK(std::abs(mean) < 1e-12);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));  // eps shrinks it slightly
  }

  // affine contract: gamma 2, beta 3
  nn::BatchNorm bn2("bn2", c);
  bn2.gamma.value.fill(2.0);
  bn2.beta.value.fill(3.0);
  const Tensor y2 =
      tape.value(nn::batch_norm(tape, tape.constant(x), bn2, nn::Mode::kTrain));
  for (int j = 0; j < c; ++j) {
    double mean = 0.0, var = 0.0;
    for (int r = 0; r < rows; ++r) mean += y2.at(r, j);
    mean /= rows;
    for (int r = 0; r < rows; ++r)
      var += (y2.at(r, j) - mean) * (y2.at(r, j) - mean);
    var /= rows;
    CHECK(mean == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(std::sqrt(var) == doctest::Approx(2.0).epsilon(1e-3));
  }
}

TEST_CASE("batch norm infer with copied batch stats matches train output") {
  std::mt19937_64 rng(19);
  const int rows = 40, c = 3;
  const Tensor x = random_tensor({rows, c}, rng, -2.0, 5.0);

  Tensor mean({c}), var({c});
  for (int j = 0; j < c; ++j) {
    for (int r = 0; r < rows; ++r) mean[j] += x.at(r, j);
    mean[j] /= rows;
    for (int r = 0; r < rows; ++r)
      var[j] += (x.at(r, j) - mean[j]) * (x.at(r, j) - mean[j]);
    var[j] /= rows;
  }

  nn::BatchNorm train_bn("t", c), infer_bn("i", c);
  infer_bn.running_mean = mean;
  infer_bn.running_var = var;

  Tape tape;
  const Tensor yt = tape.value(
      nn::batch_norm(tape, tape.constant(x), train_bn, nn::Mode::kTrain));
  const Tensor yi = tape.value(
      nn::batch_norm(tape, tape.constant(x), infer_bn, nn::Mode::kInfer));
  CHECK(kws::testing::max_abs_diff(yt, yi) < 1e-6);
}

TEST_CASE("batch norm running stats update with momentum 0.9") {
  std::mt19937_64 rng(23);
  const Tensor x = random_tensor({50, 2}, rng, 1.0, 3.0);
  nn::BatchNorm bn("bn", 2);
  Tape tape;
  nn::batch_norm(tape, tape.constant(x), bn, nn::Mode::kTrain);

  double mean0 = 0.0;
  for (int r = 0; r < 50; ++r) mean0 += x.at(r, 0);
  mean0 /= 50.0;
  CHECK(bn.running_mean[0] == doctest::Approx(0.9 * 0.0 + 0.1 * mean0));
  CHECK(bn.running_var[0] < 1.0);  // moved from 1 toward the small batch var
}

TEST_CASE("batch norm train mode refuses a single row") {
  nn::BatchNorm bn("bn", 4);
  Tape tape;
  const auto x = tape.constant(Tensor({1, 4}));
  CHECK_THROWS_AS(nn::batch_norm(tape, x, bn, nn::Mode::kTrain), ShapeError);
  CHECK_NOTHROW(nn::batch_norm(tape, x, bn, nn::Mode::kInfer));
}

TEST_CASE("avg_pool_time: arithmetic means and the summation oracle") {
  const Tensor small({2, 2}, {1, 3, 3, 5});
  const Tensor pooled = nn::avg_pool_time(small);
  CHECK(pooled[0] == 2.0);
  CHECK(pooled[1] == 4.0);

  const Tensor single({1, 3}, {7, 8, 9});
  const Tensor one = nn::avg_pool_time(single);
  for (int j = 0; j < 3; ++j) CHECK(one[j] == single[j]);

  std::mt19937_64 rng(29);
  const Tensor x = random_tensor({98, 45}, rng);
  const Tensor got = nn::avg_pool_time(x);
  for (int j = 0; j < 45; ++j) {
    double acc = 0.0;
    for (int i = 0; i < 98; ++i) acc += x.at(i, j);
    CHECK(got[j] == doctest::Approx(acc / 98.0).epsilon(1e-13));
  }
}

TEST_CASE("avg_pool_time is exactly permutation-invariant") {
  std::mt19937_64 rng(31);
  for (int iter = 0; iter < 10; ++iter) {
    const Tensor x = random_tensor({31, 6}, rng);
    std::vector<int> perm(31);
    for (int i = 0; i < 31; ++i) perm[size_t(i)] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    Tensor shuffled({31, 6});
    for (int i = 0; i < 31; ++i)
      for (int j = 0; j < 6; ++j)
        shuffled.at(i, j) = x.at(perm[size_t(i)], j);
    CHECK(bit_equal(nn::avg_pool_time(x), nn::avg_pool_time(shuffled)));
  }
}

TEST_CASE("relu is idempotent") {
  std::mt19937_64 rng(37);
  Tape tape;
  const auto x = tape.constant(random_tensor({5, 7}, rng));
  const auto once = tape.relu(x);
  const auto twice = tape.relu(once);
  CHECK(bit_equal(tape.value(once), tape.value(twice)));
}

TEST_CASE("softmax cross entropy: uniform logits, saturation, oracle") {
  Tape tape;

  Tensor uniform({1, 12});
  const auto loss_u = nn::softmax_cross_entropy(
      tape, tape.constant(uniform), std::vector<int>{3});
  CHECK(tape.value(loss_u)[0] == doctest::Approx(std::log(12.0)).epsilon(1e-12));

  Tensor saturated({1, 12});
  saturated.at(0, 5) = 1000.0;
  const auto loss_s = nn::softmax_cross_entropy(
      tape, tape.constant(saturated), std::vector<int>{5});
  CHECK(tape.value(loss_s)[0] < 1e-9);

  // direct high-precision formula on random logits
  std::mt19937_64 rng(41);
  const Tensor logits = random_tensor({4, 12}, rng, -3.0, 3.0);
  const std::vector<int> labels{0, 5, 11, 7};
  const auto loss = nn::softmax_cross_entropy(tape, tape.constant(logits), labels);
  double want = 0.0;
  for (int i = 0; i < 4; ++i) {
    double denom = 0.0;
    for (int j = 0; j < 12; ++j) denom += std::exp(logits.at(i, j));
    want += -std::log(std::exp(logits.at(i, labels[size_t(i)])) / denom);
  }
  want /= 4.0;
  CHECK(tape.value(loss)[0] == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("softmax cross entropy rejects out-of-range labels") {
  Tape tape;
  const auto logits = tape.constant(Tensor({2, 12}));
  CHECK_THROWS_AS(
      nn::softmax_cross_entropy(tape, logits, std::vector<int>{0, 12}),
      ValueError);
}

TEST_CASE("residual block: zero weights reduce to ReLU(x), shapes preserved") {
  std::mt19937_64 rng(43);

  nn::ResidualBlock block;
  auto make_zero_unit = [](const std::string& p) {
    nn::SeparableUnit u{{Parameter(p + "/dw", Tensor({3, 4})), 1},
                        nn::BatchNorm(p + "/bn1", 4),
                        {Parameter(p + "/pw", Tensor({4, 4}))},
                        nn::BatchNorm(p + "/bn2", 4)};
    return u;
  };
  block.unit1 = make_zero_unit("u1");
  block.unit2 = make_zero_unit("u2");

  const Tensor x = random_tensor({2, 9, 4}, rng);
  Tape tape;
  const Tensor y = tape.value(
      nn::residual_block(tape, tape.constant(x), block, nn::Mode::kInfer));
  REQUIRE(y.shape() == x.shape());
  for (std::int64_t i = 0; i < x.size(); ++i)
    CHECK(y[i] == (x[i] > 0.0 ? x[i] : 0.0));
}

TEST_CASE("residual block equals the composed per-layer evaluation") {
  std::mt19937_64 rng(47);
  const int c = 4, t = 7, b = 2;
  nn::ResidualBlock block;
  auto make_unit = [&](const std::string& p) {
    nn::SeparableUnit u{{Parameter(p + "/dw", random_tensor({3, c}, rng)), 1},
                        nn::BatchNorm(p + "/bn1", c),
                        {Parameter(p + "/pw", random_tensor({c, c}, rng))},
                        nn::BatchNorm(p + "/bn2", c)};
    return u;
  };
  block.unit1 = make_unit("u1");
  block.unit2 = make_unit("u2");

  const Tensor x = random_tensor({b, t, c}, rng);
  Tape tape;
  const Tensor got = tape.value(
      nn::residual_block(tape, tape.constant(x), block, nn::Mode::kInfer));

  // chain the ops by hand
  Tape manual;
  auto unit = [&](Tape::NodeId in, nn::SeparableUnit& u, bool last_relu) {
    auto h = nn::depthwise_conv(manual, in, u.dw);
    h = nn::batch_norm(manual, h, u.bn1, nn::Mode::kInfer);
    h = manual.relu(h);
    h = nn::pointwise_conv(manual, h, u.pw);
    h = nn::batch_norm(manual, h, u.bn2, nn::Mode::kInfer);
    return last_relu ? manual.relu(h) : h;
  };
  auto in = manual.constant(x);
  auto h = unit(in, block.unit1, true);
  h = unit(h, block.unit2, false);
  const Tensor want = manual.value(manual.relu(manual.add(h, in)));
  CHECK(bit_equal(got, want));
}

TEST_CASE("every layer passes a finite-difference gradient check") {
  std::mt19937_64 rng(53);
  const int b = 2, t = 6, c = 4;
  const Tensor x = random_tensor({b, t, c}, rng);
  const std::vector<int> labels{1, 3};

  nn::SeparableUnit unit{{Parameter("dw", random_tensor({3, c}, rng)), 2},
                         nn::BatchNorm("bn1", c),
                         {Parameter("pw", random_tensor({c, c}, rng))},
                         nn::BatchNorm("bn2", c)};
  Parameter fc("fc", random_tensor({c, 4}, rng));

  auto build = [&](Tape& tape) {
    auto h = nn::separable_unit(tape, tape.constant(x), unit, nn::Mode::kTrain);
    h = nn::avg_pool_time(tape, h);
    h = tape.linear(h, tape.leaf(fc));
    return nn::softmax_cross_entropy(tape, h, labels);
  };

  std::vector<Parameter*> params{&unit.dw.kernel, &unit.bn1.gamma,
                                 &unit.bn1.beta, &unit.pw.weight,
                                 &unit.bn2.gamma, &unit.bn2.beta, &fc};
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    tape.backward(build(tape));
  }
  auto loss_fn = [&]() {
    Tape tape;
    return tape.value(build(tape))[0];
  };
  const auto r = kws::testing::finite_difference_check(params, loss_fn);
  INFO("worst: ", r.worst, " rel ", r.max_rel_err);
  CHECK(r.max_rel_err < 1e-4);
}

TEST_SUITE_END();
