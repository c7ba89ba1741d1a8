#include <doctest.h>

#include <functional>
#include <random>

#include "kws/kernels/backend.hpp"
#include "support/oracles.hpp"

using namespace kws;
using kws::testing::bit_equal;
using kws::testing::random_tensor;

namespace {

// Every backend must reproduce the scalar reference bit for bit: same
// multiply/add sequence per output element, no contraction, vectorization
// only across independent outputs.
void for_each_simd_backend(
    const std::function<void(const kernels::Backend&)>& body) {
  for (const kernels::Backend* b : kernels::available_backends()) {
    if (b == &kernels::scalar_backend()) continue;
    INFO("backend: ", b->name);
    body(*b);
  }
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("simd backend is exercised when the host supports it") {
#if defined(__x86_64__)
  if (__builtin_cpu_supports("avx2")) {
    REQUIRE(kernels::avx2_backend() != nullptr);
    CHECK(std::string(kernels::active().name) == "avx2");
  }
#endif
  CHECK(!kernels::available_backends().empty());
}

TEST_CASE("matmul variants match scalar bitwise on ragged sizes") {
  std::mt19937_64 rng(7);
  const auto& ref = kernels::scalar_backend();
  for_each_simd_backend([&](const kernels::Backend& b) {
    for (int iter = 0; iter < 60; ++iter) {
      const int m = 1 + int(rng() % 12);
      const int k = 1 + int(rng() % 12);
      const int n = 1 + int(rng() % 17);  // deliberately not multiples of 4
      Tensor a = random_tensor({m, k}, rng);
      Tensor bt = random_tensor({k, n}, rng);
      Tensor c0({m, n}), c1({m, n});

      ref.matmul_nn(a.data(), bt.data(), c0.data(), m, k, n, false);
      b.matmul_nn(a.data(), bt.data(), c1.data(), m, k, n, false);
      CHECK(bit_equal(c0, c1));

      // accumulate path
      ref.matmul_nn(a.data(), bt.data(), c0.data(), m, k, n, true);
      b.matmul_nn(a.data(), bt.data(), c1.data(), m, k, n, true);
      CHECK(bit_equal(c0, c1));

      Tensor at = random_tensor({k, m}, rng);
      Tensor d0({m, n}), d1({m, n});
      ref.matmul_tn(at.data(), bt.data(), d0.data(), m, k, n, false);
      b.matmul_tn(at.data(), bt.data(), d1.data(), m, k, n, false);
      CHECK(bit_equal(d0, d1));
    }
  });
}

TEST_CASE("depthwise conv kernels match scalar bitwise for d in {1,2,4}") {
  std::mt19937_64 rng(11);
  const auto& ref = kernels::scalar_backend();
  for_each_simd_backend([&](const kernels::Backend& b) {
    for (int d : {1, 2, 4}) {
      for (int iter = 0; iter < 30; ++iter) {
        const int t = 2 * d + 1 + int(rng() % 20);
        const int c = 1 + int(rng() % 13);
        Tensor x = random_tensor({t, c}, rng);
        Tensor k3 = random_tensor({3, c}, rng);
        Tensor g = random_tensor({t, c}, rng);

        Tensor y0({t, c}), y1({t, c});
        ref.dwconv_fwd(x.data(), k3.data(), y0.data(), t, c, d);
        b.dwconv_fwd(x.data(), k3.data(), y1.data(), t, c, d);
        CHECK(bit_equal(y0, y1));

        Tensor dx0({t, c}), dx1({t, c});
        ref.dwconv_dx(g.data(), k3.data(), dx0.data(), t, c, d, false);
        b.dwconv_dx(g.data(), k3.data(), dx1.data(), t, c, d, false);
        CHECK(bit_equal(dx0, dx1));

        Tensor dk0({3, c}), dk1({3, c});
        ref.dwconv_dk(g.data(), x.data(), dk0.data(), t, c, d, false);
        b.dwconv_dk(g.data(), x.data(), dk1.data(), t, c, d, false);
        CHECK(bit_equal(dk0, dk1));
      }
    }
  });
}

TEST_CASE("elementwise and column kernels match scalar bitwise") {
  std::mt19937_64 rng(13);
  const auto& ref = kernels::scalar_backend();
  for_each_simd_backend([&](const kernels::Backend& b) {
    for (int iter = 0; iter < 40; ++iter) {
      const int rows = 1 + int(rng() % 9);
      const int cols = 1 + int(rng() % 23);
      const std::int64_t n = std::int64_t(rows) * cols;
      Tensor x = random_tensor({rows, cols}, rng);
      Tensor y = random_tensor({rows, cols}, rng);
      Tensor a = random_tensor({cols}, rng);
      Tensor c = random_tensor({cols}, rng);

      Tensor r0({rows, cols}), r1({rows, cols});
      ref.relu_fwd(x.data(), r0.data(), n);
      b.relu_fwd(x.data(), r1.data(), n);
      CHECK(bit_equal(r0, r1));

      ref.relu_bwd(x.data(), y.data(), r0.data(), n, false);
      b.relu_bwd(x.data(), y.data(), r1.data(), n, false);
      CHECK(bit_equal(r0, r1));

      ref.add(x.data(), y.data(), r0.data(), n);
      b.add(x.data(), y.data(), r1.data(), n);
      CHECK(bit_equal(r0, r1));

      ref.mul(x.data(), y.data(), r0.data(), n);
      b.mul(x.data(), y.data(), r1.data(), n);
      CHECK(bit_equal(r0, r1));

      Tensor ax0 = y, ax1 = y;
      ref.axpy(0.37, x.data(), ax0.data(), n);
      b.axpy(0.37, x.data(), ax1.data(), n);
      CHECK(bit_equal(ax0, ax1));

      Tensor s0({cols}), s1({cols});
      ref.colsum(x.data(), s0.data(), rows, cols);
      b.colsum(x.data(), s1.data(), rows, cols);
      CHECK(bit_equal(s0, s1));

      ref.coldot(x.data(), y.data(), s0.data(), rows, cols);
      b.coldot(x.data(), y.data(), s1.data(), rows, cols);
      CHECK(bit_equal(s0, s1));

      ref.col_affine(x.data(), a.data(), c.data(), r0.data(), rows, cols);
      b.col_affine(x.data(), a.data(), c.data(), r1.data(), rows, cols);
      CHECK(bit_equal(r0, r1));
    }
  });
}

TEST_CASE("matmul_nn agrees with the nested-loop oracle") {
  std::mt19937_64 rng(17);
  for (const kernels::Backend* b : kernels::available_backends()) {
    INFO("backend: ", b->name);
    for (int iter = 0; iter < 25; ++iter) {
      const int m = 1 + int(rng() % 8), k = 1 + int(rng() % 8),
                n = 1 + int(rng() % 8);
      Tensor a = random_tensor({m, k}, rng);
      Tensor bm = random_tensor({k, n}, rng);
      Tensor c({m, n});
      b->matmul_nn(a.data(), bm.data(), c.data(), m, k, n, false);
      CHECK(bit_equal(c, kws::testing::naive_matmul(a, bm)));
    }
  }
}

TEST_SUITE_END();
