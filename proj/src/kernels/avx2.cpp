// AVX2 kernel variants. This translation unit is compiled with -mavx2 and is
// only entered after a runtime cpuid check (see backend.cpp).
//
// Bit-compatibility contract with the scalar reference: vector lanes map to
// independent output columns, reductions run in the same order, and there is
// no fma (mul and add round separately, matching -ffp-contract=off scalar
// code). Tails fall back to the scalar inner loop, which produces the same
// op sequence per element.

#include "kws/kernels/backend.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace kws::kernels {
namespace {

constexpr int kLanes = 4;  // doubles per ymm

void matmul_nn(const double* a, const double* b, double* c, int m, int k,
               int n, bool accumulate) {
  const int n4 = n - n % kLanes;
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<std::int64_t>(i) * k;
    double* ci = c + static_cast<std::int64_t>(i) * n;
    if (!accumulate) {
      for (int j = 0; j < n; ++j) ci[j] = 0.0;
    }
    for (int p = 0; p < k; ++p) {
      const __m256d ap = _mm256_set1_pd(ai[p]);
      const double* bp = b + static_cast<std::int64_t>(p) * n;
      int j = 0;
      for (; j < n4; j += kLanes) {
        __m256d acc = _mm256_loadu_pd(ci + j);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(ap, _mm256_loadu_pd(bp + j)));
        _mm256_storeu_pd(ci + j, acc);
      }
      for (; j < n; ++j) ci[j] += ai[p] * bp[j];
    }
  }
}

void matmul_tn(const double* a, const double* b, double* c, int m, int k,
               int n, bool accumulate) {
  if (!accumulate) {
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(m) * n; ++i)
      c[i] = 0.0;
  }
  const int n4 = n - n % kLanes;
  for (int r = 0; r < k; ++r) {
    const double* ar = a + static_cast<std::int64_t>(r) * m;
    const double* br = b + static_cast<std::int64_t>(r) * n;
    for (int i = 0; i < m; ++i) {
      const __m256d ai = _mm256_set1_pd(ar[i]);
      double* ci = c + static_cast<std::int64_t>(i) * n;
      int j = 0;
      for (; j < n4; j += kLanes) {
        __m256d acc = _mm256_loadu_pd(ci + j);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(ai, _mm256_loadu_pd(br + j)));
        _mm256_storeu_pd(ci + j, acc);
      }
      for (; j < n; ++j) ci[j] += ar[i] * br[j];
    }
  }
}

void dwconv_fwd(const double* x, const double* k3, double* y, int t, int c,
                int d) {
  const int c4 = c - c % kLanes;
  for (int i = 0; i < t; ++i) {
    double* yi = y + static_cast<std::int64_t>(i) * c;
    for (int ch = 0; ch < c; ++ch) yi[ch] = 0.0;
    for (int j = 0; j < 3; ++j) {
      const int src = i + (j - 1) * d;
      if (src < 0 || src >= t) continue;
      const double* xs = x + static_cast<std::int64_t>(src) * c;
      const double* kj = k3 + static_cast<std::int64_t>(j) * c;
      int ch = 0;
      for (; ch < c4; ch += kLanes) {
        __m256d acc = _mm256_loadu_pd(yi + ch);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(kj + ch),
                                               _mm256_loadu_pd(xs + ch)));
        _mm256_storeu_pd(yi + ch, acc);
      }
      for (; ch < c; ++ch) yi[ch] += kj[ch] * xs[ch];
    }
  }
}

void dwconv_dx(const double* gy, const double* k3, double* dx, int t, int c,
               int d, bool accumulate) {
  const int c4 = c - c % kLanes;
  for (int i = 0; i < t; ++i) {
    double* di = dx + static_cast<std::int64_t>(i) * c;
    if (!accumulate) {
      for (int ch = 0; ch < c; ++ch) di[ch] = 0.0;
    }
    for (int j = 0; j < 3; ++j) {
      const int src = i - (j - 1) * d;
      if (src < 0 || src >= t) continue;
      const double* gs = gy + static_cast<std::int64_t>(src) * c;
      const double* kj = k3 + static_cast<std::int64_t>(j) * c;
      int ch = 0;
      for (; ch < c4; ch += kLanes) {
        __m256d acc = _mm256_loadu_pd(di + ch);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(kj + ch),
                                               _mm256_loadu_pd(gs + ch)));
        _mm256_storeu_pd(di + ch, acc);
      }
      for (; ch < c; ++ch) di[ch] += kj[ch] * gs[ch];
    }
  }
}

void dwconv_dk(const double* gy, const double* x, double* dk, int t, int c,
               int d, bool accumulate) {
  const int c4 = c - c % kLanes;
  for (int j = 0; j < 3; ++j) {
    double* dkj = dk + static_cast<std::int64_t>(j) * c;
    if (!accumulate) {
      for (int ch = 0; ch < c; ++ch) dkj[ch] = 0.0;
    }
    for (int i = 0; i < t; ++i) {
      const int src = i + (j - 1) * d;
      if (src < 0 || src >= t) continue;
      const double* gi = gy + static_cast<std::int64_t>(i) * c;
      const double* xs = x + static_cast<std::int64_t>(src) * c;
      int ch = 0;
      for (; ch < c4; ch += kLanes) {
        __m256d acc = _mm256_loadu_pd(dkj + ch);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(gi + ch),
                                               _mm256_loadu_pd(xs + ch)));
        _mm256_storeu_pd(dkj + ch, acc);
      }
      for (; ch < c; ++ch) dkj[ch] += gi[ch] * xs[ch];
    }
  }
}

void relu_fwd(const double* x, double* y, std::int64_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::int64_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd(const double* x, const double* gy, double* dx, std::int64_t n,
              bool accumulate) {
  const __m256d zero = _mm256_setzero_pd();
  std::int64_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d mask =
        _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    const __m256d g = _mm256_and_pd(mask, _mm256_loadu_pd(gy + i));
    if (accumulate) {
      _mm256_storeu_pd(dx + i, _mm256_add_pd(_mm256_loadu_pd(dx + i), g));
    } else {
      _mm256_storeu_pd(dx + i, g);
    }
  }
  for (; i < n; ++i) {
    const double g = x[i] > 0.0 ? gy[i] : 0.0;
    dx[i] = accumulate ? dx[i] + g : g;
  }
}

void add(const double* a, const double* b, double* y, std::int64_t n) {
  std::int64_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    _mm256_storeu_pd(
        y + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) y[i] = a[i] + b[i];
}

void axpy(double alpha, const double* x, double* y, std::int64_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::int64_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d acc = _mm256_loadu_pd(y + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, acc);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void mul(const double* a, const double* b, double* y, std::int64_t n) {
  std::int64_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    _mm256_storeu_pd(
        y + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) y[i] = a[i] * b[i];
}

void colsum(const double* x, double* s, int rows, int cols) {
  const int c4 = cols - cols % kLanes;
  for (int c = 0; c < cols; ++c) s[c] = 0.0;
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<std::int64_t>(r) * cols;
    int c = 0;
    for (; c < c4; c += kLanes) {
      __m256d acc = _mm256_loadu_pd(s + c);
      acc = _mm256_add_pd(acc, _mm256_loadu_pd(xr + c));
      _mm256_storeu_pd(s + c, acc);
    }
    for (; c < cols; ++c) s[c] += xr[c];
  }
}

void coldot(const double* x, const double* y, double* s, int rows, int cols) {
  const int c4 = cols - cols % kLanes;
  for (int c = 0; c < cols; ++c) s[c] = 0.0;
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<std::int64_t>(r) * cols;
    const double* yr = y + static_cast<std::int64_t>(r) * cols;
    int c = 0;
    for (; c < c4; c += kLanes) {
      __m256d acc = _mm256_loadu_pd(s + c);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(xr + c),
                                             _mm256_loadu_pd(yr + c)));
      _mm256_storeu_pd(s + c, acc);
    }
    for (; c < cols; ++c) s[c] += xr[c] * yr[c];
  }
}

void col_affine(const double* x, const double* a, const double* b, double* y,
                int rows, int cols) {
  const int c4 = cols - cols % kLanes;
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<std::int64_t>(r) * cols;
    double* yr = y + static_cast<std::int64_t>(r) * cols;
    int c = 0;
    for (; c < c4; c += kLanes) {
      const __m256d v = _mm256_mul_pd(_mm256_loadu_pd(xr + c),
                                      _mm256_loadu_pd(a + c));
      _mm256_storeu_pd(yr + c, _mm256_add_pd(v, _mm256_loadu_pd(b + c)));
    }
    for (; c < cols; ++c) yr[c] = xr[c] * a[c] + b[c];
  }
}

}  // namespace

namespace detail {
const Backend* avx2_backend_impl() {
  static const Backend backend = {
      "avx2",     matmul_nn, matmul_tn, dwconv_fwd, dwconv_dx, dwconv_dk,
      relu_fwd,   relu_bwd,  add,       axpy,       mul,       colsum,
      coldot,     col_affine,
  };
  return &backend;
}
}  // namespace detail

}  // namespace kws::kernels

#else  // !defined(__AVX2__)

namespace kws::kernels::detail {
const Backend* avx2_backend_impl() { return nullptr; }
}  // namespace kws::kernels::detail

#endif
