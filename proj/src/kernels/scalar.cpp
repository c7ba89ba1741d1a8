#include "kws/kernels/backend.hpp"

// Reference kernels. Plain loops, reduction index innermost and ascending so
// that the SIMD variants can reproduce them bit for bit.

namespace kws::kernels {
namespace {

void matmul_nn(const double* a, const double* b, double* c, int m, int k,
               int n, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<std::int64_t>(i) * n;
    if (!accumulate) {
      for (int j = 0; j < n; ++j) ci[j] = 0.0;
    }
    const double* ai = a + static_cast<std::int64_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double ap = ai[p];
      const double* bp = b + static_cast<std::int64_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += ap * bp[j];
    }
  }
}

void matmul_tn(const double* a, const double* b, double* c, int m, int k,
               int n, bool accumulate) {
  if (!accumulate) {
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(m) * n; ++i)
      c[i] = 0.0;
  }
  for (int r = 0; r < k; ++r) {
    const double* ar = a + static_cast<std::int64_t>(r) * m;
    const double* br = b + static_cast<std::int64_t>(r) * n;
    for (int i = 0; i < m; ++i) {
      const double ai = ar[i];
      double* ci = c + static_cast<std::int64_t>(i) * n;
      for (int j = 0; j < n; ++j) ci[j] += ai * br[j];
    }
  }
}

void dwconv_fwd(const double* x, const double* k3, double* y, int t, int c,
                int d) {
  for (int i = 0; i < t; ++i) {
    double* yi = y + static_cast<std::int64_t>(i) * c;
    for (int ch = 0; ch < c; ++ch) yi[ch] = 0.0;
    for (int j = 0; j < 3; ++j) {
      const int src = i + (j - 1) * d;
      if (src < 0 || src >= t) continue;
      const double* xs = x + static_cast<std::int64_t>(src) * c;
      const double* kj = k3 + static_cast<std::int64_t>(j) * c;
      for (int ch = 0; ch < c; ++ch) yi[ch] += kj[ch] * xs[ch];
    }
  }
}

void dwconv_dx(const double* gy, const double* k3, double* dx, int t, int c,
               int d, bool accumulate) {
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
      for (int ch = 0; ch < c; ++ch) di[ch] += kj[ch] * gs[ch];
    }
  }
}

void dwconv_dk(const double* gy, const double* x, double* dk, int t, int c,
               int d, bool accumulate) {
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
      for (int ch = 0; ch < c; ++ch) dkj[ch] += gi[ch] * xs[ch];
    }
  }
}

void relu_fwd(const double* x, double* y, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd(const double* x, const double* gy, double* dx, std::int64_t n,
              bool accumulate) {
  if (accumulate) {
    for (std::int64_t i = 0; i < n; ++i) dx[i] += x[i] > 0.0 ? gy[i] : 0.0;
  } else {
    for (std::int64_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? gy[i] : 0.0;
  }
}

void add(const double* a, const double* b, double* y, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

void axpy(double alpha, const double* x, double* y, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void mul(const double* a, const double* b, double* y, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

void colsum(const double* x, double* s, int rows, int cols) {
  for (int c = 0; c < cols; ++c) s[c] = 0.0;
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<std::int64_t>(r) * cols;
    for (int c = 0; c < cols; ++c) s[c] += xr[c];
  }
}

void coldot(const double* x, const double* y, double* s, int rows, int cols) {
  for (int c = 0; c < cols; ++c) s[c] = 0.0;
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<std::int64_t>(r) * cols;
    const double* yr = y + static_cast<std::int64_t>(r) * cols;
    for (int c = 0; c < cols; ++c) s[c] += xr[c] * yr[c];
  }
}

void col_affine(const double* x, const double* a, const double* b, double* y,
                int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<std::int64_t>(r) * cols;
    double* yr = y + static_cast<std::int64_t>(r) * cols;
    for (int c = 0; c < cols; ++c) yr[c] = xr[c] * a[c] + b[c];
  }
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend backend = {
      "scalar",   matmul_nn, matmul_tn, dwconv_fwd, dwconv_dx, dwconv_dk,
      relu_fwd,   relu_bwd,  add,       axpy,       mul,       colsum,
      coldot,     col_affine,
  };
  return backend;
}

}  // namespace kws::kernels
