#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kws::kernels {

// Inner-loop kernels behind every layer. Each function exists in a scalar
// reference version and (on x86) an AVX2 version. The two are bit-identical:
// every output element is produced by the same multiply/add sequence in the
// same order, and FP contraction is off project-wide. Vectorization is always
// across independent output elements (columns/channels), never across a
// reduction axis.
//
// Matrix arguments are dense row-major doubles.
struct Backend {
  const char* name;

  // c[m x n] = a[m x k] * b[k x n]           (accumulate: c +=)
  void (*matmul_nn)(const double* a, const double* b, double* c, int m, int k,
                    int n, bool accumulate);
  // c[m x n] = a[k x m]^T * b[k x n]         (accumulate: c +=)
  void (*matmul_tn)(const double* a, const double* b, double* c, int m, int k,
                    int n, bool accumulate);

  // Depthwise 3-tap temporal convolution over x[t x c], one filter per
  // channel, kernel k3[3 x c], zero padding of `dilation` frames per side:
  //   y[t,ch] = sum_j k3[j,ch] * x[t + (j-1)*dilation, ch]
  void (*dwconv_fwd)(const double* x, const double* k3, double* y, int t,
                     int c, int dilation);
  // dx[t,ch] (+)= sum_j k3[j,ch] * gy[t - (j-1)*dilation, ch]
  void (*dwconv_dx)(const double* gy, const double* k3, double* dx, int t,
                    int c, int dilation, bool accumulate);
  // dk[j,ch] (+)= sum_t gy[t,ch] * x[t + (j-1)*dilation, ch]
  void (*dwconv_dk)(const double* gy, const double* x, double* dk, int t,
                    int c, int dilation, bool accumulate);

  void (*relu_fwd)(const double* x, double* y, std::int64_t n);
  // dx (+)= gy where x > 0
  void (*relu_bwd)(const double* x, const double* gy, double* dx,
                   std::int64_t n, bool accumulate);

  void (*add)(const double* a, const double* b, double* y, std::int64_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::int64_t n);
  void (*mul)(const double* a, const double* b, double* y, std::int64_t n);

  // s[c] = sum_r x[r,c]
  void (*colsum)(const double* x, double* s, int rows, int cols);
  // s[c] = sum_r x[r,c] * y[r,c]
  void (*coldot)(const double* x, const double* y, double* s, int rows,
                 int cols);
  // y[r,c] = x[r,c] * a[c] + b[c]   (per-column affine, used by batch norm)
  void (*col_affine)(const double* x, const double* a, const double* b,
                     double* y, int rows, int cols);
};

const Backend& scalar_backend();

// nullptr when the binary was built without AVX2 support or the CPU lacks it.
const Backend* avx2_backend();

// Active backend: AVX2 when available, scalar otherwise. The environment
// variable KWS_KERNELS=scalar|avx2 forces a choice at startup.
const Backend& active();

// Explicit override (tests, benchmarking). Throws ConfigError for a name that
// is unknown or unavailable on this machine.
void set_active(const std::string& name);

std::vector<const Backend*> available_backends();

}  // namespace kws::kernels
