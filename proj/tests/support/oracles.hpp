#pragma once

// Brute-force reference implementations used only by tests. These stay
// deliberately naive (nested loops, no kernels, no shared code with the
// library) so they can serve as independent oracles.

#include <cmath>
#include <random>
#include <vector>

#include "kws/autodiff/tensor.hpp"

namespace kws::testing {

inline Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c({m, n});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += a.at(i, p) * b.at(p, j);
      c.at(i, j) = acc;
    }
  return c;
}

// y[t,c] = sum_j kernel[j,c] * x[t + (j-1)*d, c], zero padded.
inline Tensor naive_dwconv(const Tensor& x, const Tensor& kernel, int d) {
  const int t = x.dim(0), c = x.dim(1);
  Tensor y({t, c});
  for (int i = 0; i < t; ++i)
    for (int ch = 0; ch < c; ++ch) {
      double acc = 0.0;
      for (int j = 0; j < 3; ++j) {
        const int src = i + (j - 1) * d;
        if (src >= 0 && src < t) acc += kernel.at(j, ch) * x.at(src, ch);
      }
      y.at(i, ch) = acc;
    }
  return y;
}

// Double-loop softmax-weighted sum: out[i,:] = sum_r w[i,r] v[r,:] with
// w = rowwise softmax of q k^T / sqrt(dk).
inline Tensor naive_attention(const Tensor& q, const Tensor& k,
                              const Tensor& v) {
  const int tq = q.dim(0), t = k.dim(0), dk = q.dim(1), dv = v.dim(1);
  Tensor out({tq, dv});
  for (int i = 0; i < tq; ++i) {
    std::vector<double> s(static_cast<size_t>(t));
    for (int r = 0; r < t; ++r) {
      double acc = 0.0;
      for (int j = 0; j < dk; ++j) acc += q.at(i, j) * k.at(r, j);
      s[size_t(r)] = acc / std::sqrt(double(dk));
    }
    double mx = s[0];
    for (double z : s) mx = std::max(mx, z);
    double denom = 0.0;
    for (double& z : s) {
      z = std::exp(z - mx);
      denom += z;
    }
    for (int j = 0; j < dv; ++j) {
      double acc = 0.0;
      for (int r = 0; r < t; ++r) acc += (s[size_t(r)] / denom) * v.at(r, j);
      out.at(i, j) = acc;
    }
  }
  return out;
}

inline Tensor random_tensor(std::vector<int> shape, std::mt19937_64& rng,
                            double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

// Integer-valued entries: sums and products of a few of them are exact in
// doubles, which makes regrouping-sensitive comparisons exact too.
inline Tensor random_int_tensor(std::vector<int> shape, std::mt19937_64& rng,
                                int lo = -3, int hi = 3) {
  Tensor t(std::move(shape));
  std::uniform_int_distribution<int> dist(lo, hi);
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = double(dist(rng));
  return t;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline bool bit_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  for (std::int64_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

}  // namespace kws::testing
