#include "kws/dsp/fft.hpp"

#include <cmath>
#include <cstdint>

#include "kws/util/errors.hpp"

namespace kws::dsp {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(size_t n) { return n && (n & (n - 1)) == 0; }

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  if (!is_pow2(n)) throw RangeError("fft_pow2 requires a power-of-two size");
  if (n == 1) return;

  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * kPi / double(len);
    const size_t half = len >> 1;
    // Twiddles are recomputed per stage from cos/sin of the exact angle
    // rather than by repeated multiplication, which would drift.
    std::vector<std::complex<double>> w(half);
    for (size_t j = 0; j < half; ++j)
      w[j] = {std::cos(ang * double(j)), std::sin(ang * double(j))};
    for (size_t i = 0; i < n; i += len) {
      for (size_t j = 0; j < half; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + half] * w[j];
        a[i + j] = u + v;
        a[i + j + half] = u - v;
      }
    }
  }

  if (inverse) {
    const double scale = 1.0 / double(n);
    for (auto& x : a) x *= scale;
  }
}

std::vector<std::complex<double>> dft(std::vector<std::complex<double>> x,
                                      bool inverse) {
  const size_t n = x.size();
  if (n == 0) return x;
  if (is_pow2(n)) {
    fft_pow2(x, inverse);
    return x;
  }

  // Bluestein: X[k] = b*[k] * sum_n (x[n] b*[n]) b[k-n],  b[m] = e^{i pi m^2/N}
  // with the convolution evaluated circularly at a power-of-two size
  // M >= 2N-1. n^2 is reduced mod 2N first so the angle stays exact in
  // double precision for any clip length.
  const double sign = inverse ? 1.0 : -1.0;
  const size_t m = next_pow2(2 * n - 1);
  std::vector<std::complex<double>> chirp(n);
  for (size_t i = 0; i < n; ++i) {
    const std::uint64_t sq = (static_cast<std::uint64_t>(i) * i) % (2 * n);
    const double ang = sign * kPi * double(sq) / double(n);
    chirp[i] = {std::cos(ang), std::sin(ang)};
  }

  std::vector<std::complex<double>> a(m), b(m);
  for (size_t i = 0; i < n; ++i) a[i] = x[i] * chirp[i];
  b[0] = std::conj(chirp[0]);
  for (size_t i = 1; i < n; ++i) {
    b[i] = std::conj(chirp[i]);
    b[m - i] = b[i];
  }

  fft_pow2(a, false);
  fft_pow2(b, false);
  for (size_t i = 0; i < m; ++i) a[i] *= b[i];
  fft_pow2(a, true);

  std::vector<std::complex<double>> out(n);
  for (size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
  if (inverse) {
    const double scale = 1.0 / double(n);
    for (auto& v : out) v *= scale;
  }
  return out;
}

}  // namespace kws::dsp
