#pragma once

#include <complex>
#include <vector>

namespace kws::dsp {

// In-place iterative radix-2 transform. Size must be a power of two.
// inverse = true applies the conjugate transform and the 1/N scale.
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse);

// Complex DFT of arbitrary length. Powers of two go straight to fft_pow2;
// everything else uses Bluestein's chirp-z reformulation, so a 16000-sample
// clip gets its exact-length spectrum rather than a zero-padded approximation.
std::vector<std::complex<double>> dft(std::vector<std::complex<double>> x,
                                      bool inverse);

}  // namespace kws::dsp
