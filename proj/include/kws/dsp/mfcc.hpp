#pragma once

#include "kws/autodiff/tensor.hpp"
#include "kws/dsp/audio.hpp"

namespace kws::dsp {

// T x F matrix of MFCC features. For a 1 s clip at 16 kHz: 98 x 40.
struct FeatureMap {
  Tensor values;  // [T, F]

  int frames() const { return values.dim(0); }
  int coeffs() const { return values.dim(1); }
};

struct MfccConfig {
  int window_samples = 480;  // 30 ms at 16 kHz
  int shift_samples = 160;   // 10 ms
  int fft_size = 512;
  int mel_bins = 40;
  int num_coeffs = 40;
  double low_hz = 20.0;
  double high_hz = 7800.0;  // same edges as the band-pass front end
  double log_floor = 1e-12;
};

// Framing -> Hamming window -> power FFT -> mel filterbank -> floored log ->
// orthonormal DCT-II. Expects the clip already band-limited and padded to a
// whole second.
FeatureMap mfcc(const AudioClip& clip, const MfccConfig& config = {});

// HTK-style mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

}  // namespace kws::dsp
