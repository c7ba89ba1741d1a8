#pragma once

// Textbook MFCC reference, written against the documented recipe (30 ms
// Hamming frames at 10 ms hop, 512-point power spectrum, 40 triangular mel
// filters spanning 20 Hz - 7.8 kHz, log floored at 1e-12, orthonormal
// DCT-II). Uses a direct O(N^2) DFT and shares no code with the library.

#include <cmath>
#include <vector>

#include "kws/autodiff/tensor.hpp"

namespace kws::testing {

inline Tensor reference_mfcc(const std::vector<double>& samples,
                             int sample_rate) {
  constexpr double pi = 3.14159265358979323846;
  const int win = 480, hop = 160, nfft = 512, nmel = 40, ncep = 40;
  const double f_lo = 20.0, f_hi = 7800.0, floor_val = 1e-12;
  const int frames = (int(samples.size()) - win) / hop + 1;
  const int bins = nfft / 2 + 1;

  auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };

  std::vector<double> centers(nmel + 2);
  for (int i = 0; i < nmel + 2; ++i)
    centers[size_t(i)] =
        hz(mel(f_lo) + (mel(f_hi) - mel(f_lo)) * i / double(nmel + 1));

  Tensor out({frames, ncep});
  for (int fr = 0; fr < frames; ++fr) {
    std::vector<double> x(nfft, 0.0);
    for (int i = 0; i < win; ++i)
      x[size_t(i)] = samples[size_t(fr * hop + i)] *
                     (0.54 - 0.46 * std::cos(2.0 * pi * i / double(win - 1)));

    std::vector<double> power(static_cast<size_t>(bins), 0.0);
    for (int k = 0; k < bins; ++k) {
      double re = 0.0, im = 0.0;
      for (int n = 0; n < nfft; ++n) {
        const double ang = 2.0 * pi * double(k) * double(n) / double(nfft);
        re += x[size_t(n)] * std::cos(ang);
        im -= x[size_t(n)] * std::sin(ang);
      }
      power[size_t(k)] = re * re + im * im;
    }

    std::vector<double> logmel(static_cast<size_t>(nmel), 0.0);
    for (int m = 0; m < nmel; ++m) {
      double acc = 0.0;
      for (int k = 0; k < bins; ++k) {
        const double f = double(k) * sample_rate / double(nfft);
        double w = 0.0;
        if (f > centers[size_t(m)] && f < centers[size_t(m) + 1])
          w = (f - centers[size_t(m)]) /
              (centers[size_t(m) + 1] - centers[size_t(m)]);
        else if (f >= centers[size_t(m) + 1] && f < centers[size_t(m) + 2])
          w = (centers[size_t(m) + 2] - f) /
              (centers[size_t(m) + 2] - centers[size_t(m) + 1]);
        acc += w * power[size_t(k)];
      }
      logmel[size_t(m)] = std::log(acc < floor_val ? floor_val : acc);
    }

    for (int k = 0; k < ncep; ++k) {
      double acc = 0.0;
      for (int m = 0; m < nmel; ++m)
        acc += logmel[size_t(m)] *
               std::cos(pi * k * (2.0 * m + 1.0) / (2.0 * nmel));
      out.at(fr, k) =
          acc * (k == 0 ? std::sqrt(1.0 / nmel) : std::sqrt(2.0 / nmel));
    }
  }
  return out;
}

}  // namespace kws::testing
