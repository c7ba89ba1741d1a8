#include "kws/dsp/mfcc.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "kws/dsp/fft.hpp"
#include "kws/util/errors.hpp"

namespace kws::dsp {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

namespace {

// Triangular filters with continuous-frequency edges, mel_bins rows over
// fft_size/2 + 1 spectrum bins.
std::vector<std::vector<double>> mel_filterbank(const MfccConfig& cfg,
                                                int sample_rate) {
  const int spec_bins = cfg.fft_size / 2 + 1;
  const double mel_lo = hz_to_mel(cfg.low_hz);
  const double mel_hi = hz_to_mel(cfg.high_hz);
  std::vector<double> edges_hz(static_cast<size_t>(cfg.mel_bins) + 2);
  for (int i = 0; i < cfg.mel_bins + 2; ++i)
    edges_hz[size_t(i)] = mel_to_hz(
        mel_lo + (mel_hi - mel_lo) * double(i) / double(cfg.mel_bins + 1));

  std::vector<std::vector<double>> filters(
      static_cast<size_t>(cfg.mel_bins),
      std::vector<double>(static_cast<size_t>(spec_bins), 0.0));
  const double bin_hz = double(sample_rate) / double(cfg.fft_size);
  for (int m = 0; m < cfg.mel_bins; ++m) {
    const double left = edges_hz[size_t(m)];
    const double center = edges_hz[size_t(m) + 1];
    const double right = edges_hz[size_t(m) + 2];
    for (int k = 0; k < spec_bins; ++k) {
      const double f = double(k) * bin_hz;
      double w = 0.0;
      if (f > left && f < center)
        w = (f - left) / (center - left);
      else if (f >= center && f < right)
        w = (right - f) / (right - center);
      filters[size_t(m)][size_t(k)] = w;
    }
  }
  return filters;
}

std::vector<double> hamming(int n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    w[size_t(i)] = 0.54 - 0.46 * std::cos(2.0 * kPi * double(i) / double(n - 1));
  return w;
}

}  // namespace

FeatureMap mfcc(const AudioClip& clip, const MfccConfig& cfg) {
  const int n = static_cast<int>(clip.samples.size());
  if (n < cfg.window_samples)
    throw ValueError("mfcc: clip shorter than one analysis window");

  const int frames = (n - cfg.window_samples) / cfg.shift_samples + 1;
  const int spec_bins = cfg.fft_size / 2 + 1;
  const auto window = hamming(cfg.window_samples);
  const auto filters = mel_filterbank(cfg, clip.sample_rate_hz);

  // Orthonormal DCT-II basis, num_coeffs x mel_bins.
  const double scale = std::sqrt(2.0 / double(cfg.mel_bins));
  const double scale0 = std::sqrt(1.0 / double(cfg.mel_bins));
  std::vector<double> dct(static_cast<size_t>(cfg.num_coeffs) *
                          static_cast<size_t>(cfg.mel_bins));
  for (int k = 0; k < cfg.num_coeffs; ++k)
    for (int m = 0; m < cfg.mel_bins; ++m)
      dct[size_t(k) * cfg.mel_bins + m] =
          (k == 0 ? scale0 : scale) *
          std::cos(kPi * double(k) * (2.0 * double(m) + 1.0) /
                   (2.0 * double(cfg.mel_bins)));

  Tensor out({frames, cfg.num_coeffs});
  std::vector<std::complex<double>> buf(static_cast<size_t>(cfg.fft_size));
  std::vector<double> power(static_cast<size_t>(spec_bins));
  std::vector<double> mel(static_cast<size_t>(cfg.mel_bins));

  for (int fr = 0; fr < frames; ++fr) {
    const int start = fr * cfg.shift_samples;
    for (int i = 0; i < cfg.window_samples; ++i)
      buf[size_t(i)] = clip.samples[size_t(start + i)] * window[size_t(i)];
    for (int i = cfg.window_samples; i < cfg.fft_size; ++i) buf[size_t(i)] = 0.0;
    fft_pow2(buf, false);
    for (int k = 0; k < spec_bins; ++k) power[size_t(k)] = std::norm(buf[size_t(k)]);

    for (int m = 0; m < cfg.mel_bins; ++m) {
      double acc = 0.0;
      const auto& filt = filters[size_t(m)];
      for (int k = 0; k < spec_bins; ++k) acc += filt[size_t(k)] * power[size_t(k)];
      mel[size_t(m)] = std::log(acc < cfg.log_floor ? cfg.log_floor : acc);
    }

    for (int k = 0; k < cfg.num_coeffs; ++k) {
      double acc = 0.0;
      const double* row = dct.data() + size_t(k) * cfg.mel_bins;
      for (int m = 0; m < cfg.mel_bins; ++m) acc += row[m] * mel[size_t(m)];
      out.at(fr, k) = acc;
    }
  }
  return FeatureMap{std::move(out)};
}

}  // namespace kws::dsp
