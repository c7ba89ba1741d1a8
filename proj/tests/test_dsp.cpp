#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <random>

#include "kws/dsp/audio.hpp"
#include "kws/dsp/feature_cache.hpp"
#include "kws/dsp/fft.hpp"
#include "kws/dsp/mfcc.hpp"
#include "kws/util/errors.hpp"
#include "support/mfcc_reference.hpp"

using namespace kws;
using namespace kws::dsp;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<std::complex<double>> naive_dft(
    const std::vector<std::complex<double>>& x, bool inverse) {
  const size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  const double sign = inverse ? 1.0 : -1.0;
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (size_t i = 0; i < n; ++i)
      acc += x[i] * std::polar(1.0, sign * 2.0 * kPi * double(k * i % n) / double(n));
    out[k] = inverse ? acc / double(n) : acc;
  }
  return out;
}

AudioClip sine_clip(double freq_hz, int n = 16000, int rate = 16000,
                    double amp = 0.5) {
  AudioClip clip;
  clip.sample_rate_hz = rate;
  clip.samples.resize(size_t(n));
  for (int i = 0; i < n; ++i)
    clip.samples[size_t(i)] = amp * std::sin(2.0 * kPi * freq_hz * i / rate);
  return clip;
}

double rms(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / double(x.size()));
}

}  // namespace

TEST_SUITE_BEGIN("dsp");

TEST_CASE("dft matches a naive DFT at power-of-two and awkward lengths") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (size_t n : {size_t(8), size_t(12), size_t(37), size_t(100), size_t(512)}) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {dist(rng), dist(rng)};
    const auto got = dft(x, false);
    const auto want = naive_dft(x, false);
    double err = 0.0;
    for (size_t i = 0; i < n; ++i) err = std::max(err, std::abs(got[i] - want[i]));
    INFO("n = ", n);
    CHECK(err < 1e-9 * double(n));
  }
}

TEST_CASE("inverse dft round-trips a 16000-sample signal") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<std::complex<double>> x(16000);
  for (auto& v : x) v = dist(rng);
  const auto back = dft(dft(x, false), true);
  double err = 0.0;
  for (size_t i = 0; i < x.size(); ++i)
    err = std::max(err, std::abs(back[i] - x[i]));
  CHECK(err < 1e-9);
}

TEST_CASE("band_limit rejects out-of-band tones and passes in-band ones") {
  const AudioClip in_band = sine_clip(1000.0);
  const AudioClip out_band = sine_clip(10000.0);

  const double kept = rms(band_limit(in_band, 20.0, 7800.0).samples);
  CHECK(kept == doctest::Approx(rms(in_band.samples)).epsilon(0.01));

  const double removed = rms(band_limit(out_band, 20.0, 7800.0).samples);
  CHECK(removed < 0.01 * rms(out_band.samples));
}

TEST_CASE("band_limit of silence is silence") {
  AudioClip zeros;
  zeros.samples.assign(16000, 0.0);
  const auto out = band_limit(zeros, 20.0, 7800.0);
  for (double v : out.samples) CHECK(v == 0.0);
}

TEST_CASE("band_limit validates band edges and sample values") {
  AudioClip clip = sine_clip(100.0);
  CHECK_THROWS_AS(band_limit(clip, 20.0, 9000.0), RangeError);
  CHECK_THROWS_AS(band_limit(clip, 500.0, 100.0), RangeError);
  clip.samples[5] = std::nan("");
  CHECK_THROWS_AS(band_limit(clip, 20.0, 7800.0), ValueError);
}

TEST_CASE("mfcc of 1 s of zeros: 98 identical rows at the log floor") {
  AudioClip zeros;
  zeros.samples.assign(16000, 0.0);
  const FeatureMap fm = mfcc(zeros);
  REQUIRE(fm.frames() == 98);
  REQUIRE(fm.coeffs() == 40);
  for (int t = 1; t < 98; ++t)
    for (int c = 0; c < 40; ++c) CHECK(fm.values.at(t, c) == fm.values.at(0, c));
  // whole spectrum at the floor: only the DC cepstral coefficient survives
  CHECK(fm.values.at(0, 0) == doctest::Approx(std::log(1e-12) * std::sqrt(40.0)));
  CHECK(std::abs(fm.values.at(0, 1)) < 1e-9);
}

TEST_CASE("mfcc of white noise is finite with contract shape") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> dist(-0.8, 0.8);
  AudioClip clip;
  clip.samples.resize(16000);
  for (auto& v : clip.samples) v = dist(rng);
  const FeatureMap fm = mfcc(clip);
  CHECK(fm.frames() == 98);
  CHECK(fm.coeffs() == 40);
  CHECK(fm.values.all_finite());
}

TEST_CASE("mfcc rejects clips shorter than a window") {
  AudioClip tiny;
  tiny.samples.assign(100, 0.0);
  CHECK_THROWS_AS(mfcc(tiny), ValueError);
}

TEST_CASE("mfcc matches the independent reference oracle within 1e-6") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> amp(0.1, 0.7);
  std::uniform_real_distribution<double> freq(50.0, 7000.0);
  for (int sig = 0; sig < 4; ++sig) {
    AudioClip clip;
    clip.samples.assign(16000, 0.0);
    const double f1 = freq(rng), f2 = freq(rng), a1 = amp(rng), a2 = amp(rng);
    for (int i = 0; i < 16000; ++i)
      clip.samples[size_t(i)] = a1 * std::sin(2.0 * kPi * f1 * i / 16000.0) +
                                a2 * std::sin(2.0 * kPi * f2 * i / 16000.0);
    const FeatureMap fm = mfcc(clip);
    const Tensor ref = kws::testing::reference_mfcc(clip.samples, 16000);
    double err = 0.0;
    for (std::int64_t i = 0; i < ref.size(); ++i)
      err = std::max(err, std::abs(fm.values[i] - ref[i]));
    INFO("signal ", sig, " freqs ", f1, " ", f2);
    CHECK(err < 1e-6);
  }
}

TEST_CASE("delaying by one hop shifts feature rows by one") {
  const AudioClip clip = sine_clip(440.0);
  AudioClip delayed;
  delayed.samples.assign(16000, 0.0);
  for (int i = 160; i < 16000; ++i)
    delayed.samples[size_t(i)] = clip.samples[size_t(i - 160)];

  const FeatureMap a = mfcc(clip);
  const FeatureMap b = mfcc(delayed);
  for (int t = 1; t < 98; ++t)
    for (int c = 0; c < 40; ++c)
      CHECK(b.values.at(t, c) == a.values.at(t - 1, c));
}

TEST_CASE("identical input yields bit-identical features") {
  const AudioClip clip = sine_clip(333.0);
  const FeatureMap a = mfcc(clip);
  const FeatureMap b = mfcc(clip);
  for (std::int64_t i = 0; i < a.values.size(); ++i)
    CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("wav io round trip and malformed input rejection") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "kws_dsp_test";
  fs::create_directories(dir);

  AudioClip clip = sine_clip(500.0, 8000);
  const std::string path = (dir / "tone.wav").string();
  write_wav(path, clip);
  const AudioClip back = read_wav(path);
  REQUIRE(back.samples.size() == clip.samples.size());
  CHECK(back.sample_rate_hz == 16000);
  double err = 0.0;
  for (size_t i = 0; i < back.samples.size(); ++i)
    err = std::max(err, std::abs(back.samples[i] - clip.samples[i]));
  CHECK(err < 1.0 / 32768.0);  // 16-bit quantization bound

  const std::string bad = (dir / "bad.wav").string();
  {
    std::ofstream out(bad, std::ios::binary);
    out << "not a wav";
  }
  CHECK_THROWS_AS(read_wav(bad), ValueError);
  CHECK_THROWS_AS(read_wav((dir / "missing.wav").string()), IoError);
}

TEST_CASE("feature cache round trip is bit-exact") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "kws_dsp_test";
  fs::create_directories(dir);

  const FeatureMap fm = quantize_f32(mfcc(sine_clip(700.0)));
  const std::string path = (dir / "tone.feat").string();
  write_feature_file(path, fm);
  const FeatureMap back = read_feature_file(path);
  REQUIRE(back.frames() == fm.frames());
  REQUIRE(back.coeffs() == fm.coeffs());
  for (std::int64_t i = 0; i < fm.values.size(); ++i)
    CHECK(back.values[i] == fm.values[i]);
}

TEST_CASE("pad_or_trim fixes the length") {
  AudioClip clip = sine_clip(200.0, 12000);
  const auto padded = pad_or_trim(clip, 16000);
  CHECK(padded.samples.size() == 16000);
  CHECK(padded.samples[15999] == 0.0);
  const auto trimmed = pad_or_trim(sine_clip(200.0, 17000), 16000);
  CHECK(trimmed.samples.size() == 16000);
}

TEST_SUITE_END();
