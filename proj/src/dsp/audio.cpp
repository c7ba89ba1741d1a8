#include "kws/dsp/audio.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "kws/dsp/fft.hpp"
#include "kws/util/errors.hpp"

namespace kws::dsp {

AudioClip pad_or_trim(AudioClip clip, int target_samples) {
  clip.samples.resize(static_cast<size_t>(target_samples), 0.0);
  return clip;
}

AudioClip band_limit(const AudioClip& clip, double low_hz, double high_hz) {
  const double nyquist = 0.5 * clip.sample_rate_hz;
  if (!(low_hz >= 0.0) || !(low_hz < high_hz) || !(high_hz <= nyquist))
    throw RangeError("band_limit: need 0 <= low < high <= " +
                     std::to_string(nyquist) + " Hz");
  for (double s : clip.samples)
    if (!std::isfinite(s)) throw ValueError("band_limit: non-finite sample");

  const size_t n = clip.samples.size();
  if (n == 0) return clip;

  std::vector<std::complex<double>> spec(n);
  for (size_t i = 0; i < n; ++i) spec[i] = clip.samples[i];
  spec = dft(std::move(spec), false);

  const double bin_hz = double(clip.sample_rate_hz) / double(n);
  for (size_t k = 0; k < n; ++k) {
    // bin k and bin n-k carry +f and -f; mask on |f| keeps the output real
    const size_t mirror = k <= n / 2 ? k : n - k;
    const double f = double(mirror) * bin_hz;
    if (f < low_hz || f > high_hz) spec[k] = 0.0;
  }

  spec = dft(std::move(spec), true);
  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  out.samples.resize(n);
  for (size_t i = 0; i < n; ++i) out.samples[i] = spec[i].real();
  return out;
}

namespace {

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 |
         std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

std::uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return std::uint16_t(b[0] | b[1] << 8);
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {char(v & 0xff), char(v >> 8 & 0xff), char(v >> 16 & 0xff),
                     char(v >> 24 & 0xff)};
  out.write(b, 4);
}

void write_u16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {char(v & 0xff), char(v >> 8 & 0xff)};
  out.write(b, 2);
}

}  // namespace

AudioClip read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file: " + path);

  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0)
    throw ValueError(path + ": not a RIFF file");
  read_u32(in);  // riff size
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "WAVE", 4) != 0)
    throw ValueError(path + ": not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::vector<std::int16_t> pcm;

  while (in.read(tag, 4)) {
    const std::uint32_t chunk_size = read_u32(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      format = read_u16(in);
      channels = read_u16(in);
      rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      if (chunk_size > 16) in.seekg(chunk_size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw ValueError(path + ": data chunk before fmt");
      pcm.resize(chunk_size / 2);
      in.read(reinterpret_cast<char*>(pcm.data()),
              std::streamsize(pcm.size() * 2));
      break;
    } else {
      in.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }

  if (!have_fmt) throw ValueError(path + ": missing fmt chunk");
  if (format != 1) throw ValueError(path + ": only PCM WAV is supported");
  if (channels != 1)
    throw ValueError(path + ": expected mono audio, got " +
                     std::to_string(channels) + " channels");
  if (bits != 16) throw ValueError(path + ": expected 16-bit samples");

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(rate);
  clip.samples.resize(pcm.size());
  // x86 is little-endian, matching the on-disk sample order.
  for (size_t i = 0; i < pcm.size(); ++i)
    clip.samples[i] = double(pcm[i]) / 32768.0;
  return clip;
}

void write_wav(const std::string& path, const AudioClip& clip) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write WAV file: " + path);

  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(clip.samples.size() * 2);
  out.write("RIFF", 4);
  write_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, 1);  // mono
  write_u32(out, static_cast<std::uint32_t>(clip.sample_rate_hz));
  write_u32(out, static_cast<std::uint32_t>(clip.sample_rate_hz * 2));
  write_u16(out, 2);
  write_u16(out, 16);
  out.write("data", 4);
  write_u32(out, data_bytes);
  for (double s : clip.samples) {
    double v = s * 32768.0;
    if (v > 32767.0) v = 32767.0;
    if (v < -32768.0) v = -32768.0;
    write_u16(out, static_cast<std::uint16_t>(
                       static_cast<std::int16_t>(std::lrint(v))));
  }
}

}  // namespace kws::dsp
