#pragma once

#include <string>
#include <vector>

namespace kws::dsp {

// Mono PCM audio, amplitudes normalized to [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = 16000;
};

// Zero-pads at the end or truncates so the clip is exactly target_samples
// long. Dataset clips are nominally 1 s; the fixed 98-frame feature map
// depends on this.
AudioClip pad_or_trim(AudioClip clip, int target_samples);

// Brick-wall band-pass in the DFT domain: bins whose frequency falls outside
// [low_hz, high_hz] are zeroed (DC included when low_hz > 0) and the signal
// is reconstructed by the inverse transform. Length is preserved.
AudioClip band_limit(const AudioClip& clip, double low_hz, double high_hz);

// 16-bit PCM WAV, mono. Throws IoError / ValueError with a reason (stereo,
// wrong bit depth, ...) instead of silently converting.
AudioClip read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioClip& clip);

}  // namespace kws::dsp
