#pragma once

#include <string>

#include "kws/dsp/mfcc.hpp"

namespace kws::dsp {

// On-disk feature file: {u32 magic, u32 T, u32 F} header followed by T*F
// row-major little-endian float32 values. Round trips are bit-exact at f32.
inline constexpr std::uint32_t kFeatureMagic = 0x4653574Bu;  // "KWSF"

void write_feature_file(const std::string& path, const FeatureMap& fm);
FeatureMap read_feature_file(const std::string& path);

// Rounds every coefficient through float32. Applying this before training
// makes cached and freshly computed features bit-identical.
FeatureMap quantize_f32(FeatureMap fm);

}  // namespace kws::dsp
