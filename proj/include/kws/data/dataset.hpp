#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kws::data {

inline constexpr int kNumClasses = 12;
inline constexpr int kUnknownLabel = 10;
inline constexpr int kSilenceLabel = 11;

// Classes 0-9 in fixed order, then "unknown" and "silence".
const std::vector<std::string>& keyword_names();
int label_for_word(const std::string& word);  // keyword index or kUnknownLabel
std::string label_name(int label);

struct Entry {
  std::string path;      // relative to the dataset root
  int label = 0;
  int noise_offset = -1;  // >= 0: a 1 s silence crop of a noise file
};

struct SplitManifest {
  std::vector<Entry> train, dev, test;
  // word-file assignment counts before unknown downsampling and silence
  // synthesis, i.e. raw list-file bookkeeping
  long raw_train = 0, raw_dev = 0, raw_test = 0;
};

struct ScanOptions {
  // unknown and silence are each targeted at ~10% of the final split, i.e.
  // 1/8 of the keyword count
  double unknown_per_keyword = 0.125;
  double silence_per_keyword = 0.125;
  std::uint64_t seed = 0x5eedf00dULL;
};

// Walks the Speech Commands V1 layout (one folder per word, lists under
// validation_list.txt / testing_list.txt, noise under _background_noise_).
// Unknown-word files are subsampled deterministically by path hash; silence
// entries are seeded crops of the noise recordings.
SplitManifest scan_dataset(const std::string& root,
                           const ScanOptions& options = {});

void write_manifest_csv(const SplitManifest& manifest,
                        const std::string& path);

}  // namespace kws::data
