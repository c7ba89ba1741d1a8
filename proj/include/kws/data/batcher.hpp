#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kws/data/dataset.hpp"
#include "kws/dsp/mfcc.hpp"

namespace kws::data {

class FeatureSource {
 public:
  virtual ~FeatureSource() = default;
  virtual dsp::FeatureMap features(const Entry& entry) = 0;
  // Augmentation (when enabled) varies with the epoch.
  virtual void set_epoch(int /*epoch*/) {}
};

// wav -> pad to 1 s -> 20 Hz..7.8 kHz band-pass -> MFCC. Features pass
// through float32 (the cache precision) whether or not a cache directory is
// set, so cached and fresh runs produce identical batches. Optional
// augmentation (time shift + background noise mix) bypasses the cache and is
// re-seeded per epoch.
class PipelineSource : public FeatureSource {
 public:
  PipelineSource(std::string dataset_root,
                 std::optional<std::string> cache_dir,
                 bool augment = false, std::uint64_t seed = 0);

  dsp::FeatureMap features(const Entry& entry) override;
  void set_epoch(int epoch) override { epoch_ = epoch; }

  dsp::AudioClip load_clip(const Entry& entry) const;  // padded, not filtered

 private:
  std::string root_;
  std::optional<std::string> cache_dir_;
  bool augment_;
  std::uint64_t seed_;
  int epoch_ = 0;
  std::vector<std::string> noise_files_;
};

// Deterministic batched iteration: shuffle order is a pure function of
// (seed, epoch); the final short batch is emitted.
class BatchStream {
 public:
  BatchStream(std::vector<Entry> entries, FeatureSource& source,
              int batch_size, std::uint64_t seed, bool shuffle);

  void start_epoch(int epoch);
  // Fills x [B, 98, 40] and labels; returns false at end of epoch.
  bool next(Tensor& x, std::vector<int>& labels);

  int num_examples() const { return static_cast<int>(entries_.size()); }

 private:
  std::vector<Entry> entries_;
  FeatureSource& source_;
  int batch_size_;
  std::uint64_t seed_;
  bool shuffle_;
  std::vector<int> order_;
  size_t cursor_ = 0;
};

}  // namespace kws::data
