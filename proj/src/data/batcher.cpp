#include "kws/data/batcher.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>

#include "kws/dsp/feature_cache.hpp"
#include "kws/util/errors.hpp"
#include "kws/util/hash.hpp"

namespace fs = std::filesystem;

namespace kws::data {

namespace {
constexpr int kClipSamples = 16000;
constexpr double kBandLowHz = 20.0;
constexpr double kBandHighHz = 7800.0;
}  // namespace

PipelineSource::PipelineSource(std::string dataset_root,
                               std::optional<std::string> cache_dir,
                               bool augment, std::uint64_t seed)
    : root_(std::move(dataset_root)),
      cache_dir_(std::move(cache_dir)),
      augment_(augment),
      seed_(seed) {
  if (cache_dir_) fs::create_directories(*cache_dir_);
  if (augment_) {
    const fs::path noise_dir = fs::path(root_) / "_background_noise_";
    if (fs::is_directory(noise_dir)) {
      for (const auto& f : fs::directory_iterator(noise_dir))
        if (f.path().extension() == ".wav")
          noise_files_.push_back(f.path().string());
      std::sort(noise_files_.begin(), noise_files_.end());
    }
  }
}

dsp::AudioClip PipelineSource::load_clip(const Entry& entry) const {
  dsp::AudioClip clip = dsp::read_wav((fs::path(root_) / entry.path).string());
  if (entry.noise_offset >= 0) {
    const size_t begin = static_cast<size_t>(entry.noise_offset);
    const size_t end = std::min(clip.samples.size(), begin + kClipSamples);
    clip.samples.assign(clip.samples.begin() + std::ptrdiff_t(begin),
                        clip.samples.begin() + std::ptrdiff_t(end));
  }
  return pad_or_trim(std::move(clip), kClipSamples);
}

dsp::FeatureMap PipelineSource::features(const Entry& entry) {
  const bool can_cache = cache_dir_ && !augment_;
  fs::path cache_path;
  if (can_cache) {
    const std::string key = entry.path + "@" + std::to_string(entry.noise_offset);
    char name[32];
    std::snprintf(name, sizeof(name), "%016llx.feat",
                  static_cast<unsigned long long>(fnv1a64(key)));
    cache_path = fs::path(*cache_dir_) / name;
    if (fs::exists(cache_path)) return dsp::read_feature_file(cache_path.string());
  }

  dsp::AudioClip clip = load_clip(entry);

  if (augment_ && entry.noise_offset < 0) {
    std::mt19937_64 rng(seed_ ^ fnv1a64(entry.path) ^
                        (std::uint64_t(epoch_) * 0x9E3779B97F4A7C15ull));
    std::uniform_int_distribution<int> shift_dist(-1600, 1600);
    const int shift = shift_dist(rng);
    std::vector<double> shifted(clip.samples.size(), 0.0);
    for (size_t i = 0; i < clip.samples.size(); ++i) {
      const std::ptrdiff_t src = std::ptrdiff_t(i) - shift;
      if (src >= 0 && src < std::ptrdiff_t(clip.samples.size()))
        shifted[i] = clip.samples[size_t(src)];
    }
    clip.samples = std::move(shifted);
    if (!noise_files_.empty()) {
      std::uniform_real_distribution<double> vol(0.0, 0.1);
      const double v = vol(rng);
      const auto noise = dsp::read_wav(
          noise_files_[rng() % noise_files_.size()]);
      if (noise.samples.size() >= kClipSamples) {
        std::uniform_int_distribution<int> off_dist(
            0, static_cast<int>(noise.samples.size()) - kClipSamples);
        const int off = off_dist(rng);
        for (int i = 0; i < kClipSamples; ++i)
          clip.samples[size_t(i)] += v * noise.samples[size_t(off + i)];
      }
    }
  }

  clip = dsp::band_limit(clip, kBandLowHz, kBandHighHz);
  dsp::FeatureMap fm = dsp::quantize_f32(dsp::mfcc(clip));
  if (can_cache) dsp::write_feature_file(cache_path.string(), fm);
  return fm;
}

BatchStream::BatchStream(std::vector<Entry> entries, FeatureSource& source,
                         int batch_size, std::uint64_t seed, bool shuffle)
    : entries_(std::move(entries)),
      source_(source),
      batch_size_(batch_size),
      seed_(seed),
      shuffle_(shuffle) {
  if (entries_.empty()) throw ConfigError("batch stream over an empty split");
  if (batch_size_ < 1) throw RangeError("batch size must be >= 1");
  order_.resize(entries_.size());
  std::iota(order_.begin(), order_.end(), 0);
}

void BatchStream::start_epoch(int epoch) {
  cursor_ = 0;
  source_.set_epoch(epoch);
  std::iota(order_.begin(), order_.end(), 0);
  if (shuffle_) {
    std::mt19937_64 rng(seed_ * 0x9E3779B97F4A7C15ull +
                        static_cast<std::uint64_t>(epoch) + 1);
    std::shuffle(order_.begin(), order_.end(), rng);
  }
}

bool BatchStream::next(Tensor& x, std::vector<int>& labels) {
  if (cursor_ >= order_.size()) return false;
  const int b = static_cast<int>(
      std::min<size_t>(order_.size() - cursor_, size_t(batch_size_)));

  labels.resize(size_t(b));
  Tensor batch;  // shaped after the first feature map
  for (int i = 0; i < b; ++i) {
    const Entry& entry = entries_[size_t(order_[cursor_ + size_t(i)])];
    dsp::FeatureMap fm = source_.features(entry);
    if (batch.empty())
      batch = Tensor({b, fm.frames(), fm.coeffs()});
    if (fm.frames() != batch.dim(1) || fm.coeffs() != batch.dim(2))
      throw ShapeError("feature map shape varies across the batch: " +
                       entry.path);
    std::copy(fm.values.data(), fm.values.data() + fm.values.size(),
              batch.data() + std::int64_t(i) * fm.values.size());
    labels[size_t(i)] = entry.label;
  }
  cursor_ += size_t(b);
  x = std::move(batch);
  return true;
}

}  // namespace kws::data
