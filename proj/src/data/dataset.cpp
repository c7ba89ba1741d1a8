#include "kws/data/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "kws/dsp/audio.hpp"
#include "kws/util/errors.hpp"
#include "kws/util/hash.hpp"

namespace fs = std::filesystem;

namespace kws::data {

const std::vector<std::string>& keyword_names() {
  static const std::vector<std::string> names = {
      "yes", "no", "up", "down", "left", "right", "on", "off", "stop", "go"};
  return names;
}

int label_for_word(const std::string& word) {
  const auto& names = keyword_names();
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == word) return static_cast<int>(i);
  return kUnknownLabel;
}

std::string label_name(int label) {
  if (label >= 0 && label < 10) return keyword_names()[size_t(label)];
  if (label == kUnknownLabel) return "unknown";
  if (label == kSilenceLabel) return "silence";
  throw RangeError("label out of range: " + std::to_string(label));
}

namespace {

std::unordered_set<std::string> read_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("dataset is missing its split list: " + path.string());
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    if (!line.empty()) out.insert(line);
  }
  return out;
}

// Deterministic subsample: order candidates by path hash, keep the first n.
std::vector<Entry> pick_by_hash(std::vector<Entry> candidates, size_t n) {
  std::sort(candidates.begin(), candidates.end(),
            [](const Entry& a, const Entry& b) {
              const auto ha = fnv1a64(a.path), hb = fnv1a64(b.path);
              return ha != hb ? ha < hb : a.path < b.path;
            });
  if (candidates.size() > n) candidates.resize(n);
  return candidates;
}

}  // namespace

SplitManifest scan_dataset(const std::string& root, const ScanOptions& opt) {
  const fs::path base(root);
  if (!fs::is_directory(base))
    throw ConfigError("dataset root is not a directory: " + root);
  const auto val_list = read_list(base / "validation_list.txt");
  const auto test_list = read_list(base / "testing_list.txt");

  // word dirs sorted for a stable scan order
  std::vector<std::string> words;
  for (const auto& e : fs::directory_iterator(base)) {
    if (!e.is_directory()) continue;
    const std::string name = e.path().filename().string();
    if (name == "_background_noise_") continue;
    words.push_back(name);
  }
  std::sort(words.begin(), words.end());

  SplitManifest m;
  std::vector<Entry> unk_train, unk_dev, unk_test;
  for (const auto& word : words) {
    const int label = label_for_word(word);
    std::vector<std::string> files;
    for (const auto& f : fs::directory_iterator(base / word))
      if (f.path().extension() == ".wav")
        files.push_back(word + "/" + f.path().filename().string());
    std::sort(files.begin(), files.end());
    for (const auto& rel : files) {
      Entry entry{rel, label, -1};
      if (test_list.count(rel)) {
        ++m.raw_test;
        (label == kUnknownLabel ? unk_test : m.test).push_back(entry);
      } else if (val_list.count(rel)) {
        ++m.raw_dev;
        (label == kUnknownLabel ? unk_dev : m.dev).push_back(entry);
      } else {
        ++m.raw_train;
        (label == kUnknownLabel ? unk_train : m.train).push_back(entry);
      }
    }
  }

  // noise recordings for silence crops
  std::vector<std::string> noise_files;
  std::vector<int> noise_len;
  const fs::path noise_dir = base / "_background_noise_";
  if (fs::is_directory(noise_dir)) {
    for (const auto& f : fs::directory_iterator(noise_dir))
      if (f.path().extension() == ".wav")
        noise_files.push_back("_background_noise_/" +
                              f.path().filename().string());
    std::sort(noise_files.begin(), noise_files.end());
    for (const auto& file : noise_files)
      noise_len.push_back(
          static_cast<int>(dsp::read_wav((base / file).string()).samples.size()));
  }

  auto finalize = [&](std::vector<Entry>& split, std::vector<Entry>& unknowns,
                      int split_id) {
    const size_t keywords = split.size();
    const auto n_unknown =
        static_cast<size_t>(double(keywords) * opt.unknown_per_keyword + 0.5);
    for (auto& e : pick_by_hash(std::move(unknowns), n_unknown))
      split.push_back(std::move(e));

    if (!noise_files.empty()) {
      const auto n_silence = static_cast<size_t>(
          double(keywords) * opt.silence_per_keyword + 0.5);
      std::mt19937_64 rng(opt.seed + static_cast<std::uint64_t>(split_id));
      for (size_t i = 0; i < n_silence; ++i) {
        const size_t which = i % noise_files.size();
        // noise recordings are longer than 1 s; crop start chosen per entry
        const int max_off = std::max(0, noise_len[which] - 16000);
        std::uniform_int_distribution<int> dist(0, max_off);
        split.push_back(Entry{noise_files[which], kSilenceLabel, dist(rng)});
      }
    }
    std::sort(split.begin(), split.end(), [](const Entry& a, const Entry& b) {
      return a.path != b.path ? a.path < b.path
                              : a.noise_offset < b.noise_offset;
    });
  };
  finalize(m.train, unk_train, 0);
  finalize(m.dev, unk_dev, 1);
  finalize(m.test, unk_test, 2);

  if (m.train.empty() || m.dev.empty() || m.test.empty())
    throw ConfigError("dataset scan produced an empty split under " + root);
  return m;
}

void write_manifest_csv(const SplitManifest& manifest,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest CSV: " + path);
  out << "split,path,label,label_name,noise_offset\n";
  auto dump = [&out](const char* split, const std::vector<Entry>& entries) {
    for (const auto& e : entries)
      out << split << ',' << e.path << ',' << e.label << ','
          << label_name(e.label) << ',' << e.noise_offset << '\n';
  };
  dump("train", manifest.train);
  dump("dev", manifest.dev);
  dump("test", manifest.test);
}

}  // namespace kws::data
