#include "kws/dsp/feature_cache.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "kws/util/errors.hpp"

namespace kws::dsp {

namespace {
void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {char(v & 0xff), char(v >> 8 & 0xff), char(v >> 16 & 0xff),
                     char(v >> 24 & 0xff)};
  out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 |
         std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}
}  // namespace

void write_feature_file(const std::string& path, const FeatureMap& fm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write feature file: " + path);
  const int t = fm.frames(), f = fm.coeffs();
  put_u32(out, kFeatureMagic);
  put_u32(out, static_cast<std::uint32_t>(t));
  put_u32(out, static_cast<std::uint32_t>(f));
  std::vector<float> row(static_cast<size_t>(f));
  for (int r = 0; r < t; ++r) {
    for (int c = 0; c < f; ++c) row[size_t(c)] = static_cast<float>(fm.values.at(r, c));
    out.write(reinterpret_cast<const char*>(row.data()),
              std::streamsize(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("short write on feature file: " + path);
}

FeatureMap read_feature_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file: " + path);
  if (get_u32(in) != kFeatureMagic)
    throw ValueError(path + ": bad feature file magic");
  const int t = static_cast<int>(get_u32(in));
  const int f = static_cast<int>(get_u32(in));
  if (!in || t <= 0 || f <= 0) throw ValueError(path + ": bad feature header");
  Tensor values({t, f});
  std::vector<float> row(static_cast<size_t>(f));
  for (int r = 0; r < t; ++r) {
    in.read(reinterpret_cast<char*>(row.data()),
            std::streamsize(row.size() * sizeof(float)));
    if (!in) throw IoError(path + ": truncated feature file");
    for (int c = 0; c < f; ++c) values.at(r, c) = double(row[size_t(c)]);
  }
  return FeatureMap{std::move(values)};
}

FeatureMap quantize_f32(FeatureMap fm) {
  for (std::int64_t i = 0; i < fm.values.size(); ++i)
    fm.values[i] = double(static_cast<float>(fm.values[i]));
  return fm;
}

}  // namespace kws::dsp
