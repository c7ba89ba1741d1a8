#include "kws/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include <json.hpp>

#include "kws/util/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace kws::model {

namespace {

constexpr char kMagic[8] = {'K', 'W', 'S', 'C', 'K', 'P', 'T', '1'};

struct NamedTensor {
  std::string name;
  bool trainable;
  Tensor* tensor;
};

std::vector<NamedTensor> checkpoint_entries(Model& model) {
  std::vector<NamedTensor> entries;
  for (Parameter* p : model.parameters())
    entries.push_back({p->name, true, &p->value});
  for (auto& [name, tensor] : model.buffers())
    entries.push_back({name, false, tensor});
  return entries;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);

  const ModelSpec& spec = model.spec();
  nlohmann::json manifest = {
      {"format_version", 1},   {"variant", spec.name},
      {"channels", spec.channels}, {"heads", spec.heads},
      {"num_classes", spec.num_classes},
  };
  const std::string mbytes = manifest.dump();

  out.write(kMagic, 8);
  put_u32(out, static_cast<std::uint32_t>(mbytes.size()));
  out.write(mbytes.data(), std::streamsize(mbytes.size()));

  auto entries = checkpoint_entries(model);
  put_u32(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    const std::uint32_t name_len = static_cast<std::uint32_t>(e.name.size());
    put_u32(out, name_len);
    out.write(e.name.data(), std::streamsize(e.name.size()));
    out.put(e.trainable ? 1 : 0);
    out.put(static_cast<char>(e.tensor->rank()));
    for (int i = 0; i < e.tensor->rank(); ++i)
      put_u32(out, static_cast<std::uint32_t>(e.tensor->dim(i)));
    out.write(reinterpret_cast<const char*>(e.tensor->data()),
              std::streamsize(e.tensor->size() * sizeof(double)));
  }
  if (!out) throw IoError("short write on checkpoint: " + path);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);

  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw ValueError(path + ": not a checkpoint file");

  const std::uint32_t mlen = get_u32(in);
  std::string mbytes(mlen, '\0');
  in.read(mbytes.data(), mlen);
  if (!in) throw ValueError(path + ": truncated manifest");
  const auto manifest = nlohmann::json::parse(mbytes);
  const std::string variant = manifest.at("variant").get<std::string>();

  Model model(ModelSpec::for_variant(variant), /*seed=*/0);
  std::map<std::string, Tensor*> by_name;
  for (const auto& e : checkpoint_entries(model)) by_name[e.name] = e.tensor;

  const std::uint32_t count = get_u32(in);
  std::uint32_t loaded = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = get_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const int trainable = in.get();
    const int rank = in.get();
    (void)trainable;
    if (!in || rank < 0 || rank > 8)
      throw ValueError(path + ": corrupt tensor header for '" + name + "'");
    std::vector<int> shape(static_cast<size_t>(rank));
    for (int r = 0; r < rank; ++r) shape[size_t(r)] = static_cast<int>(get_u32(in));

    auto it = by_name.find(name);
    if (it == by_name.end())
      throw ConfigError(path + ": checkpoint tensor '" + name +
                        "' has no slot in variant " + variant);
    if (it->second->shape() != shape)
      throw ConfigError(path + ": shape mismatch for '" + name + "': file " +
                        shape_str(shape) + " vs model " +
                        shape_str(it->second->shape()));
    in.read(reinterpret_cast<char*>(it->second->data()),
            std::streamsize(it->second->size() * sizeof(double)));
    if (!in) throw ValueError(path + ": truncated tensor data for '" + name + "'");
    ++loaded;
  }
  if (loaded != by_name.size())
    throw ConfigError(path + ": checkpoint holds " + std::to_string(loaded) +
                      " tensors but variant " + variant + " expects " +
                      std::to_string(by_name.size()));
  return model;
}

}  // namespace kws::model
