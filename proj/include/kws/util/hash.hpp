#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace kws {

// FNV-1a. Stable across platforms, used for deterministic dataset sampling.
std::uint64_t fnv1a64(std::string_view s);

// Hex SHA-256 of a file's bytes; run manifests record checkpoint identity
// with it.
std::string sha256_file_hex(const std::string& path);
std::string sha256_hex(std::string_view bytes);

}  // namespace kws
