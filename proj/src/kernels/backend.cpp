#include "kws/kernels/backend.hpp"

#include <cstdlib>

#include "kws/util/errors.hpp"

namespace kws::kernels {

namespace detail {
const Backend* avx2_backend_impl();  // defined in avx2.cpp
}

const Backend* avx2_backend() {
#if defined(__x86_64__) || defined(__i386__)
  if (!__builtin_cpu_supports("avx2")) return nullptr;
  return detail::avx2_backend_impl();
#else
  return nullptr;
#endif
}

namespace {

const Backend* pick_default() {
  if (const char* env = std::getenv("KWS_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return &scalar_backend();
    if (want == "avx2" && avx2_backend()) return avx2_backend();
    // Unknown or unavailable request falls back to the best available.
  }
  if (const Backend* b = avx2_backend()) return b;
  return &scalar_backend();
}

const Backend*& active_slot() {
  static const Backend* active = pick_default();
  return active;
}

}  // namespace

const Backend& active() { return *active_slot(); }

void set_active(const std::string& name) {
  if (name == "scalar") {
    active_slot() = &scalar_backend();
    return;
  }
  if (name == "avx2") {
    if (const Backend* b = avx2_backend()) {
      active_slot() = b;
      return;
    }
    throw ConfigError("kernel backend 'avx2' is not available on this CPU");
  }
  throw ConfigError("unknown kernel backend '" + name + "'");
}

std::vector<const Backend*> available_backends() {
  std::vector<const Backend*> out{&scalar_backend()};
  if (const Backend* b = avx2_backend()) out.push_back(b);
  return out;
}

}  // namespace kws::kernels
