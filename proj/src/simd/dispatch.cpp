#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "dman/simd/kernels.hpp"

namespace dman::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("DMAN_KERNELS")) {
    if (std::string(env) == "scalar") return Backend::scalar;
  }
  return backend_available(Backend::avx2) ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& active() {
  static std::atomic<Backend> b{initial_backend()};
  return b;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
  }
  return "unknown";
}

bool backend_available(Backend b) {
  if (b == Backend::scalar) return true;
  static const bool ok = avx2::table_f64() != nullptr && cpu_has_avx2();
  return ok;
}

Backend active_backend() { return active().load(std::memory_order_relaxed); }

void set_active_backend(Backend b) {
  if (!backend_available(b))
    throw std::invalid_argument("kernel backend '" + std::string(backend_name(b)) +
                                "' is not available on this machine");
  active().store(b, std::memory_order_relaxed);
}

template <>
const KernelTable<double>& kernels_for<double>(Backend b) {
  if (b == Backend::avx2 && backend_available(b)) return *avx2::table_f64();
  return scalar::table_f64();
}

template <>
const KernelTable<float>& kernels_for<float>(Backend b) {
  if (b == Backend::avx2 && backend_available(b)) return *avx2::table_f32();
  return scalar::table_f32();
}

}  // namespace dman::simd
