#pragma once

#include <cstddef>
#include <string_view>

namespace dman::simd {

// Inner-loop primitives used by the tensor ops. Every backend implements the
// same contract; results may differ from the scalar reference only by
// floating-point reassociation inside dot().
template <typename T>
struct KernelTable {
  // sum_i a[i] * b[i]
  T (*dot)(const T* a, const T* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(T alpha, const T* x, T* y, std::size_t n);
  // out[i] = a[i] * b[i]
  void (*mul)(const T* a, const T* b, T* out, std::size_t n);
  // y[i] += a[i] * b[i]
  void (*mul_acc)(const T* a, const T* b, T* y, std::size_t n);
  // y[i] += x[i]
  void (*add_acc)(const T* x, T* y, std::size_t n);
};

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b);

// True when the CPU (and the build) can run the backend.
bool backend_available(Backend b);

// Backend picked at startup: the best available one, unless the environment
// variable DMAN_KERNELS=scalar forces the reference path.
Backend active_backend();

// Override the active backend. Throws std::invalid_argument if unavailable.
void set_active_backend(Backend b);

template <typename T>
const KernelTable<T>& kernels_for(Backend b);

template <typename T>
const KernelTable<T>& kernels() {
  return kernels_for<T>(active_backend());
}

namespace scalar {
const KernelTable<double>& table_f64();
const KernelTable<float>& table_f32();
}  // namespace scalar

namespace avx2 {
// Null when the build did not compile the AVX2 translation unit.
const KernelTable<double>* table_f64();
const KernelTable<float>* table_f32();
}  // namespace avx2

}  // namespace dman::simd
