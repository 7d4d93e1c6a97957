#include "dman/simd/kernels.hpp"

namespace dman::simd::scalar {
namespace {

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
void mul(const T* a, const T* b, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

template <typename T>
void mul_acc(const T* a, const T* b, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a[i] * b[i];
}

template <typename T>
void add_acc(const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

template <typename T>
constexpr KernelTable<T> make_table() {
  return {&dot<T>, &axpy<T>, &mul<T>, &mul_acc<T>, &add_acc<T>};
}

constexpr KernelTable<double> kF64 = make_table<double>();
constexpr KernelTable<float> kF32 = make_table<float>();

}  // namespace

const KernelTable<double>& table_f64() { return kF64; }
const KernelTable<float>& table_f32() { return kF32; }

}  // namespace dman::simd::scalar
