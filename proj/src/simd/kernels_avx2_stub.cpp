// Linked instead of kernels_avx2.cpp when the target is not x86-64.
#include "dman/simd/kernels.hpp"

namespace dman::simd::avx2 {

const KernelTable<double>* table_f64() { return nullptr; }
const KernelTable<float>* table_f32() { return nullptr; }

}  // namespace dman::simd::avx2
