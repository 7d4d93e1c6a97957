#include "dman/layers/attention_pool.hpp"

#include "dman/autodiff/ops.hpp"

namespace dman {

Tensor attention_pool_weights(const AttentionPoolWeights& w, const Tensor& states) {
  if (states.rank() != 2 || states.dim(0) == 0)
    throw DimensionError("attention_pool: expected nonempty [T, d] states, got " + shape_str(states.shape()));
  if (w.v.rank() != 1 || w.v.dim(0) != states.dim(1))
    throw DimensionError("attention_pool: scoring vector " + shape_str(w.v.shape()) + " does not match states " +
                         shape_str(states.shape()));
  Tensor scores = ops::matmul_nt(states, ops::reshape(w.v, {1, w.v.dim(0)}));  // [T, 1]
  return ops::reshape(ops::softmax(scores, 0), {states.dim(0)});
}

Tensor attention_pool(const AttentionPoolWeights& w, const Tensor& states) {
  Tensor a = attention_pool_weights(w, states);
  Tensor pooled = ops::matmul(ops::reshape(a, {1, states.dim(0)}), states);  // [1, d]
  return ops::reshape(pooled, {states.dim(1)});
}

}  // namespace dman
