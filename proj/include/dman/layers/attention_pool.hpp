#pragma once

#include "dman/autodiff/tensor.hpp"

namespace dman {

struct AttentionPoolWeights {
  Tensor v;  // [d]
};

// Softmax over positions of v . state_i, then the weighted sum of the states.
// states is [T, d]; returns [d].
Tensor attention_pool(const AttentionPoolWeights& w, const Tensor& states);

// The position weights alone, [T].
Tensor attention_pool_weights(const AttentionPoolWeights& w, const Tensor& states);

}  // namespace dman
