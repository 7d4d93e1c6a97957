#pragma once

#include "dman/autodiff/tensor.hpp"

namespace dman {

// relu(W x + b). W is [out, in], b is [out]; x is [in] or a stack [T, in].
Tensor feed_forward_relu(const Tensor& W, const Tensor& b, const Tensor& x);

// W x + b without the nonlinearity, same shape rules.
Tensor affine(const Tensor& W, const Tensor& b, const Tensor& x);

}  // namespace dman
