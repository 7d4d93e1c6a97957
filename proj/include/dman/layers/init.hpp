#pragma once

#include "dman/autodiff/tensor.hpp"
#include "dman/rng.hpp"

namespace dman {

// Trainable tensor filled uniformly in [-range, range].
Tensor uniform_param(Shape shape, Real range, Rng& rng);

inline Tensor zero_param(Shape shape) { return Tensor::zeros(std::move(shape), true); }

}  // namespace dman
