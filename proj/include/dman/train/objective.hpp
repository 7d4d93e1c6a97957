#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "dman/autodiff/tensor.hpp"
#include "dman/corpus/types.hpp"
#include "dman/rng.hpp"

namespace dman {

inline constexpr Real kProbFloor = 1e-12;

// count(l in ann) / |ann|; throws std::invalid_argument on an empty list.
Real reward(Label l, const std::vector<std::string>& ann);
std::array<Real, kNumLabels> rewards(const std::vector<std::string>& ann);

// -log d[gold], with d[gold] clamped at kProbFloor. Sets *clamped when the clamp was active.
Tensor ce_loss(const Tensor& d, Label gold, bool* clamped = nullptr);

// Mean of rank-0 losses.
Tensor mean_loss(const std::vector<Tensor>& losses);

// -sum_l d_l R(l, ann), the expectation by enumeration of the three labels.
Tensor rl_loss_exact(const Tensor& d, const std::vector<std::string>& ann);

struct SampledRL {
  // Differentiable surrogate whose gradient is the score-function estimate
  // -(1/k) sum_s (R(l_s) - b) grad log d[l_s].
  Tensor surrogate;
  // -(1/k) sum_s R(l_s)
  double estimate = 0;
  std::vector<std::size_t> samples;
};

// Draws k labels from d. With `baseline`, b is the mean reward of the k draws.
SampledRL rl_loss_sampled(const Tensor& d, const std::vector<std::string>& ann, std::size_t k, Rng& rng,
                          bool baseline = false);

// lambda * ce + (1 - lambda) * rl. lambda = 1 returns ce itself and
// lambda = 0 returns rl itself, so the other term may be an empty tensor.
Tensor combined_loss(const Tensor& ce, const Tensor& rl, Real lambda);

// clamp(keep0 * decay^floor(step / every), floor, 1)
Real dropout_keep(std::size_t step, Real keep0 = 0.9, Real decay = 0.97, std::size_t every = 5000, Real floor = 0.5);

}  // namespace dman
