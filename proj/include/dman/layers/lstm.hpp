#pragma once

#include <cstddef>
#include <vector>

#include "dman/autodiff/tensor.hpp"
#include "dman/rng.hpp"

namespace dman {

// Standard LSTM cell parameters; gate blocks are stacked in the order
// input, forget, cell, output along the 4h rows.
struct LSTMWeights {
  Tensor w_ih;  // [4h, d_in]
  Tensor w_hh;  // [4h, h]
  Tensor bias;  // [4h]

  std::size_t hidden() const { return w_hh.dim(1); }
  std::size_t input_dim() const { return w_ih.dim(1); }
  std::size_t parameter_count() const { return w_ih.numel() + w_hh.numel() + bias.numel(); }
  std::vector<Tensor> tensors() const { return {w_ih, w_hh, bias}; }

  // Throws DimensionError unless the three tensors agree on h and 4h.
  void validate() const;

  // Uniform [-0.08, 0.08] weights, forget-gate bias 1, other biases 0.
  static LSTMWeights init(std::size_t input_dim, std::size_t hidden, Rng& rng);
  static LSTMWeights zeros(std::size_t input_dim, std::size_t hidden);
};

struct LSTMState {
  Tensor h;  // [1, h]
  Tensor c;  // [1, h]

  static LSTMState zeros(std::size_t hidden);
};

// One step of the cell. x_t is [d_in] or [1, d_in].
LSTMState lstm_step(const LSTMWeights& w, const Tensor& x_t, const LSTMState& prev);

struct BiLSTMOutput {
  Tensor forward;   // [T, h], row i is the forward state after reading x_0..x_i
  Tensor backward;  // [T, h], row i is the backward state after reading x_{T-1}..x_i

  Tensor combined() const;  // [T, 2h]
};

// Runs both directions over xs [T, d_in]; throws on an empty sequence.
BiLSTMOutput bilstm_directional(const LSTMWeights& fwd, const LSTMWeights& bwd, const Tensor& xs);

inline Tensor bilstm(const LSTMWeights& fwd, const LSTMWeights& bwd, const Tensor& xs) {
  return bilstm_directional(fwd, bwd, xs).combined();
}

}  // namespace dman
