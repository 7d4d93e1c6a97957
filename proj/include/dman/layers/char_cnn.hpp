#pragma once

#include <cstddef>
#include <vector>

#include "dman/autodiff/tensor.hpp"
#include "dman/rng.hpp"

namespace dman {

// Character ids: 0 is the pad character, 1 the unknown character.
inline constexpr std::size_t kPadChar = 0;
inline constexpr std::size_t kUnkChar = 1;

struct CharCNNWeights {
  Tensor embedding;  // [charset, d_c]
  Tensor filters;    // [f, width * d_c]
  Tensor bias;       // [f]
  std::size_t width = 3;

  std::size_t filter_count() const { return filters.dim(0); }
  std::size_t char_dim() const { return embedding.dim(1); }
  std::size_t parameter_count() const { return embedding.numel() + filters.numel() + bias.numel(); }
  std::vector<Tensor> tensors() const { return {embedding, filters, bias}; }

  static CharCNNWeights init(std::size_t charset, std::size_t char_dim, std::size_t filters,
                             std::size_t width, Rng& rng);
};

// Convolution over the character embeddings of one word, ReLU, then max over
// window positions. Words shorter than the filter width are padded; trailing
// pad characters never open a window of their own. Ids beyond the charset map
// to the unknown character. Returns [f].
Tensor char_cnn(const CharCNNWeights& w, const std::vector<std::size_t>& chars);

// char_cnn for every word of a sentence, stacked to [T, f].
Tensor char_cnn_words(const CharCNNWeights& w, const std::vector<std::vector<std::size_t>>& words);

}  // namespace dman
