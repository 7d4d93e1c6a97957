#include "dman/layers/char_cnn.hpp"

#include <algorithm>

#include "dman/autodiff/ops.hpp"
#include "dman/layers/init.hpp"

namespace dman {

CharCNNWeights CharCNNWeights::init(std::size_t charset, std::size_t char_dim, std::size_t filters,
                                    std::size_t width, Rng& rng) {
  if (width == 0 || filters == 0) throw std::invalid_argument("char CNN needs width >= 1 and filters >= 1");
  CharCNNWeights w;
  w.embedding = uniform_param({charset, char_dim}, 0.08, rng);
  w.filters = uniform_param({filters, width * char_dim}, 0.08, rng);
  w.bias = zero_param({filters});
  w.width = width;
  return w;
}

Tensor char_cnn(const CharCNNWeights& w, const std::vector<std::size_t>& chars) {
  std::size_t len = chars.size();
  while (len > 0 && chars[len - 1] == kPadChar) --len;
  if (len == 0) throw std::invalid_argument("char_cnn: word has no characters");
  const std::size_t charset = w.embedding.dim(0);
  std::vector<std::size_t> ids(std::max(len, w.width), kPadChar);
  for (std::size_t i = 0; i < len; ++i) ids[i] = chars[i] < charset ? chars[i] : kUnkChar;
  const std::size_t f = w.filter_count();
  Tensor emb = ops::gather_rows(w.embedding, ids);
  Tensor win = ops::windows(emb, w.width);
  Tensor conv = ops::add(ops::matmul_nt(win, w.filters), ops::expand(ops::reshape(w.bias, {1, f}), 0, win.dim(0)));
  return ops::max_over_axis(ops::relu(conv), 0);
}

Tensor char_cnn_words(const CharCNNWeights& w, const std::vector<std::vector<std::size_t>>& words) {
  if (words.empty()) throw std::invalid_argument("char_cnn_words: empty sentence");
  std::vector<Tensor> rows;
  rows.reserve(words.size());
  for (const auto& word : words) rows.push_back(ops::reshape(char_cnn(w, word), {1, w.filter_count()}));
  return rows.size() == 1 ? rows[0] : ops::concat(rows, 0);
}

}  // namespace dman
