#pragma once

#include <cstddef>
#include <string>

#include "dman/autodiff/tensor.hpp"
#include "dman/corpus/vocab.hpp"
#include "dman/rng.hpp"

namespace dman {

struct EmbeddingTable {
  Vocab vocab;
  Tensor matrix;  // [|V|, d]
  bool trainable = false;

  std::size_t dim() const { return matrix.dim(1); }
  std::size_t rows() const { return matrix.dim(0); }
  void validate() const;
};

enum class VocabMode { build_from_file, project_onto };

// build_from_file: every file token enters the vocab.
// project_onto: only tokens of `target` that occur in the file are kept, so
// everything else maps to UNK. PAD is zeros and UNK is the mean of all file rows.
EmbeddingTable load_embeddings(const std::string& path, VocabMode mode, const Vocab* target = nullptr);
void write_embeddings(const std::string& path, const EmbeddingTable& table);

// Rows uniform in [-range, range]; PAD row zero.
EmbeddingTable random_embeddings(const Vocab& vocab, std::size_t dim, Real range, Rng& rng, bool trainable);

// New table whose vocab is `table.vocab` plus `extra`; existing rows are kept,
// new rows are drawn like random_embeddings.
EmbeddingTable extend_embeddings(const EmbeddingTable& table, const std::vector<std::string>& extra, Real range,
                                 Rng& rng);

}  // namespace dman
