#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dman/autodiff/tensor.hpp"
#include "dman/corpus/embeddings.hpp"
#include "dman/corpus/types.hpp"
#include "dman/io/checkpoint.hpp"
#include "dman/layers/lstm.hpp"
#include "dman/rng.hpp"

namespace dman {

// Bidirectional LSTM shared by both sentences of a pair.
struct EncoderParams {
  LSTMWeights fwd;
  LSTMWeights bwd;

  std::size_t hidden() const { return fwd.hidden(); }
  std::size_t input_dim() const { return fwd.input_dim(); }
  std::size_t repr_dim() const { return 4 * hidden(); }
  std::size_t parameter_count() const { return fwd.parameter_count() + bwd.parameter_count(); }
  std::vector<Tensor> tensors() const;
  NamedTensors named(const std::string& prefix) const;

  static EncoderParams init(std::size_t input_dim, std::size_t hidden, Rng& rng);
  static EncoderParams zeros(std::size_t input_dim, std::size_t hidden);
};

// Linear projection of the pair features onto the marker set.
struct DMPHead {
  Tensor w;  // [markers, 16h]
  Tensor b;  // [markers]

  std::size_t markers() const { return w.dim(0); }
  std::vector<Tensor> tensors() const { return {w, b}; }

  static DMPHead init(std::size_t markers, std::size_t input_dim, Rng& rng);
  static DMPHead zeros(std::size_t markers, std::size_t input_dim);
};

// Rows of the word table for each token, [T, d]. Uses s.word_ids when set.
Tensor embed_words(const EmbeddingTable& words, const TokenizedSentence& s);

// [max_t fwd; max_t bwd; fwd at the last position; bwd at the first position], width 4h.
Tensor encode_sentence(const EncoderParams& p, const Tensor& xs);
Tensor encode_sentence(const EncoderParams& p, const TokenizedSentence& s, const EmbeddingTable& words);

// [r1; r2; r1 + r2; r1 * r2]
Tensor pair_features(const Tensor& r1, const Tensor& r2);

Tensor dmp_logits(const DMPHead& head, const Tensor& r);
Tensor dmp_forward(const DMPHead& head, const Tensor& r);

struct DMPConfig {
  std::size_t hidden = 32;
  std::size_t epochs = 10;
  std::size_t batch_size = 1;
  Real lr = 0.1;
  Real keep_prob = 0.8;  // dropout on the pair features
  Real init_range = 0.08;
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static DMPConfig from_json(const nlohmann::json& j);
};

struct DMPModel {
  std::vector<std::string> markers;
  EmbeddingTable words;
  EncoderParams encoder;
  DMPHead head;
  DMPConfig config;

  std::vector<Tensor> trainable() const;
};

struct DMPEpoch {
  std::size_t epoch = 0;
  Real lr = 0;
  double train_loss = 0;
  double val_acc = 0;
};

struct DMPResult {
  DMPModel model;  // best validation epoch
  std::vector<DMPEpoch> log;
  std::size_t best_epoch = 0;
  double best_val_acc = 0;
};

// Learning rate in effect after each epoch: halved whenever that epoch's
// validation accuracy is below the previous epoch's.
std::vector<Real> lr_schedule(const std::vector<double>& val_accs, Real lr0);

// Mean negative log-likelihood of the marker for one pair; training applies dropout.
Tensor dmp_loss(const DMPModel& m, const MarkerPair& pair, bool training, std::uint64_t dropout_seed);
std::size_t dmp_predict(const DMPModel& m, const MarkerPair& pair);
double dmp_accuracy(const DMPModel& m, const std::vector<MarkerPair>& pairs);

// Word embeddings stay frozen; encoder and head train with SGD.
DMPResult train_dmp(const std::vector<MarkerPair>& train, const std::vector<MarkerPair>& val, EmbeddingTable words,
                    const std::vector<std::string>& markers, const DMPConfig& cfg,
                    const std::function<void(const DMPEpoch&)>& on_epoch = {});

Checkpoint dmp_checkpoint(const DMPModel& m);
void export_encoder(const std::string& path, const DMPModel& m);
DMPModel load_dmp_model(const Checkpoint& ckpt);

// Encoder weights from a checkpoint; throws DimensionError naming both sizes
// when the checkpoint hidden size differs from `expected_hidden`.
EncoderParams import_encoder(const Checkpoint& ckpt, std::size_t expected_hidden);

// Helpers shared with the NLI checkpoints.
void add_vocab(Checkpoint& ckpt, const std::string& name, const Vocab& v);
Vocab vocab_from(const Checkpoint& ckpt, const std::string& name);
Tensor clone_param(const Tensor& t);

}  // namespace dman
