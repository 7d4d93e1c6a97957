#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dman/autodiff/tensor.hpp"
#include "dman/corpus/embeddings.hpp"
#include "dman/corpus/tagging.hpp"
#include "dman/corpus/types.hpp"
#include "dman/dmp/encoder.hpp"
#include "dman/io/checkpoint.hpp"
#include "dman/layers/char_cnn.hpp"
#include "dman/layers/lstm.hpp"
#include "dman/rng.hpp"

namespace dman {

struct DMANConfig {
  std::size_t hidden = 300;
  std::size_t char_dim = 16;
  std::size_t char_filters = 50;
  std::size_t char_width = 3;
  std::size_t pos_dim = 30;
  std::size_t ner_dim = 10;

  bool use_encoder = true;
  bool use_char = true;
  bool use_pos = true;
  bool use_ner = true;
  bool use_em = true;
  // Classify from r_p * r_h with a linear head only.
  bool only_encoder = false;
  // Use A directly as attention weights instead of softmax-normalizing it.
  bool raw_attention = false;

  Real lambda = 0.2;
  Real keep_prob = 0.9;
  Real keep_decay = 0.97;
  std::size_t decay_steps = 5000;
  Real keep_floor = 0.5;

  Real init_range = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static DMANConfig from_json(const nlohmann::json& j);
  // Everything that determines parameter shapes.
  bool same_architecture(const DMANConfig& other) const;
};

struct DMANParams {
  EmbeddingTable words;  // frozen
  CharCNNWeights chars;
  Tensor pos;  // [|POS|, pos_dim]
  Tensor ner;  // [|NER|, ner_dim]
  EncoderParams sentence_encoder;

  LSTMWeights input_fwd, input_bwd;  // encoding layer
  Tensor v1;                         // [14h]: p, u, p*u, r_p, r_h segments
  Tensor ff_w, ff_b;                 // local inference, [2h, 8h] and [2h]
  LSTMWeights model_p_fwd, model_p_bwd;
  LSTMWeights model_h_fwd, model_h_bwd;
  Tensor v2, v3;  // [2h] pooling vectors
  Tensor w_out;   // [3, 10h], no bias

  Tensor oe_w, oe_b;  // only-encoder head, [3, 4h] and [3]
};

struct DMANModel {
  DMANConfig config;
  TagVocabs tags;
  DMANParams params;

  // Width of f_rep(x).
  std::size_t input_width() const;
  // Every trainable tensor the configuration uses, with stable names.
  NamedTensors trainable() const;
  std::vector<Tensor> trainable_tensors() const;
  std::size_t parameter_count() const;

  // Word/char/tag ids and exact-match flags for this model's vocabularies.
  void prepare(NLIExample& ex, const std::vector<TagRow>* sidecar = nullptr) const;
};

// Word table is taken as is (frozen). Without `encoder`, a randomly
// initialized sentence encoder is used when config.use_encoder is set.
DMANModel make_model(const DMANConfig& cfg, EmbeddingTable words, TagVocabs tags,
                     const std::optional<EncoderParams>& encoder = std::nullopt);

// Deep copy of every trainable tensor; the frozen word table stays shared.
DMANModel clone_model(const DMANModel& m);

// Dropout state for one forward pass. Each dropout site draws a fresh seed.
struct DropoutCtx {
  bool training = false;
  Real keep = 1;
  Rng* rng = nullptr;

  Tensor apply(const Tensor& x) const;
  static DropoutCtx eval() { return {}; }
};

Tensor feature_rep(const DMANModel& m, const TokenizedSentence& s);  // [T, input_width]

struct EncodedPair {
  Tensor p;  // [n, 2h]
  Tensor u;  // [m, 2h]
};
EncodedPair encode_inputs(const DMANModel& m, const NLIExample& ex, const DropoutCtx& drop);

// r_p and r_h, zeros of width 4h when the encoder is disabled.
std::pair<Tensor, Tensor> sentence_reprs(const DMANModel& m, const NLIExample& ex);

// A_ij = v1 . [p_i; u_j; p_i * u_j; r_p; r_h], [n, m].
Tensor similarity_matrix(const Tensor& v1, const Tensor& p, const Tensor& u, const Tensor& r_p, const Tensor& r_h);

struct Attended {
  Tensor u_tilde;  // [n, 2h]
  Tensor p_tilde;  // [m, 2h]
};
Attended attend(const Tensor& A, const Tensor& p, const Tensor& u, bool raw = false);

// relu(W_f [x; xt; x - xt; x * xt] + b_f) per row.
Tensor local_inference(const Tensor& ff_w, const Tensor& ff_b, const Tensor& x, const Tensor& x_tilde);

struct Pooled {
  Tensor p_m;  // [2h]
  Tensor u_m;  // [2h]
};
Pooled model_and_pool(const DMANParams& params, const Tensor& p_hat, const Tensor& u_hat, const DropoutCtx& drop);

// [p_m; u_m; p_m * u_m; r_p * r_h]
Tensor output_features(const Tensor& p_m, const Tensor& u_m, const Tensor& r_p, const Tensor& r_h);
Tensor predict(const Tensor& w_out, const Tensor& features);  // softmax(W f)

struct ForwardResult {
  Tensor probs;   // [3]
  Tensor logits;  // [3]
  Tensor A;       // [n, m]; empty for the only-encoder variant
};
ForwardResult forward(const DMANModel& m, const NLIExample& ex, const DropoutCtx& drop);

// Eval-mode probabilities as plain numbers.
std::vector<Real> predict_probs(const DMANModel& m, const NLIExample& ex);

struct AttentionDump {
  std::vector<std::string> premise_tokens;
  std::vector<std::string> hypothesis_tokens;
  std::vector<std::vector<Real>> raw;
  std::vector<std::vector<Real>> row_normalized;
  std::vector<std::vector<Real>> col_normalized;

  nlohmann::json to_json() const;
};
AttentionDump dump_attention(const DMANModel& m, const NLIExample& ex);

Checkpoint model_checkpoint(const DMANModel& m);
DMANModel load_model(const Checkpoint& ckpt);

}  // namespace dman
