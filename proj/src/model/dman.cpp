#include "dman/model/dman.hpp"

#include <cmath>
#include <stdexcept>

#include "dman/autodiff/ops.hpp"
#include "dman/autodiff/tape.hpp"
#include "dman/corpus/featurize.hpp"
#include "dman/corpus/text.hpp"
#include "dman/errors.hpp"
#include "dman/layers/attention_pool.hpp"
#include "dman/layers/feed_forward.hpp"
#include "dman/layers/init.hpp"

namespace dman {

void DMANConfig::validate() const {
  if (hidden == 0) throw ConfigError("hidden size must be positive");
  if (use_char && (char_dim == 0 || char_filters == 0 || char_width == 0)) {
    throw ConfigError("char CNN dimensions must be positive");
  }
  if (use_pos && pos_dim == 0) throw ConfigError("pos_dim must be positive");
  if (use_ner && ner_dim == 0) throw ConfigError("ner_dim must be positive");
  if (only_encoder && !use_encoder) throw ConfigError("only_encoder requires use_encoder");
  if (!(lambda >= 0 && lambda <= 1)) throw ConfigError("lambda must be in [0, 1], got " + std::to_string(lambda));
  if (!(keep_prob > 0 && keep_prob <= 1)) throw ConfigError("keep_prob must be in (0, 1]");
  if (!(keep_floor > 0 && keep_floor <= 1)) throw ConfigError("keep_floor must be in (0, 1]");
  if (!(keep_decay > 0 && keep_decay <= 1)) throw ConfigError("keep_decay must be in (0, 1]");
  if (decay_steps == 0) throw ConfigError("decay_steps must be positive");
  if (!(init_range > 0)) throw ConfigError("init_range must be positive");
}

nlohmann::json DMANConfig::to_json() const {
  return {{"hidden", hidden},
          {"char_dim", char_dim},
          {"char_filters", char_filters},
          {"char_width", char_width},
          {"pos_dim", pos_dim},
          {"ner_dim", ner_dim},
          {"use_encoder", use_encoder},
          {"use_char", use_char},
          {"use_pos", use_pos},
          {"use_ner", use_ner},
          {"use_em", use_em},
          {"only_encoder", only_encoder},
          {"raw_attention", raw_attention},
          {"lambda", lambda},
          {"keep_prob", keep_prob},
          {"keep_decay", keep_decay},
          {"decay_steps", decay_steps},
          {"keep_floor", keep_floor},
          {"init_range", init_range},
          {"seed", seed}};
}

DMANConfig DMANConfig::from_json(const nlohmann::json& j) {
  DMANConfig c;
  c.hidden = j.value("hidden", c.hidden);
  c.char_dim = j.value("char_dim", c.char_dim);
  c.char_filters = j.value("char_filters", c.char_filters);
  c.char_width = j.value("char_width", c.char_width);
  c.pos_dim = j.value("pos_dim", c.pos_dim);
  c.ner_dim = j.value("ner_dim", c.ner_dim);
  c.use_encoder = j.value("use_encoder", c.use_encoder);
  c.use_char = j.value("use_char", c.use_char);
  c.use_pos = j.value("use_pos", c.use_pos);
  c.use_ner = j.value("use_ner", c.use_ner);
  c.use_em = j.value("use_em", c.use_em);
  c.only_encoder = j.value("only_encoder", c.only_encoder);
  c.raw_attention = j.value("raw_attention", c.raw_attention);
  c.lambda = j.value("lambda", c.lambda);
  c.keep_prob = j.value("keep_prob", c.keep_prob);
  c.keep_decay = j.value("keep_decay", c.keep_decay);
  c.decay_steps = j.value("decay_steps", c.decay_steps);
  c.keep_floor = j.value("keep_floor", c.keep_floor);
  c.init_range = j.value("init_range", c.init_range);
  c.seed = j.value("seed", c.seed);
  return c;
}

bool DMANConfig::same_architecture(const DMANConfig& o) const {
  return hidden == o.hidden && char_dim == o.char_dim && char_filters == o.char_filters &&
         char_width == o.char_width && pos_dim == o.pos_dim && ner_dim == o.ner_dim && use_encoder == o.use_encoder &&
         use_char == o.use_char && use_pos == o.use_pos && use_ner == o.use_ner && use_em == o.use_em &&
         only_encoder == o.only_encoder && raw_attention == o.raw_attention;
}

std::size_t DMANModel::input_width() const {
  const auto& c = config;
  return params.words.dim() + (c.use_char ? c.char_filters : 0) + (c.use_pos ? c.pos_dim : 0) +
         (c.use_ner ? c.ner_dim : 0) + (c.use_em ? 3 : 0);
}

namespace {

void add_lstm(NamedTensors& out, const std::string& prefix, const LSTMWeights& w) {
  out.emplace_back(prefix + ".w_ih", w.w_ih);
  out.emplace_back(prefix + ".w_hh", w.w_hh);
  out.emplace_back(prefix + ".bias", w.bias);
}

Tensor glorot(std::size_t out, std::size_t in, Rng& rng) {
  return uniform_param({out, in}, std::sqrt(Real(6) / static_cast<Real>(out + in)), rng);
}

EncoderParams clone_encoder(const EncoderParams& e) {
  auto c = [](const LSTMWeights& w) { return LSTMWeights{clone_param(w.w_ih), clone_param(w.w_hh), clone_param(w.bias)}; };
  EncoderParams out{c(e.fwd), c(e.bwd)};
  for (auto& t : out.tensors()) t.set_requires_grad(true);
  return out;
}

}  // namespace

NamedTensors DMANModel::trainable() const {
  const auto& c = config;
  const auto& p = params;
  NamedTensors out;
  if (c.use_encoder) {
    for (auto& nt : p.sentence_encoder.named("encoder.")) out.push_back(nt);
  }
  if (c.only_encoder) {
    out.emplace_back("only.w", p.oe_w);
    out.emplace_back("only.b", p.oe_b);
    return out;
  }
  if (c.use_char) {
    out.emplace_back("char.embedding", p.chars.embedding);
    out.emplace_back("char.filters", p.chars.filters);
    out.emplace_back("char.bias", p.chars.bias);
  }
  if (c.use_pos) out.emplace_back("pos", p.pos);
  if (c.use_ner) out.emplace_back("ner", p.ner);
  add_lstm(out, "input.fwd", p.input_fwd);
  add_lstm(out, "input.bwd", p.input_bwd);
  out.emplace_back("v1", p.v1);
  out.emplace_back("ff.w", p.ff_w);
  out.emplace_back("ff.b", p.ff_b);
  add_lstm(out, "model_p.fwd", p.model_p_fwd);
  add_lstm(out, "model_p.bwd", p.model_p_bwd);
  add_lstm(out, "model_h.fwd", p.model_h_fwd);
  add_lstm(out, "model_h.bwd", p.model_h_bwd);
  out.emplace_back("v2", p.v2);
  out.emplace_back("v3", p.v3);
  out.emplace_back("out.w", p.w_out);
  return out;
}

std::vector<Tensor> DMANModel::trainable_tensors() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : trainable()) out.push_back(t);
  return out;
}

std::size_t DMANModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : trainable()) n += t.numel();
  return n;
}

void DMANModel::prepare(NLIExample& ex, const std::vector<TagRow>* sidecar) const {
  featurize(ex, params.words.vocab, tags, sidecar);
}

DMANModel make_model(const DMANConfig& cfg, EmbeddingTable words, TagVocabs tags,
                     const std::optional<EncoderParams>& encoder) {
  cfg.validate();
  words.validate();
  const std::size_t h = cfg.hidden;
  const Rng root(cfg.seed);
  auto rng_for = [&](const std::string& name) { return root.substream("init." + name); };

  DMANModel m;
  m.config = cfg;
  m.tags = std::move(tags);
  auto& p = m.params;
  p.words = std::move(words);
  p.words.matrix = p.words.matrix.detach();
  p.words.trainable = false;

  if (cfg.use_encoder) {
    if (encoder) {
      if (encoder->hidden() != h) {
        throw DimensionError("encoder has hidden size " + std::to_string(encoder->hidden()) + ", model expects " +
                             std::to_string(h));
      }
      if (encoder->input_dim() != p.words.dim()) {
        throw DimensionError("encoder expects word dim " + std::to_string(encoder->input_dim()) +
                             ", word table has " + std::to_string(p.words.dim()));
      }
      p.sentence_encoder = clone_encoder(*encoder);
    } else {
      auto r = rng_for("encoder");
      p.sentence_encoder = EncoderParams::init(p.words.dim(), h, r);
    }
  }
  if (cfg.only_encoder) {
    auto r = rng_for("only");
    p.oe_w = glorot(kNumLabels, 4 * h, r);
    p.oe_b = zero_param({kNumLabels});
    return m;
  }
  if (cfg.use_char) {
    auto r = rng_for("char");
    p.chars = CharCNNWeights::init(kCharsetSize, cfg.char_dim, cfg.char_filters, cfg.char_width, r);
  }
  if (cfg.use_pos) {
    auto r = rng_for("pos");
    p.pos = uniform_param({m.tags.pos.size(), cfg.pos_dim}, cfg.init_range, r);
  }
  if (cfg.use_ner) {
    auto r = rng_for("ner");
    p.ner = uniform_param({m.tags.ner.size(), cfg.ner_dim}, cfg.init_range, r);
  }
  const std::size_t d_in = m.input_width();
  {
    auto r = rng_for("input");
    p.input_fwd = LSTMWeights::init(d_in, h, r);
    p.input_bwd = LSTMWeights::init(d_in, h, r);
  }
  {
    auto r = rng_for("v1");
    p.v1 = uniform_param({14 * h}, cfg.init_range, r);
  }
  {
    auto r = rng_for("ff");
    p.ff_w = glorot(2 * h, 8 * h, r);
    p.ff_b = zero_param({2 * h});
  }
  {
    auto r = rng_for("model");
    p.model_p_fwd = LSTMWeights::init(2 * h, h, r);
    p.model_p_bwd = LSTMWeights::init(2 * h, h, r);
    p.model_h_fwd = LSTMWeights::init(2 * h, h, r);
    p.model_h_bwd = LSTMWeights::init(2 * h, h, r);
  }
  {
    auto r = rng_for("pool");
    p.v2 = uniform_param({2 * h}, cfg.init_range, r);
    p.v3 = uniform_param({2 * h}, cfg.init_range, r);
  }
  {
    auto r = rng_for("out");
    p.w_out = glorot(kNumLabels, 10 * h, r);
  }
  return m;
}

DMANModel clone_model(const DMANModel& m) {
  DMANModel c = m;
  auto& p = c.params;
  auto copy = [](Tensor& t) {
    if (t.defined()) t = clone_param(t);
  };
  auto copy_lstm = [&](LSTMWeights& w) {
    copy(w.w_ih);
    copy(w.w_hh);
    copy(w.bias);
  };
  copy(p.chars.embedding);
  copy(p.chars.filters);
  copy(p.chars.bias);
  copy(p.pos);
  copy(p.ner);
  copy_lstm(p.sentence_encoder.fwd);
  copy_lstm(p.sentence_encoder.bwd);
  copy_lstm(p.input_fwd);
  copy_lstm(p.input_bwd);
  copy(p.v1);
  copy(p.ff_w);
  copy(p.ff_b);
  copy_lstm(p.model_p_fwd);
  copy_lstm(p.model_p_bwd);
  copy_lstm(p.model_h_fwd);
  copy_lstm(p.model_h_bwd);
  copy(p.v2);
  copy(p.v3);
  copy(p.w_out);
  copy(p.oe_w);
  copy(p.oe_b);
  return c;
}

Tensor DropoutCtx::apply(const Tensor& x) const {
  if (!training || keep >= 1) return x;
  if (!rng) throw std::logic_error("training dropout needs an rng");
  return ops::dropout(x, keep, true, rng->next_u64());
}

Tensor feature_rep(const DMANModel& m, const TokenizedSentence& s) {
  if (s.empty()) throw std::invalid_argument("empty sentence");
  if (!s.featurized() || s.em.size() != s.size()) {
    throw std::logic_error("sentence \"" + s.text + "\" has not been prepared for this model");
  }
  const auto& c = m.config;
  const auto& p = m.params;
  const std::size_t T = s.size();
  std::vector<Tensor> parts = {ops::gather_rows(p.words.matrix, s.word_ids)};
  if (c.use_char) parts.push_back(char_cnn_words(p.chars, s.char_ids));
  if (c.use_pos) parts.push_back(ops::gather_rows(p.pos, s.pos_ids));
  if (c.use_ner) parts.push_back(ops::gather_rows(p.ner, s.ner_ids));
  if (c.use_em) {
    std::vector<Real> em;
    em.reserve(3 * T);
    for (const auto& f : s.em) {
      for (bool b : f) em.push_back(b ? 1 : 0);
    }
    parts.push_back(Tensor({T, 3}, std::move(em)));
  }
  return parts.size() == 1 ? parts[0] : ops::concat(parts, 1);
}

EncodedPair encode_inputs(const DMANModel& m, const NLIExample& ex, const DropoutCtx& drop) {
  const auto& p = m.params;
  return {bilstm(p.input_fwd, p.input_bwd, drop.apply(feature_rep(m, ex.premise))),
          bilstm(p.input_fwd, p.input_bwd, drop.apply(feature_rep(m, ex.hypothesis)))};
}

std::pair<Tensor, Tensor> sentence_reprs(const DMANModel& m, const NLIExample& ex) {
  if (!m.config.use_encoder) {
    const std::size_t w = 4 * m.config.hidden;
    return {Tensor::zeros({w}), Tensor::zeros({w})};
  }
  const auto& p = m.params;
  return {encode_sentence(p.sentence_encoder, ex.premise, p.words),
          encode_sentence(p.sentence_encoder, ex.hypothesis, p.words)};
}

Tensor similarity_matrix(const Tensor& v1, const Tensor& p, const Tensor& u, const Tensor& r_p, const Tensor& r_h) {
  if (p.rank() != 2 || u.rank() != 2 || p.dim(1) != u.dim(1)) {
    throw DimensionError("similarity_matrix: p " + shape_str(p.shape()) + ", u " + shape_str(u.shape()));
  }
  const std::size_t n = p.dim(0), m = u.dim(0), w = p.dim(1);
  const std::size_t rp = r_p.numel(), rh = r_h.numel();
  if (v1.rank() != 1 || v1.numel() != 3 * w + rp + rh) {
    throw DimensionError("v1 has shape " + shape_str(v1.shape()) + ", expected (" + std::to_string(3 * w + rp + rh) +
                         ")");
  }
  const auto v_p = ops::reshape(ops::slice(v1, 0, 0, w), {w, 1});
  const auto v_u = ops::reshape(ops::slice(v1, 0, w, w), {1, w});
  const auto v_pu = ops::reshape(ops::slice(v1, 0, 2 * w, w), {1, w});
  const auto v_rp = ops::slice(v1, 0, 3 * w, rp);
  const auto v_rh = ops::slice(v1, 0, 3 * w + rp, rh);

  const auto a = ops::expand(ops::matmul(p, v_p), 1, m);
  const auto b = ops::expand(ops::matmul_nt(v_u, u), 0, n);
  const auto c = ops::matmul_nt(ops::mul(p, ops::expand(v_pu, 0, n)), u);
  // The sentence terms are the same for every (i, j).
  const auto k = ops::add(ops::sum(ops::mul(v_rp, ops::reshape(r_p, {rp}))), ops::sum(ops::mul(v_rh, ops::reshape(r_h, {rh}))));
  const auto K = ops::expand(ops::expand(ops::reshape(k, {1, 1}), 0, n), 1, m);
  return ops::add(ops::add(ops::add(a, b), c), K);
}

Attended attend(const Tensor& A, const Tensor& p, const Tensor& u, bool raw) {
  if (A.rank() != 2 || A.dim(0) != p.dim(0) || A.dim(1) != u.dim(0)) {
    throw DimensionError("attend: A " + shape_str(A.shape()) + ", p " + shape_str(p.shape()) + ", u " +
                         shape_str(u.shape()));
  }
  if (raw) return {ops::matmul(A, u), ops::matmul(ops::transpose(A), p)};
  return {ops::matmul(ops::softmax(A, 1), u), ops::matmul(ops::transpose(ops::softmax(A, 0)), p)};
}

Tensor local_inference(const Tensor& ff_w, const Tensor& ff_b, const Tensor& x, const Tensor& x_tilde) {
  if (x.shape() != x_tilde.shape()) {
    throw DimensionError("local_inference: " + shape_str(x.shape()) + " vs " + shape_str(x_tilde.shape()));
  }
  const std::size_t axis = x.rank() - 1;
  return feed_forward_relu(ff_w, ff_b, ops::concat({x, x_tilde, ops::sub(x, x_tilde), ops::mul(x, x_tilde)}, axis));
}

Pooled model_and_pool(const DMANParams& p, const Tensor& p_hat, const Tensor& u_hat, const DropoutCtx& drop) {
  const auto p_seq = bilstm(p.model_p_fwd, p.model_p_bwd, drop.apply(p_hat));
  const auto u_seq = bilstm(p.model_h_fwd, p.model_h_bwd, drop.apply(u_hat));
  return {attention_pool({p.v2}, p_seq), attention_pool({p.v3}, u_seq)};
}

Tensor output_features(const Tensor& p_m, const Tensor& u_m, const Tensor& r_p, const Tensor& r_h) {
  return ops::concat({p_m, u_m, ops::mul(p_m, u_m), ops::mul(r_p, r_h)}, 0);
}

namespace {

Tensor linear_logits(const Tensor& w, const Tensor& features) {
  if (features.rank() != 1 || w.dim(1) != features.dim(0)) {
    throw DimensionError("output layer expects width " + std::to_string(w.dim(1)) + ", got " +
                         shape_str(features.shape()));
  }
  return ops::reshape(ops::matmul_nt(ops::reshape(features, {1, features.dim(0)}), w), {w.dim(0)});
}

}  // namespace

Tensor predict(const Tensor& w_out, const Tensor& features) { return ops::softmax(linear_logits(w_out, features), 0); }

ForwardResult forward(const DMANModel& m, const NLIExample& ex, const DropoutCtx& drop) {
  const auto& p = m.params;
  ForwardResult out;
  const auto [r_p, r_h] = sentence_reprs(m, ex);
  if (m.config.only_encoder) {
    out.logits = ops::add(linear_logits(p.oe_w, drop.apply(ops::mul(r_p, r_h))), p.oe_b);
  } else {
    const auto enc = encode_inputs(m, ex, drop);
    out.A = similarity_matrix(p.v1, enc.p, enc.u, r_p, r_h);
    const auto att = attend(out.A, enc.p, enc.u, m.config.raw_attention);
    const auto p_hat = local_inference(p.ff_w, p.ff_b, enc.p, att.u_tilde);
    const auto u_hat = local_inference(p.ff_w, p.ff_b, enc.u, att.p_tilde);
    const auto pooled = model_and_pool(p, p_hat, u_hat, drop);
    out.logits = linear_logits(p.w_out, drop.apply(output_features(pooled.p_m, pooled.u_m, r_p, r_h)));
  }
  out.probs = ops::softmax(out.logits, 0);
  return out;
}

std::vector<Real> predict_probs(const DMANModel& m, const NLIExample& ex) {
  NoTapeScope no_tape;
  const auto r = forward(m, ex, DropoutCtx::eval());
  return {r.probs.values().begin(), r.probs.values().end()};
}

namespace {

std::vector<std::vector<Real>> rows_of(const Tensor& t) {
  std::vector<std::vector<Real>> out(t.dim(0), std::vector<Real>(t.dim(1)));
  for (std::size_t i = 0; i < t.dim(0); ++i) {
    for (std::size_t j = 0; j < t.dim(1); ++j) out[i][j] = t.at(i, j);
  }
  return out;
}

}  // namespace

AttentionDump dump_attention(const DMANModel& m, const NLIExample& ex) {
  if (m.config.only_encoder) throw std::invalid_argument("the only-encoder model has no similarity matrix");
  NoTapeScope no_tape;
  const auto r = forward(m, ex, DropoutCtx::eval());
  AttentionDump d;
  d.premise_tokens = ex.premise.tokens;
  d.hypothesis_tokens = ex.hypothesis.tokens;
  d.raw = rows_of(r.A);
  d.row_normalized = rows_of(ops::softmax(r.A, 1));
  d.col_normalized = rows_of(ops::softmax(r.A, 0));
  return d;
}

nlohmann::json AttentionDump::to_json() const {
  return {{"premise_tokens", premise_tokens},
          {"hypothesis_tokens", hypothesis_tokens},
          {"raw", raw},
          {"row_normalized", row_normalized},
          {"col_normalized", col_normalized}};
}

Checkpoint model_checkpoint(const DMANModel& m) {
  Checkpoint ckpt;
  ckpt.hidden = static_cast<std::uint32_t>(m.config.hidden);
  ckpt.config = {{"kind", "dman"}, {"model", m.config.to_json()}, {"word_dim", m.params.words.dim()}};
  add_vocab(ckpt, "words", m.params.words.vocab);
  add_vocab(ckpt, "pos", m.tags.pos);
  add_vocab(ckpt, "ner", m.tags.ner);
  ckpt.add("words", m.params.words.matrix);
  for (const auto& [name, t] : m.trainable()) ckpt.add(name, t);
  return ckpt;
}

DMANModel load_model(const Checkpoint& ckpt) {
  if (ckpt.config.value("kind", "") != "dman") throw FormatError("checkpoint does not hold an NLI model");
  const auto cfg = DMANConfig::from_json(ckpt.config.at("model"));
  if (cfg.hidden != ckpt.hidden) {
    throw DimensionError("checkpoint header hidden " + std::to_string(ckpt.hidden) + " vs config hidden " +
                         std::to_string(cfg.hidden));
  }
  EmbeddingTable words{vocab_from(ckpt, "words"), clone_param(ckpt.tensor("words")), false};
  TagVocabs tags{vocab_from(ckpt, "pos"), vocab_from(ckpt, "ner")};
  auto m = make_model(cfg, std::move(words), std::move(tags));
  for (auto& [name, t] : m.trainable()) assign_values(t, ckpt.tensor(name), name);
  return m;
}

}  // namespace dman
