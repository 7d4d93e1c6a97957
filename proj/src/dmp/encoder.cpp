#include "dman/dmp/encoder.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dman/autodiff/ops.hpp"
#include "dman/autodiff/tape.hpp"
#include "dman/errors.hpp"
#include "dman/layers/init.hpp"
#include "dman/train/optim.hpp"

namespace dman {

std::vector<Tensor> EncoderParams::tensors() const {
  auto t = fwd.tensors();
  for (const auto& x : bwd.tensors()) t.push_back(x);
  return t;
}

NamedTensors EncoderParams::named(const std::string& prefix) const {
  return {{prefix + "fwd.w_ih", fwd.w_ih}, {prefix + "fwd.w_hh", fwd.w_hh}, {prefix + "fwd.bias", fwd.bias},
          {prefix + "bwd.w_ih", bwd.w_ih}, {prefix + "bwd.w_hh", bwd.w_hh}, {prefix + "bwd.bias", bwd.bias}};
}

EncoderParams EncoderParams::init(std::size_t input_dim, std::size_t hidden, Rng& rng) {
  auto f = LSTMWeights::init(input_dim, hidden, rng);
  auto b = LSTMWeights::init(input_dim, hidden, rng);
  return {f, b};
}

EncoderParams EncoderParams::zeros(std::size_t input_dim, std::size_t hidden) {
  return {LSTMWeights::zeros(input_dim, hidden), LSTMWeights::zeros(input_dim, hidden)};
}

DMPHead DMPHead::init(std::size_t markers, std::size_t input_dim, Rng& rng) {
  const Real range = std::sqrt(Real(6) / static_cast<Real>(markers + input_dim));
  return {uniform_param({markers, input_dim}, range, rng), zero_param({markers})};
}

DMPHead DMPHead::zeros(std::size_t markers, std::size_t input_dim) {
  return {zero_param({markers, input_dim}), zero_param({markers})};
}

Tensor embed_words(const EmbeddingTable& words, const TokenizedSentence& s) {
  if (s.empty()) throw std::invalid_argument("cannot embed an empty sentence");
  if (s.word_ids.size() == s.size()) return ops::gather_rows(words.matrix, s.word_ids);
  std::vector<std::size_t> ids;
  ids.reserve(s.size());
  for (const auto& t : s.tokens) ids.push_back(words.vocab.id(t));
  return ops::gather_rows(words.matrix, ids);
}

Tensor encode_sentence(const EncoderParams& p, const Tensor& xs) {
  if (xs.rank() != 2 || xs.dim(0) == 0) throw std::invalid_argument("encode_sentence needs a nonempty [T, d] input");
  const auto out = bilstm_directional(p.fwd, p.bwd, xs);
  const std::size_t T = xs.dim(0), h = p.hidden();
  return ops::concat({ops::max_over_axis(out.forward, 0), ops::max_over_axis(out.backward, 0),
                      ops::reshape(ops::slice(out.forward, 0, T - 1, 1), {h}),
                      ops::reshape(ops::slice(out.backward, 0, 0, 1), {h})},
                     0);
}

Tensor encode_sentence(const EncoderParams& p, const TokenizedSentence& s, const EmbeddingTable& words) {
  return encode_sentence(p, embed_words(words, s));
}

Tensor pair_features(const Tensor& r1, const Tensor& r2) {
  if (r1.shape() != r2.shape() || r1.rank() != 1) {
    throw DimensionError("pair_features: " + shape_str(r1.shape()) + " vs " + shape_str(r2.shape()));
  }
  return ops::concat({r1, r2, ops::add(r1, r2), ops::mul(r1, r2)}, 0);
}

Tensor dmp_logits(const DMPHead& head, const Tensor& r) {
  if (r.rank() != 1 || head.w.dim(1) != r.dim(0)) {
    throw DimensionError("DMP head expects width " + std::to_string(head.w.dim(1)) + ", got " + shape_str(r.shape()));
  }
  return ops::add(ops::reshape(ops::matmul_nt(ops::reshape(r, {1, r.dim(0)}), head.w), {head.markers()}), head.b);
}

Tensor dmp_forward(const DMPHead& head, const Tensor& r) { return ops::softmax(dmp_logits(head, r), 0); }

void DMPConfig::validate() const {
  if (hidden == 0) throw ConfigError("dmp hidden size must be positive");
  if (epochs == 0) throw ConfigError("dmp epochs must be positive");
  if (batch_size == 0) throw ConfigError("dmp batch size must be positive");
  if (!(lr > 0)) throw ConfigError("dmp learning rate must be positive");
  if (!(keep_prob > 0 && keep_prob <= 1)) throw ConfigError("dmp keep probability must be in (0, 1]");
}

nlohmann::json DMPConfig::to_json() const {
  return {{"hidden", hidden},         {"epochs", epochs},         {"batch_size", batch_size}, {"lr", lr},
          {"keep_prob", keep_prob},   {"init_range", init_range}, {"seed", seed}};
}

DMPConfig DMPConfig::from_json(const nlohmann::json& j) {
  DMPConfig c;
  c.hidden = j.value("hidden", c.hidden);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr = j.value("lr", c.lr);
  c.keep_prob = j.value("keep_prob", c.keep_prob);
  c.init_range = j.value("init_range", c.init_range);
  c.seed = j.value("seed", c.seed);
  return c;
}

std::vector<Tensor> DMPModel::trainable() const {
  auto t = encoder.tensors();
  for (const auto& x : head.tensors()) t.push_back(x);
  return t;
}

std::vector<Real> lr_schedule(const std::vector<double>& val_accs, Real lr0) {
  std::vector<Real> out;
  Real lr = lr0;
  for (std::size_t i = 0; i < val_accs.size(); ++i) {
    if (i > 0 && val_accs[i] < val_accs[i - 1]) lr /= 2;
    out.push_back(lr);
  }
  return out;
}

Tensor dmp_loss(const DMPModel& m, const MarkerPair& pair, bool training, std::uint64_t dropout_seed) {
  const auto r1 = encode_sentence(m.encoder, pair.s1, m.words);
  const auto r2 = encode_sentence(m.encoder, pair.s2, m.words);
  auto r = pair_features(r1, r2);
  r = ops::dropout(r, m.config.keep_prob, training, dropout_seed);
  const auto probs = dmp_forward(m.head, r);
  return ops::scale(ops::log(ops::pick(probs, pair.marker), 1e-12), -1);
}

std::size_t dmp_predict(const DMPModel& m, const MarkerPair& pair) {
  NoTapeScope no_tape;
  const auto r = pair_features(encode_sentence(m.encoder, pair.s1, m.words), encode_sentence(m.encoder, pair.s2, m.words));
  const auto logits = dmp_logits(m.head, r);
  const auto v = logits.values();
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double dmp_accuracy(const DMPModel& m, const std::vector<MarkerPair>& pairs) {
  if (pairs.empty()) return 0;
  std::size_t correct = 0;
  for (const auto& p : pairs) correct += dmp_predict(m, p) == p.marker;
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

Tensor clone_param(const Tensor& t) {
  std::vector<Real> v(t.values().begin(), t.values().end());
  return Tensor(t.shape(), std::move(v), t.requires_grad());
}

namespace {

std::vector<std::vector<Real>> snapshot(const std::vector<Tensor>& params) {
  std::vector<std::vector<Real>> out;
  for (const auto& p : params) out.emplace_back(p.values().begin(), p.values().end());
  return out;
}

void restore(std::vector<Tensor>& params, const std::vector<std::vector<Real>>& snap) {
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto dst = params[k].mutable_values();
    std::copy(snap[k].begin(), snap[k].end(), dst.begin());
  }
}

}  // namespace

DMPResult train_dmp(const std::vector<MarkerPair>& train, const std::vector<MarkerPair>& val, EmbeddingTable words,
                    const std::vector<std::string>& markers, const DMPConfig& cfg,
                    const std::function<void(const DMPEpoch&)>& on_epoch) {
  cfg.validate();
  if (train.empty()) throw std::invalid_argument("train_dmp: empty training split");
  if (val.empty()) throw std::invalid_argument("train_dmp: empty validation split");
  if (markers.empty()) throw std::invalid_argument("train_dmp: empty marker set");
  words.validate();
  for (const auto* split : {&train, &val}) {
    for (const auto& p : *split) {
      if (p.marker >= markers.size()) throw std::invalid_argument("marker id out of range");
    }
  }

  Rng root(cfg.seed);
  Rng init_rng = root.substream("dmp.init");
  Rng order_rng = root.substream("dmp.order");
  Rng drop_rng = root.substream("dmp.dropout");

  DMPModel m;
  m.markers = markers;
  m.words = std::move(words);
  m.config = cfg;
  m.encoder = EncoderParams::init(m.words.dim(), cfg.hidden, init_rng);
  m.head = DMPHead::init(markers.size(), 4 * m.encoder.repr_dim(), init_rng);

  auto params = m.trainable();
  Sgd sgd(params, cfg.lr);

  DMPResult result;
  std::vector<std::vector<Real>> best;
  std::optional<double> prev_acc;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      Tape tape;
      Tensor batch_loss;
      {
        TapeScope scope(tape);
        std::vector<Tensor> losses;
        for (std::size_t i = start; i < end; ++i) losses.push_back(dmp_loss(m, train[order[i]], true, drop_rng.next_u64()));
        batch_loss = losses.size() == 1 ? losses[0] : ops::mean(ops::concat([&] {
          std::vector<Tensor> flat;
          for (const auto& l : losses) flat.push_back(ops::reshape(l, {1}));
          return flat;
        }(), 0));
      }
      const double value = batch_loss.item();
      if (!std::isfinite(value)) {
        throw DivergenceError("DMP loss became " + std::to_string(value) + " in epoch " + std::to_string(epoch));
      }
      loss_sum += value * static_cast<double>(end - start);
      tape.backward(batch_loss);
      sgd.step();
      sgd.zero_grad();
    }

    DMPEpoch rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.val_acc = dmp_accuracy(m, val);
    if (prev_acc && rec.val_acc < *prev_acc) sgd.set_lr(sgd.lr() / 2);
    prev_acc = rec.val_acc;
    rec.lr = sgd.lr();
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (best.empty() || rec.val_acc > result.best_val_acc) {
      best = snapshot(params);
      result.best_val_acc = rec.val_acc;
      result.best_epoch = epoch;
    }
  }
  restore(params, best);
  result.model = std::move(m);
  return result;
}

void add_vocab(Checkpoint& ckpt, const std::string& name, const Vocab& v) { ckpt.tables[name] = v.tokens(); }

Vocab vocab_from(const Checkpoint& ckpt, const std::string& name) {
  auto it = ckpt.tables.find(name);
  if (it == ckpt.tables.end()) throw FormatError("checkpoint has no vocabulary '" + name + "'");
  const auto& tokens = it->second;
  if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnkToken) {
    throw FormatError("vocabulary '" + name + "' lacks the reserved entries");
  }
  Vocab v;
  for (std::size_t i = 2; i < tokens.size(); ++i) v.add(tokens[i]);
  if (v.size() != tokens.size()) throw FormatError("vocabulary '" + name + "' has duplicate entries");
  return v;
}

Checkpoint dmp_checkpoint(const DMPModel& m) {
  Checkpoint ckpt;
  ckpt.hidden = static_cast<std::uint32_t>(m.encoder.hidden());
  ckpt.markers = m.markers;
  ckpt.config = {{"kind", "dmp"}, {"dmp", m.config.to_json()}, {"word_dim", m.words.dim()}};
  add_vocab(ckpt, "words", m.words.vocab);
  ckpt.add("words", m.words.matrix);
  for (const auto& [name, t] : m.encoder.named("encoder.")) ckpt.add(name, t);
  ckpt.add("dmp_head.w", m.head.w);
  ckpt.add("dmp_head.b", m.head.b);
  return ckpt;
}

void export_encoder(const std::string& path, const DMPModel& m) { write_checkpoint(path, dmp_checkpoint(m)); }

EncoderParams import_encoder(const Checkpoint& ckpt, std::size_t expected_hidden) {
  if (ckpt.hidden != expected_hidden) {
    throw DimensionError("encoder checkpoint has hidden size " + std::to_string(ckpt.hidden) + ", model expects " +
                         std::to_string(expected_hidden));
  }
  const auto& w_ih = ckpt.tensor("encoder.fwd.w_ih");
  EncoderParams p = EncoderParams::zeros(w_ih.dim(1), expected_hidden);
  for (auto& [name, t] : p.named("encoder.")) assign_values(t, ckpt.tensor(name), name);
  p.fwd.validate();
  p.bwd.validate();
  return p;
}

DMPModel load_dmp_model(const Checkpoint& ckpt) {
  DMPModel m;
  m.markers = ckpt.markers;
  m.config = DMPConfig::from_json(ckpt.config.value("dmp", nlohmann::json::object()));
  m.words.vocab = vocab_from(ckpt, "words");
  m.words.matrix = clone_param(ckpt.tensor("words"));
  m.words.validate();
  m.encoder = import_encoder(ckpt, ckpt.hidden);
  m.head = DMPHead::zeros(ckpt.markers.size(), 4 * m.encoder.repr_dim());
  assign_values(m.head.w, ckpt.tensor("dmp_head.w"), "dmp_head.w");
  assign_values(m.head.b, ckpt.tensor("dmp_head.b"), "dmp_head.b");
  return m;
}

}  // namespace dman
