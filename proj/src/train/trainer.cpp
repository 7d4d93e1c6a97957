#include "dman/train/trainer.hpp"

#include <cmath>
#include <numeric>

#include "dman/autodiff/tape.hpp"
#include "dman/errors.hpp"
#include "dman/train/objective.hpp"
#include "dman/train/optim.hpp"

namespace dman {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  if (!(lr > 0)) throw ConfigError("learning rate must be positive");
  if (!(rho > 0 && rho < 1)) throw ConfigError("rho must be in (0, 1)");
  if (!(eps > 0)) throw ConfigError("eps must be positive");
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (rl_samples == 0) throw ConfigError("rl_samples must be at least 1");
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j = {{"batch_size", batch_size},
                      {"lr", lr},
                      {"rho", rho},
                      {"eps", eps},
                      {"epochs", epochs},
                      {"eval_every", eval_every},
                      {"rl_mode", rl_mode == RLMode::exact ? "exact" : "sampled"},
                      {"rl_samples", rl_samples},
                      {"rl_baseline", rl_baseline},
                      {"track_train_acc", track_train_acc},
                      {"seed", seed}};
  if (stop_at_train_acc) j["stop_at_train_acc"] = *stop_at_train_acc;
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr = j.value("lr", c.lr);
  c.rho = j.value("rho", c.rho);
  c.eps = j.value("eps", c.eps);
  c.epochs = j.value("epochs", c.epochs);
  c.eval_every = j.value("eval_every", c.eval_every);
  const std::string mode = j.value("rl_mode", std::string("exact"));
  if (mode == "exact") {
    c.rl_mode = RLMode::exact;
  } else if (mode == "sampled") {
    c.rl_mode = RLMode::sampled;
  } else {
    throw ConfigError("rl_mode must be exact or sampled, got " + mode);
  }
  c.rl_samples = j.value("rl_samples", c.rl_samples);
  c.rl_baseline = j.value("rl_baseline", c.rl_baseline);
  c.track_train_acc = j.value("track_train_acc", c.track_train_acc);
  if (j.contains("stop_at_train_acc")) c.stop_at_train_acc = j.at("stop_at_train_acc").get<double>();
  c.seed = j.value("seed", c.seed);
  return c;
}

nlohmann::json LogRecord::to_json() const {
  nlohmann::json j = {{"step", step}, {"epoch", epoch}, {"train_loss", train_loss}, {"ce", ce},
                      {"rl", rl},     {"dev_acc", dev_acc}, {"keep_prob", keep_prob}, {"lr", lr}};
  if (train_acc) j["train_acc"] = *train_acc;
  return j;
}

BatchLoss batch_loss(const DMANModel& m, const std::vector<const NLIExample*>& batch, Real keep, Rng& dropout_rng,
                     Rng& sample_rng, const TrainConfig& cfg) {
  const Real lambda = m.config.lambda;
  const bool need_ce = lambda > 0;
  const bool need_rl = lambda < 1;
  const bool stochastic = keep < 1;
  std::vector<Tensor> ce, rl;
  BatchLoss out;
  for (const auto* ex : batch) {
    Tensor train_probs;
    if (need_ce || (need_rl && !stochastic)) {
      train_probs = forward(m, *ex, DropoutCtx{true, keep, &dropout_rng}).probs;
    }
    if (need_ce) {
      bool clamped = false;
      ce.push_back(ce_loss(train_probs, ex->gold, &clamped));
      out.clamped += clamped;
    }
    if (need_rl) {
      // The policy is the deterministic (no-dropout) network.
      const Tensor policy = stochastic ? forward(m, *ex, DropoutCtx::eval()).probs : train_probs;
      if (cfg.rl_mode == RLMode::exact) {
        rl.push_back(rl_loss_exact(policy, ex->annotator_labels));
      } else {
        rl.push_back(rl_loss_sampled(policy, ex->annotator_labels, cfg.rl_samples, sample_rng, cfg.rl_baseline).surrogate);
      }
    }
  }
  Tensor j_ce, j_rl;
  if (need_ce) {
    j_ce = mean_loss(ce);
    out.ce = j_ce.item();
  }
  if (need_rl) {
    j_rl = mean_loss(rl);
    out.rl = j_rl.item();
  }
  out.total = combined_loss(j_ce, j_rl, lambda);
  return out;
}

std::size_t argmax_label(const std::vector<Real>& probs) {
  return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

EvalResult evaluate(const DMANModel& m, const std::vector<NLIExample>& prepared) {
  EvalResult r;
  r.n = prepared.size();
  std::size_t correct = 0;
  for (const auto& ex : prepared) {
    const auto pred = argmax_label(predict_probs(m, ex));
    const auto gold = static_cast<std::size_t>(ex.gold);
    r.confusion[gold][pred] += 1;
    correct += pred == gold;
  }
  r.accuracy = r.n ? static_cast<double>(correct) / static_cast<double>(r.n) : 0.0;
  return r;
}

nlohmann::json EvalResult::to_json() const {
  nlohmann::json conf = nlohmann::json::object();
  for (std::size_t g = 0; g < kNumLabels; ++g) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t p = 0; p < kNumLabels; ++p) row[std::string(label_name(static_cast<Label>(p)))] = confusion[g][p];
    conf[std::string(label_name(static_cast<Label>(g)))] = row;
  }
  return {{"accuracy", accuracy}, {"n", n}, {"confusion", conf}};
}

EvalResult ensemble_eval(const std::vector<DMANModel>& models, const std::vector<NLIExample>& raw,
                         const std::vector<TagRow>* sidecar) {
  if (models.empty()) throw ConfigError("ensemble needs at least one model");
  for (const auto& m : models) {
    if (!m.config.same_architecture(models[0].config)) {
      throw ConfigError("ensemble members differ in architecture (hidden " + std::to_string(models[0].config.hidden) +
                        " vs " + std::to_string(m.config.hidden) + ")");
    }
  }
  std::vector<std::array<double, kNumLabels>> sums(raw.size(), std::array<double, kNumLabels>{});
  for (const auto& m : models) {
    for (std::size_t i = 0; i < raw.size(); ++i) {
      NLIExample ex = raw[i];
      m.prepare(ex, sidecar);
      const auto p = predict_probs(m, ex);
      for (std::size_t l = 0; l < kNumLabels; ++l) sums[i][l] += static_cast<double>(p[l]);
    }
  }
  EvalResult r;
  r.n = raw.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::vector<Real> avg(kNumLabels);
    for (std::size_t l = 0; l < kNumLabels; ++l) avg[l] = static_cast<Real>(sums[i][l] / static_cast<double>(models.size()));
    const auto pred = argmax_label(avg);
    const auto gold = static_cast<std::size_t>(raw[i].gold);
    r.confusion[gold][pred] += 1;
    correct += pred == gold;
  }
  r.accuracy = r.n ? static_cast<double>(correct) / static_cast<double>(r.n) : 0.0;
  return r;
}

TrainResult train_nli(const DMANModel& initial, const std::vector<NLIExample>& train, const std::vector<NLIExample>& dev,
                      const TrainConfig& cfg, const std::function<void(const LogRecord&)>& on_eval) {
  DMANModel model = clone_model(initial);
  cfg.validate();
  model.config.validate();
  if (train.empty()) throw std::invalid_argument("train_nli: empty training split");
  if (dev.empty()) throw std::invalid_argument("train_nli: empty dev split");

  const Rng root(cfg.seed);
  Rng order_rng = root.substream("train.order");
  Rng dropout_rng = root.substream("train.dropout");
  Rng sample_rng = root.substream("train.sample");

  auto params = model.trainable_tensors();
  AdaDelta opt(params, AdaDeltaOptions{cfg.rho, cfg.eps, cfg.lr});
  opt.zero_grad();

  TrainResult result;
  std::vector<std::vector<Real>> best;
  auto snapshot = [&] {
    best.clear();
    for (const auto& p : params) best.emplace_back(p.values().begin(), p.values().end());
  };

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t per_epoch = (train.size() + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t eval_every = cfg.eval_every ? cfg.eval_every : per_epoch;

  double loss_acc = 0, ce_acc = 0, rl_acc = 0;
  std::size_t since_eval = 0;
  std::size_t step = 0;
  bool stop = false;
  const auto& mc = model.config;

  for (std::size_t epoch = 1; epoch <= cfg.epochs && !stop; ++epoch) {
    order_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size() && !stop; start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<const NLIExample*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train[order[i]]);
      const Real keep = dropout_keep(step, mc.keep_prob, mc.keep_decay, mc.decay_steps, mc.keep_floor);

      Tape tape;
      BatchLoss bl;
      {
        TapeScope scope(tape);
        bl = batch_loss(model, batch, keep, dropout_rng, sample_rng, cfg);
      }
      const double value = bl.total.item();
      if (!std::isfinite(value)) {
        throw DivergenceError("loss became " + std::to_string(value) + " at step " + std::to_string(step + 1) +
                              " (ce " + std::to_string(bl.ce) + ", rl " + std::to_string(bl.rl) + ")");
      }
      tape.backward(bl.total);
      opt.step();
      opt.zero_grad();
      ++step;
      result.clamped_probs += bl.clamped;
      loss_acc += value;
      ce_acc += bl.ce;
      rl_acc += bl.rl;
      ++since_eval;

      const bool epoch_end = end == order.size();
      if (step % eval_every == 0 || (epoch_end && epoch == cfg.epochs)) {
        LogRecord rec;
        rec.step = step;
        rec.epoch = epoch;
        rec.train_loss = loss_acc / static_cast<double>(since_eval);
        rec.ce = ce_acc / static_cast<double>(since_eval);
        rec.rl = rl_acc / static_cast<double>(since_eval);
        rec.dev_acc = evaluate(model, dev).accuracy;
        if (cfg.track_train_acc || cfg.stop_at_train_acc) rec.train_acc = evaluate(model, train).accuracy;
        rec.keep_prob = keep;
        rec.lr = cfg.lr;
        result.log.push_back(rec);
        if (on_eval) on_eval(rec);
        if (best.empty() || rec.dev_acc > result.best_dev_acc) {
          snapshot();
          result.best_dev_acc = rec.dev_acc;
          result.best_step = step;
        }
        loss_acc = ce_acc = rl_acc = 0;
        since_eval = 0;
        if (cfg.stop_at_train_acc && rec.train_acc && *rec.train_acc >= *cfg.stop_at_train_acc) stop = true;
      }
    }
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto dst = params[k].mutable_values();
    std::copy(best[k].begin(), best[k].end(), dst.begin());
  }
  result.steps = step;
  result.model = std::move(model);
  return result;
}

}  // namespace dman
