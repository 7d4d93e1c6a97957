#include <array>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "dman/autodiff/ops.hpp"
#include "dman/autodiff/tape.hpp"
#include "dman/errors.hpp"
#include "dman/layers/init.hpp"
#include "dman/synth/synthetic.hpp"
#include "dman/train/objective.hpp"
#include "dman/train/optim.hpp"
#include "dman/train/trainer.hpp"

using namespace dman;

namespace {

const std::vector<std::string> kExampleAnn = {"neutral", "neutral", "entailment", "contradiction", "neutral"};

std::vector<Real> vals(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

std::vector<Real> grad_of(const Tensor& t) {
  const auto g = t.grad();
  return {g.begin(), g.end()};
}

struct SynthData {
  EmbeddingTable words;
  std::vector<NLIExample> train, dev;
};

SynthData synth_data(std::uint64_t seed, std::size_t n_train, std::size_t n_dev) {
  const auto lex = synth::Lexicon::make(seed);
  Rng rng(seed);
  auto emb_rng = rng.substream("emb");
  auto data_rng = rng.substream("data");
  SynthData d{synth::embeddings(lex, 8, emb_rng), {}, {}};
  d.train = synth::nli_examples(lex, n_train, {0}, data_rng);
  d.dev = synth::nli_examples(lex, n_dev, {0}, data_rng);
  return d;
}

DMANConfig tiny_config(std::size_t h = 4) {
  DMANConfig c;
  c.hidden = h;
  c.char_dim = 3;
  c.char_filters = 4;
  c.pos_dim = 3;
  c.ner_dim = 2;
  c.use_encoder = false;
  return c;
}

DMANModel prepared_model(const DMANConfig& cfg, SynthData& d) {
  auto m = make_model(cfg, d.words, TagVocabs::with_rule_tags());
  for (auto& e : d.train) m.prepare(e);
  for (auto& e : d.dev) m.prepare(e);
  return m;
}

}  // namespace

TEST(Reward, AnnotatorExample) {
  EXPECT_EQ(reward(Label::neutral, kExampleAnn), 0.6);
  EXPECT_EQ(reward(Label::entailment, kExampleAnn), 0.2);
  EXPECT_EQ(reward(Label::contradiction, kExampleAnn), 0.2);
  const auto r = rewards(kExampleAnn);
  EXPECT_EQ(r[0], 0.2);
  EXPECT_EQ(r[1], 0.6);
  EXPECT_EQ(r[2], 0.2);
  EXPECT_DOUBLE_EQ(r[0] + r[1] + r[2], 1.0);
}

TEST(Reward, Boundaries) {
  EXPECT_EQ(reward(Label::entailment, {"neutral", "contradiction"}), 0.0);
  EXPECT_EQ(reward(Label::contradiction, {"contradiction"}), 1.0);
  EXPECT_THROW(reward(Label::neutral, {}), std::invalid_argument);
  // Out-of-set annotations count toward the denominator only.
  EXPECT_EQ(reward(Label::neutral, {"neutral", "-", "neutral", "neutral"}), 0.75);
}

TEST(CrossEntropy, ClosedForms) {
  const Tensor one_hot({3}, {1, 0, 0});
  const Tensor uniform({3}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  const auto a = ce_loss(one_hot, Label::entailment);
  const auto b = ce_loss(uniform, Label::neutral);
  EXPECT_EQ(a.item(), 0.0);
  EXPECT_NEAR(b.item(), std::log(3.0), 1e-15);
  EXPECT_NEAR(mean_loss({a, b}).item(), std::log(3.0) / 2, 1e-15);
  EXPECT_NEAR(mean_loss({a, b}).item(), 0.5493, 1e-4);
}

TEST(CrossEntropy, ClampsZeroProbability) {
  bool clamped = false;
  const auto l = ce_loss(Tensor({3}, {1, 0, 0}), Label::contradiction, &clamped);
  EXPECT_TRUE(clamped);
  EXPECT_NEAR(l.item(), -std::log(1e-12), 1e-9);
  ce_loss(Tensor({3}, {0.2, 0.3, 0.5}), Label::contradiction, &clamped);
  EXPECT_FALSE(clamped);
}

TEST(RlExact, Enumeration) {
  const Tensor uniform({3}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_NEAR(rl_loss_exact(uniform, kExampleAnn).item(), -1.0 / 3, 1e-15);
  EXPECT_EQ(rl_loss_exact(Tensor({3}, {0, 0, 1}), {"contradiction", "contradiction"}).item(), -1.0);
  const Tensor d({3}, {0.1, 0.7, 0.2});
  EXPECT_NEAR(rl_loss_exact(d, {"neutral", "entailment", "contradiction"}).item(), -1.0 / 3, 1e-15);
  EXPECT_NEAR(rl_loss_exact(d, kExampleAnn).item(), -(0.1 * 0.2 + 0.7 * 0.6 + 0.2 * 0.2), 1e-15);
}

TEST(RlSampled, PointMassIsExact) {
  Rng rng(1);
  const Tensor d({3}, {0, 1, 0});
  const auto s = rl_loss_sampled(d, kExampleAnn, 50, rng);
  EXPECT_EQ(s.estimate, rl_loss_exact(d, kExampleAnn).item());
  for (auto l : s.samples) EXPECT_EQ(l, 1u);
}

TEST(RlSampled, EstimateWithinThreeSigma) {
  Rng rng(2);
  const Tensor uniform({3}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  const std::size_t k = 100000;
  const auto s = rl_loss_sampled(uniform, kExampleAnn, k, rng);
  ASSERT_EQ(s.samples.size(), k);
  const auto r = rewards(kExampleAnn);
  double mean = 0, sq = 0;
  for (auto l : s.samples) mean += r[l], sq += r[l] * r[l];
  mean /= k;
  const double var = sq / k - mean * mean;
  EXPECT_NEAR(s.estimate, -mean, 1e-12);
  std::array<std::size_t, 3> counts{};
  for (auto l : s.samples) ++counts[l];
  for (auto c : counts) EXPECT_NEAR(c / double(k), 1.0 / 3, 3 * std::sqrt(2.0 / 9 / k));
  EXPECT_LT(std::abs(s.estimate - (-1.0 / 3)), 3 * std::sqrt(var / k));
}

TEST(RlSampled, GradientUnbiased) {
  // Three free logits; d = softmax(z).
  Rng init(3);
  auto z = uniform_param({3}, 1.0, init);
  const std::size_t k = 100000;

  std::vector<Real> exact;
  {
    Tape t;
    Tensor loss;
    {
      TapeScope s(t);
      loss = rl_loss_exact(ops::softmax(z, 0), kExampleAnn);
    }
    t.backward(loss);
    exact = grad_of(z);
    z.zero_grad();
  }
  // Per-label score-function terms -R(l) d/dz log d_l.
  std::array<std::vector<Real>, 3> per_label;
  const auto r = rewards(kExampleAnn);
  for (std::size_t l = 0; l < 3; ++l) {
    Tape t;
    Tensor ll;
    {
      TapeScope s(t);
      ll = ops::log(ops::pick(ops::softmax(z, 0), l));
    }
    t.backward(ll);
    per_label[l] = grad_of(z);
    for (auto& g : per_label[l]) g *= -r[l];
    z.zero_grad();
  }
  Rng rng(4);
  SampledRL s;
  {
    Tape t;
    {
      TapeScope scope(t);
      s = rl_loss_sampled(ops::softmax(z, 0), kExampleAnn, k, rng);
    }
    t.backward(s.surrogate);
  }
  const auto sampled = grad_of(z);
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0, sq = 0;
    for (auto l : s.samples) m += per_label[l][c], sq += per_label[l][c] * per_label[l][c];
    m /= k;
    const double sigma = std::sqrt((sq / k - m * m) / k);
    EXPECT_NEAR(sampled[c], m, 1e-9);
    EXPECT_LT(std::abs(sampled[c] - exact[c]), 3 * sigma) << c;
  }
}

TEST(CombinedLoss, Boundaries) {
  const Tensor ce = Tensor::scalar(1.0), rl = Tensor::scalar(-0.5);
  EXPECT_TRUE(combined_loss(ce, rl, 1.0).same_storage(ce));
  EXPECT_TRUE(combined_loss(ce, Tensor(), 1.0).same_storage(ce));
  EXPECT_TRUE(combined_loss(ce, rl, 0.0).same_storage(rl));
  EXPECT_TRUE(combined_loss(Tensor(), rl, 0.0).same_storage(rl));
  EXPECT_NEAR(combined_loss(ce, rl, 0.2).item(), -0.2, 1e-12);
  EXPECT_NEAR(combined_loss(Tensor::scalar(0.731), Tensor::scalar(-0.412), 0.2).item(), 0.2 * 0.731 - 0.8 * 0.412, 1e-12);
  EXPECT_THROW(combined_loss(ce, rl, 1.2), std::invalid_argument);
  EXPECT_THROW(combined_loss(ce, rl, -0.1), std::invalid_argument);
}

TEST(CombinedLoss, LambdaOneGradientIsCrossEntropy) {
  Rng init(5);
  auto z = uniform_param({3}, 1.0, init);
  auto grad = [&](Real lambda) {
    Tape t;
    Tensor loss;
    {
      TapeScope s(t);
      const auto d = ops::softmax(z, 0);
      loss = combined_loss(ce_loss(d, Label::neutral), rl_loss_exact(d, kExampleAnn), lambda);
    }
    t.backward(loss);
    auto g = grad_of(z);
    z.zero_grad();
    return g;
  };
  Tape t;
  Tensor loss;
  {
    TapeScope s(t);
    loss = ce_loss(ops::softmax(z, 0), Label::neutral);
  }
  t.backward(loss);
  const auto ce_grad = grad_of(z);
  z.zero_grad();
  EXPECT_EQ(grad(1.0), ce_grad);
  EXPECT_NE(grad(0.2), ce_grad);
}

TEST(AdaDelta, FirstStep) {
  auto x = Tensor({2}, {0.5, -1.0}, true);
  AdaDelta opt({x});
  x.mutable_grad()[0] = 1.0;
  x.mutable_grad()[1] = -2.0;
  opt.step();
  const double dx0 = -std::sqrt(1e-8) / std::sqrt(0.05 + 1e-8);
  EXPECT_NEAR(x.at(0) - 0.5, dx0, 1e-15);
  EXPECT_NEAR(dx0, -4.4721e-4, 1e-8);
  EXPECT_GT(x.at(1), -1.0);
  EXPECT_NEAR(opt.sq_grad()[0][0], 0.05, 1e-15);
  EXPECT_NEAR(opt.sq_update()[0][0], 0.05 * dx0 * dx0, 1e-18);
}

TEST(AdaDelta, ZeroGradientAndSigns) {
  Rng rng(6);
  auto x = uniform_param({20}, 1.0, rng);
  AdaDelta opt({x}, {0.95, 1e-8, 0.6});
  const auto before = vals(x);
  opt.step();
  EXPECT_EQ(vals(x), before);
  for (int s = 0; s < 5; ++s) {
    std::vector<Real> g(20);
    for (auto& v : g) v = rng.uniform(-1, 1);
    auto prev = vals(x);
    std::copy(g.begin(), g.end(), x.mutable_grad().begin());
    opt.step();
    for (std::size_t i = 0; i < 20; ++i) {
      const double dx = x.at(i) - prev[i];
      EXPECT_LE(dx * g[i], 0.0);
      EXPECT_GE(opt.sq_grad()[0][i], 0.0);
      EXPECT_GE(opt.sq_update()[0][i], 0.0);
    }
    opt.zero_grad();
  }
}

TEST(Sgd, Step) {
  auto x = Tensor({2}, {1.0, 2.0}, true);
  Sgd opt({x}, 0.1);
  x.mutable_grad()[0] = 3;
  x.mutable_grad()[1] = -1;
  opt.step();
  EXPECT_DOUBLE_EQ(x.at(0), 0.7);
  EXPECT_DOUBLE_EQ(x.at(1), 2.1);
}

TEST(DropoutSchedule, Values) {
  EXPECT_DOUBLE_EQ(dropout_keep(0), 0.9);
  EXPECT_DOUBLE_EQ(dropout_keep(4999), 0.9);
  EXPECT_NEAR(dropout_keep(5000), 0.873, 1e-12);
  EXPECT_EQ(dropout_keep(1000000), 0.5);
  Real prev = 1;
  for (std::size_t s = 0; s < 200000; s += 2500) {
    EXPECT_LE(dropout_keep(s), prev);
    prev = dropout_keep(s);
  }
}

TEST(TrainNli, LambdaOneMatchesCrossEntropyLoop) {
  auto d = synth_data(7, 24, 12);
  auto cfg = tiny_config();
  cfg.lambda = 1;
  const auto model = prepared_model(cfg, d);
  TrainConfig tc;
  tc.batch_size = 5;
  tc.epochs = 2;
  tc.eval_every = 1;
  tc.seed = 3;
  const auto res = train_nli(model, d.train, d.dev, tc);

  // Plain cross-entropy loop with the same order and dropout streams.
  auto ref = clone_model(model);
  const Rng root(tc.seed);
  Rng order_rng = root.substream("train.order");
  Rng drop_rng = root.substream("train.dropout");
  auto params = ref.trainable_tensors();
  AdaDelta opt(params, {tc.rho, tc.eps, tc.lr});
  std::vector<std::size_t> order(d.train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> losses;
  std::size_t step = 0;
  for (std::size_t e = 0; e < tc.epochs; ++e) {
    order_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
      const Real keep = dropout_keep(step, cfg.keep_prob, cfg.keep_decay, cfg.decay_steps, cfg.keep_floor);
      Tape t;
      Tensor loss;
      {
        TapeScope s(t);
        std::vector<Tensor> ls;
        for (std::size_t i = start; i < std::min(order.size(), start + tc.batch_size); ++i) {
          const auto& ex = d.train[order[i]];
          ls.push_back(ce_loss(forward(ref, ex, DropoutCtx{true, keep, &drop_rng}).probs, ex.gold));
        }
        loss = mean_loss(ls);
      }
      t.backward(loss);
      opt.step();
      opt.zero_grad();
      losses.push_back(loss.item());
      ++step;
    }
  }
  ASSERT_EQ(res.log.size(), losses.size());
  for (std::size_t i = 0; i < losses.size(); ++i) {
    EXPECT_EQ(res.log[i].train_loss, losses[i]) << "step " << i + 1;
    EXPECT_EQ(res.log[i].ce, losses[i]);
    EXPECT_EQ(res.log[i].rl, 0.0);
  }
}

TEST(TrainNli, LambdaZeroUsesOnlyRl) {
  auto d = synth_data(8, 10, 6);
  auto cfg = tiny_config(3);
  cfg.lambda = 0;
  const auto model = prepared_model(cfg, d);
  TrainConfig tc;
  tc.batch_size = 4;
  tc.epochs = 1;
  tc.eval_every = 1;
  const auto res = train_nli(model, d.train, d.dev, tc);
  for (const auto& r : res.log) {
    EXPECT_EQ(r.ce, 0.0);
    EXPECT_EQ(r.train_loss, r.rl);
    EXPECT_LT(r.rl, 0.0);
  }
}

TEST(TrainNli, DeterministicAndLeavesInputUntouched) {
  auto d = synth_data(9, 20, 10);
  const auto model = prepared_model(tiny_config(), d);
  const auto before = vals(model.params.w_out);
  TrainConfig tc;
  tc.batch_size = 4;
  tc.epochs = 2;
  tc.eval_every = 2;
  const auto a = train_nli(model, d.train, d.dev, tc);
  const auto b = train_nli(model, d.train, d.dev, tc);
  EXPECT_EQ(vals(model.params.w_out), before);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) EXPECT_EQ(a.log[i].to_json().dump(), b.log[i].to_json().dump());
  const auto pa = a.model.trainable(), pb = b.model.trainable();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(vals(pa[i].second), vals(pb[i].second)) << pa[i].first;
  EXPECT_NE(vals(a.model.params.w_out), before);
  EXPECT_DOUBLE_EQ(evaluate(a.model, d.dev).accuracy, a.best_dev_acc);
}

TEST(TrainNli, Errors) {
  auto d = synth_data(10, 6, 3);
  auto model = prepared_model(tiny_config(3), d);
  TrainConfig tc;
  EXPECT_THROW(train_nli(model, {}, d.dev, tc), std::invalid_argument);
  EXPECT_THROW(train_nli(model, d.train, {}, tc), std::invalid_argument);
  tc.batch_size = 0;
  EXPECT_THROW(train_nli(model, d.train, d.dev, tc), ConfigError);
  tc = {};
  model.params.w_out.mutable_values()[0] = std::nan("");
  EXPECT_THROW(train_nli(model, d.train, d.dev, tc), DivergenceError);
}

TEST(TrainNli, OverfitsSmallCorpus) {
  auto d = synth_data(11, 64, 3);
  auto cfg = tiny_config(16);
  const auto model = prepared_model(cfg, d);
  TrainConfig tc;
  tc.batch_size = 8;
  tc.epochs = 200;
  tc.stop_at_train_acc = 0.95;
  const auto res = train_nli(model, d.train, d.dev, tc);
  ASSERT_TRUE(res.log.back().train_acc);
  EXPECT_GE(*res.log.back().train_acc, 0.95);
}

TEST(TrainConfig, JsonAndValidation) {
  TrainConfig c;
  c.rl_mode = RLMode::sampled;
  c.stop_at_train_acc = 0.9;
  EXPECT_EQ(TrainConfig::from_json(c.to_json()).to_json(), c.to_json());
  auto j = c.to_json();
  j["rl_mode"] = "greedy";
  EXPECT_THROW(TrainConfig::from_json(j), ConfigError);
  c.rho = 1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Evaluate, RandomModelNearChance) {
  auto d = synth_data(12, 3, 300);
  const auto model = prepared_model(tiny_config(), d);
  const auto r = evaluate(model, d.dev);
  EXPECT_EQ(r.n, 300u);
  EXPECT_NEAR(r.accuracy, 1.0 / 3, 0.09);
  std::size_t total = 0, diag = 0;
  for (std::size_t g = 0; g < 3; ++g) {
    std::size_t row = 0;
    for (std::size_t p = 0; p < 3; ++p) row += r.confusion[g][p], total += r.confusion[g][p];
    diag += r.confusion[g][g];
    EXPECT_EQ(row, 100u);
  }
  EXPECT_EQ(total, 300u);
  EXPECT_DOUBLE_EQ(r.accuracy, diag / 300.0);

  auto shuffled = d.dev;
  Rng rng(1);
  rng.shuffle(shuffled);
  EXPECT_EQ(evaluate(model, shuffled).accuracy, r.accuracy);
}

TEST(Evaluate, TrainedModelDiagonal) {
  auto d = synth_data(13, 48, 3);
  const auto model = prepared_model(tiny_config(16), d);
  TrainConfig tc;
  tc.batch_size = 8;
  tc.epochs = 200;
  tc.stop_at_train_acc = 1.0;
  const auto res = train_nli(model, d.train, d.train, tc);
  const auto r = evaluate(res.model, d.train);
  if (r.accuracy == 1.0) {
    for (std::size_t g = 0; g < 3; ++g) {
      for (std::size_t p = 0; p < 3; ++p) {
        if (g != p) EXPECT_EQ(r.confusion[g][p], 0u);
      }
    }
  }
  EXPECT_GE(r.accuracy, 0.95);
}

TEST(Ensemble, AveragingProperties) {
  auto d = synth_data(14, 3, 60);
  auto raw = d.dev;
  auto cfg = tiny_config();
  const auto m1 = prepared_model(cfg, d);
  cfg.seed = 2;
  const auto m2 = prepared_model(cfg, d);
  const auto single = ensemble_eval({m1}, raw);
  EXPECT_EQ(single.accuracy, evaluate(m1, d.dev).accuracy);
  EXPECT_EQ(single.confusion, evaluate(m1, d.dev).confusion);
  EXPECT_EQ(ensemble_eval({m1, m1}, raw).confusion, single.confusion);
  EXPECT_NO_THROW(ensemble_eval({m1, m2}, raw));

  auto other = tiny_config(5);
  const auto m3 = prepared_model(other, d);
  EXPECT_THROW(ensemble_eval({m1, m3}, raw), ConfigError);
  EXPECT_THROW(ensemble_eval({}, raw), ConfigError);
}

TEST(Ensemble, ThreeSeedsNotWorseThanBest) {
  auto d = synth_data(15, 60, 60);
  std::vector<DMANModel> models;
  double best_single = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto cfg = tiny_config(8);
    cfg.seed = seed;
    const auto model = prepared_model(cfg, d);
    TrainConfig tc;
    tc.batch_size = 4;
    tc.lr = 1.0;
    tc.epochs = 50;
    tc.seed = seed;
    auto res = train_nli(model, d.train, d.dev, tc);
    best_single = std::max(best_single, evaluate(res.model, d.dev).accuracy);
    models.push_back(std::move(res.model));
  }
  const auto ens = ensemble_eval(models, d.dev);
  RecordProperty("ensemble_accuracy", std::to_string(ens.accuracy));
  RecordProperty("best_single_accuracy", std::to_string(best_single));
  EXPECT_GE(ens.accuracy, best_single - 0.02);
}
