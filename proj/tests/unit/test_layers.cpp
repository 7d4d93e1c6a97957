#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dman/autodiff/grad_check.hpp"
#include "dman/autodiff/ops.hpp"
#include "dman/layers/attention_pool.hpp"
#include "dman/layers/char_cnn.hpp"
#include "dman/layers/feed_forward.hpp"
#include "dman/layers/lstm.hpp"

using namespace dman;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  std::vector<Real> v(shape_numel(shape));
  for (auto& e : v) e = static_cast<Real>(rng.uniform(lo, hi));
  return Tensor(std::move(shape), std::move(v));
}

LSTMWeights random_lstm(std::size_t d, std::size_t h, std::uint64_t seed, double range = 0.5) {
  return {random_tensor({4 * h, d}, seed, -range, range).set_requires_grad(true),
          random_tensor({4 * h, h}, seed + 1, -range, range).set_requires_grad(true),
          random_tensor({4 * h}, seed + 2, -range, range).set_requires_grad(true)};
}

Tensor reverse_rows(const Tensor& x) {
  std::vector<Tensor> rows;
  for (std::size_t t = x.dim(0); t-- > 0;) rows.push_back(ops::slice(x, 0, t, 1));
  return ops::concat(rows, 0);
}

// Hand-rolled cell equations on plain vectors, independent of the op library.
void reference_lstm_step(const LSTMWeights& w, const std::vector<double>& x, const std::vector<double>& hp,
                         const std::vector<double>& cp, std::vector<double>& h_out, std::vector<double>& c_out) {
  const std::size_t h = w.hidden(), d = w.input_dim();
  auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  std::vector<double> z(4 * h);
  for (std::size_t r = 0; r < 4 * h; ++r) {
    double s = w.bias.at(r);
    for (std::size_t k = 0; k < d; ++k) s += w.w_ih.at(r, k) * x[k];
    for (std::size_t k = 0; k < h; ++k) s += w.w_hh.at(r, k) * hp[k];
    z[r] = s;
  }
  h_out.assign(h, 0);
  c_out.assign(h, 0);
  for (std::size_t j = 0; j < h; ++j) {
    const double i = sig(z[j]), f = sig(z[h + j]), g = std::tanh(z[2 * h + j]), o = sig(z[3 * h + j]);
    c_out[j] = f * cp[j] + i * g;
    h_out[j] = o * std::tanh(c_out[j]);
  }
}

}  // namespace

// ---- lstm_step ------------------------------------------------------------

TEST(LstmStep, ZeroWeightsAndStateGiveZero) {
  auto w = LSTMWeights::zeros(4, 3);
  auto s = lstm_step(w, Tensor::zeros({4}), LSTMState::zeros(3));
  for (auto v : s.h.values()) EXPECT_EQ(v, 0);
  for (auto v : s.c.values()) EXPECT_EQ(v, 0);
}

TEST(LstmStep, SaturatedForgetGateCarriesCell) {
  const std::size_t h = 3;
  auto w = LSTMWeights::zeros(2, h);
  for (std::size_t i = h; i < 2 * h; ++i) w.bias.mutable_values()[i] = 50;
  LSTMState prev{random_tensor({1, h}, 3), random_tensor({1, h}, 4, -2, 2)};
  auto s = lstm_step(w, random_tensor({2}, 5), prev);
  for (std::size_t j = 0; j < h; ++j) EXPECT_NEAR(s.c.at(j), prev.c.at(j), 1e-9);
}

TEST(LstmStep, MatchesIndependentReimplementation) {
  Rng rng(0);
  auto w = LSTMWeights::init(5, 4, rng);
  auto x = random_tensor({5}, 10);
  LSTMState prev{random_tensor({1, 4}, 11), random_tensor({1, 4}, 12)};
  auto s = lstm_step(w, x, prev);
  std::vector<double> hr, cr;
  reference_lstm_step(w, {x.values().begin(), x.values().end()}, {prev.h.values().begin(), prev.h.values().end()},
                      {prev.c.values().begin(), prev.c.values().end()}, hr, cr);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(s.h.at(j), hr[j], 1e-14);
    EXPECT_NEAR(s.c.at(j), cr[j], 1e-14);
  }
}

TEST(LstmStep, InitHasForgetBiasOneAndBoundedWeights) {
  Rng rng(1);
  auto w = LSTMWeights::init(6, 5, rng);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(w.bias.at(i), (i >= 5 && i < 10) ? 1.0 : 0.0);
  for (auto v : w.w_ih.values()) EXPECT_LE(std::abs(v), 0.08);
  for (auto v : w.w_hh.values()) EXPECT_LE(std::abs(v), 0.08);
  EXPECT_EQ(w.w_ih.dim(0) % 4, 0u);
}

TEST(LstmStep, DimMismatchThrows) {
  auto w = LSTMWeights::zeros(4, 3);
  EXPECT_THROW(lstm_step(w, Tensor::zeros({5}), LSTMState::zeros(3)), DimensionError);
  EXPECT_THROW(lstm_step(w, Tensor::zeros({4}), LSTMState::zeros(2)), DimensionError);
}

// ---- bilstm ---------------------------------------------------------------

TEST(BiLstm, LengthOneShape) {
  auto f = random_lstm(4, 3, 20), b = random_lstm(4, 3, 30);
  auto y = bilstm(f, b, random_tensor({1, 4}, 1));
  EXPECT_EQ(y.shape(), (Shape{1, 6}));
}

TEST(BiLstm, WidthAndLengthForAllLengths) {
  auto f = random_lstm(4, 3, 20), b = random_lstm(4, 3, 30);
  for (std::size_t T = 1; T <= 10; ++T) EXPECT_EQ(bilstm(f, b, random_tensor({T, 4}, T)).shape(), (Shape{T, 6}));
}

TEST(BiLstm, ReversalSwapsDirections) {
  auto f = random_lstm(4, 3, 20), b = random_lstm(4, 3, 30);
  auto xs = random_tensor({5, 4}, 40);
  auto orig = bilstm_directional(f, b, xs);
  auto rev = bilstm_directional(b, f, reverse_rows(xs));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(rev.forward.at(i, j), orig.backward.at(4 - i, j));
}

TEST(BiLstm, ZeroWeightsGiveZeros) {
  auto w = LSTMWeights::zeros(4, 3);
  auto y = bilstm(w, w, random_tensor({6, 4}, 2));
  for (auto v : y.values()) EXPECT_EQ(v, 0);
}

TEST(BiLstm, MatchesStepwiseCell) {
  auto f = random_lstm(4, 3, 50), b = random_lstm(4, 3, 60);
  auto xs = random_tensor({4, 4}, 70);
  auto out = bilstm_directional(f, b, xs);
  LSTMState s = LSTMState::zeros(3);
  for (std::size_t t = 0; t < 4; ++t) {
    s = lstm_step(f, ops::slice(xs, 0, t, 1), s);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(out.forward.at(t, j), s.h.at(j), 1e-14);
  }
  s = LSTMState::zeros(3);
  for (std::size_t t = 4; t-- > 0;) {
    s = lstm_step(b, ops::slice(xs, 0, t, 1), s);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(out.backward.at(t, j), s.h.at(j), 1e-14);
  }
}

TEST(BiLstm, EmptyOrMismatchedThrows) {
  auto f = random_lstm(4, 3, 20);
  EXPECT_THROW(bilstm(f, f, Tensor::zeros({3})), DimensionError);
  EXPECT_THROW(bilstm(f, f, Tensor::zeros({2, 5})), DimensionError);
}

// ---- char_cnn -------------------------------------------------------------

TEST(CharCnn, ShortWordIsPadded) {
  Rng rng(3);
  auto w = CharCNNWeights::init(20, 4, 7, 3, rng);
  EXPECT_EQ(char_cnn(w, {5}).shape(), (Shape{7}));
  EXPECT_EQ(char_cnn(w, {5, 6}).shape(), (Shape{7}));
}

TEST(CharCnn, ZeroFiltersGiveZero) {
  Rng rng(3);
  auto w = CharCNNWeights::init(20, 4, 7, 3, rng);
  w.filters = Tensor::zeros(w.filters.shape(), true);
  auto y = char_cnn(w, {2, 3, 4, 5});
  for (auto v : y.values()) EXPECT_EQ(v, 0);
}

TEST(CharCnn, IdenticalWordsIdenticalVectors) {
  Rng rng(4);
  auto w = CharCNNWeights::init(20, 4, 7, 3, rng);
  auto a = char_cnn(w, {2, 9, 4, 11});
  auto b = char_cnn(w, {2, 9, 4, 11});
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(a.at(i), b.at(i));
}

TEST(CharCnn, TrailingPadsIgnored) {
  Rng rng(5);
  auto w = CharCNNWeights::init(20, 4, 7, 3, rng);
  w.bias = random_tensor({7}, 9).set_requires_grad(true);
  auto a = char_cnn(w, {2, 9, 4, 11});
  auto b = char_cnn(w, {2, 9, 4, 11, kPadChar, kPadChar, kPadChar, kPadChar});
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(a.at(i), b.at(i));
}

TEST(CharCnn, UnknownIdsMapToUnk) {
  Rng rng(6);
  auto w = CharCNNWeights::init(20, 4, 7, 3, rng);
  auto a = char_cnn(w, {2, 999, 4});
  auto b = char_cnn(w, {2, kUnkChar, 4});
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(a.at(i), b.at(i));
}

// ---- feed_forward_relu ----------------------------------------------------

TEST(FeedForward, IdentityWeights) {
  auto y = feed_forward_relu(Tensor::matrix({{1, 0}, {0, 1}}), Tensor::vector({0, 0}), Tensor::vector({-1, 2}));
  EXPECT_EQ(y.at(0), 0);
  EXPECT_EQ(y.at(1), 2);
}

TEST(FeedForward, ZeroInputGivesReluBias) {
  auto b = Tensor::vector({-0.5, 0.25, 1.5});
  auto y = feed_forward_relu(random_tensor({3, 4}, 1), b, Tensor::zeros({4}));
  EXPECT_EQ(y.at(0), 0);
  EXPECT_EQ(y.at(1), 0.25);
  EXPECT_EQ(y.at(2), 1.5);
}

TEST(FeedForward, DimMismatchThrows) {
  EXPECT_THROW(feed_forward_relu(Tensor::zeros({3, 4}), Tensor::zeros({3}), Tensor::zeros({5})), DimensionError);
}

// ---- attention_pool -------------------------------------------------------

TEST(AttentionPool, ZeroVectorAverages) {
  auto states = random_tensor({4, 3}, 7);
  auto y = attention_pool({Tensor::zeros({3})}, states);
  for (std::size_t j = 0; j < 3; ++j) {
    double m = 0;
    for (std::size_t i = 0; i < 4; ++i) m += states.at(i, j) / 4;
    EXPECT_NEAR(y.at(j), m, 1e-15);
  }
}

TEST(AttentionPool, SingleStateUnchanged) {
  auto states = random_tensor({1, 3}, 8);
  auto y = attention_pool({random_tensor({3}, 9)}, states);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(y.at(j), states.at(0, j));
}

TEST(AttentionPool, ClosedFormTwoStates) {
  // v = (1, 0): scores are the first coordinates, (ln 2, 0) -> weights (2/3, 1/3).
  auto states = Tensor::matrix({{std::log(2.0), 3}, {0, -6}});
  auto y = attention_pool({Tensor::vector({1, 0})}, states);
  EXPECT_NEAR(y.at(0), 2.0 / 3.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(y.at(1), 2.0 / 3.0 * 3 + 1.0 / 3.0 * -6, 1e-14);
}

TEST(AttentionPool, OutputInConvexHull) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto states = random_tensor({3, 5}, seed, -3, 3);
    auto y = attention_pool({random_tensor({5}, 100 + seed, -2, 2)}, states);
    for (std::size_t j = 0; j < 5; ++j) {
      double lo = states.at(0, j), hi = lo;
      for (std::size_t i = 1; i < 3; ++i) {
        lo = std::min<double>(lo, states.at(i, j));
        hi = std::max<double>(hi, states.at(i, j));
      }
      EXPECT_GE(y.at(j), lo - 1e-12);
      EXPECT_LE(y.at(j), hi + 1e-12);
    }
  }
}

TEST(AttentionPool, EmptyThrows) {
  EXPECT_THROW(attention_pool({Tensor::zeros({3})}, Tensor::zeros({3})), DimensionError);
}

// ---- full-layer gradient checks at h = 3, d = 4 ---------------------------

TEST(LayerGradCheck, LstmStep) {
  auto w = random_lstm(4, 3, 200);
  auto x = random_tensor({4}, 201);
  LSTMState prev{random_tensor({1, 3}, 202).set_requires_grad(true), random_tensor({1, 3}, 203).set_requires_grad(true)};
  auto rep = grad_check_params(
      [&] {
        auto s = lstm_step(w, x, prev);
        return ops::add(ops::sum(ops::mul(s.h, s.h)), ops::sum(s.c));
      },
      {w.w_ih, w.w_hh, w.bias, prev.h, prev.c});
  EXPECT_TRUE(rep.passed) << rep.max_rel_error;
}

TEST(LayerGradCheck, BiLstm) {
  auto f = random_lstm(4, 3, 210), b = random_lstm(4, 3, 220);
  auto xs = random_tensor({4, 4}, 230).set_requires_grad(true);
  auto wts = random_tensor({4, 6}, 231);
  auto rep = grad_check_params([&] { return ops::sum(ops::mul(bilstm(f, b, xs), wts)); },
                               {f.w_ih, f.w_hh, f.bias, b.w_ih, b.w_hh, b.bias, xs});
  EXPECT_TRUE(rep.passed) << rep.max_rel_error;
}

TEST(LayerGradCheck, CharCnn) {
  Rng rng(240);
  auto w = CharCNNWeights::init(12, 4, 3, 3, rng);
  w.bias = random_tensor({3}, 241).set_requires_grad(true);
  w.filters = random_tensor(w.filters.shape(), 242).set_requires_grad(true);
  auto wts = random_tensor({2, 3}, 243);
  auto rep = grad_check_params([&] { return ops::sum(ops::mul(char_cnn_words(w, {{2, 3, 4, 5}, {6, 7}}), wts)); },
                               {w.embedding, w.filters, w.bias});
  EXPECT_TRUE(rep.passed) << rep.max_rel_error;
}

TEST(LayerGradCheck, FeedForwardRelu) {
  auto W = random_tensor({3, 4}, 250).set_requires_grad(true);
  auto b = random_tensor({3}, 251).set_requires_grad(true);
  auto x = random_tensor({2, 4}, 252).set_requires_grad(true);
  auto wts = random_tensor({2, 3}, 253);
  auto rep = grad_check_params([&] { return ops::sum(ops::mul(feed_forward_relu(W, b, x), wts)); }, {W, b, x});
  EXPECT_TRUE(rep.passed) << rep.max_rel_error;
}

TEST(LayerGradCheck, AttentionPool) {
  AttentionPoolWeights w{random_tensor({3}, 260).set_requires_grad(true)};
  auto states = random_tensor({4, 3}, 261).set_requires_grad(true);
  auto wts = random_tensor({3}, 262);
  auto rep = grad_check_params([&] { return ops::sum(ops::mul(attention_pool(w, states), wts)); }, {w.v, states});
  EXPECT_TRUE(rep.passed) << rep.max_rel_error;
}
