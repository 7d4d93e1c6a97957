#include "dman/layers/lstm.hpp"

#include "dman/autodiff/ops.hpp"
#include "dman/layers/init.hpp"

namespace dman {
namespace {

constexpr Real kInitRange = 0.08;
constexpr Real kForgetBias = 1.0;

Tensor as_row(const Tensor& x) {
  if (x.rank() == 1) return ops::reshape(x, {1, x.dim(0)});
  return x;
}

// Gate nonlinearities and the state update, given preactivations [1, 4h].
LSTMState cell_update(const Tensor& gates, const Tensor& c_prev, std::size_t h) {
  Tensor i = ops::sigmoid(ops::slice(gates, 1, 0, h));
  Tensor f = ops::sigmoid(ops::slice(gates, 1, h, h));
  Tensor g = ops::tanh(ops::slice(gates, 1, 2 * h, h));
  Tensor o = ops::sigmoid(ops::slice(gates, 1, 3 * h, h));
  Tensor c = ops::add(ops::mul(f, c_prev), ops::mul(i, g));
  Tensor hn = ops::mul(o, ops::tanh(c));
  return {hn, c};
}

Tensor run_direction(const LSTMWeights& w, const Tensor& pre, bool reverse) {
  const std::size_t T = pre.dim(0), h = w.hidden();
  LSTMState state = LSTMState::zeros(h);
  std::vector<Tensor> rows(T);
  for (std::size_t k = 0; k < T; ++k) {
    const std::size_t t = reverse ? T - 1 - k : k;
    Tensor gates = ops::add(ops::slice(pre, 0, t, 1), ops::matmul_nt(state.h, w.w_hh));
    state = cell_update(gates, state.c, h);
    rows[t] = state.h;
  }
  return T == 1 ? rows[0] : ops::concat(rows, 0);
}

}  // namespace

void LSTMWeights::validate() const {
  if (w_hh.rank() != 2 || w_ih.rank() != 2 || bias.rank() != 1)
    throw DimensionError("LSTM weights must be matrices plus a bias vector");
  const std::size_t h = w_hh.dim(1);
  if (h == 0 || w_hh.dim(0) != 4 * h || w_ih.dim(0) != 4 * h || bias.dim(0) != 4 * h)
    throw DimensionError("LSTM weights disagree on hidden size: w_ih " + shape_str(w_ih.shape()) + ", w_hh " +
                         shape_str(w_hh.shape()) + ", bias " + shape_str(bias.shape()));
}

LSTMWeights LSTMWeights::init(std::size_t input_dim, std::size_t hidden, Rng& rng) {
  LSTMWeights w;
  w.w_ih = uniform_param({4 * hidden, input_dim}, kInitRange, rng);
  w.w_hh = uniform_param({4 * hidden, hidden}, kInitRange, rng);
  std::vector<Real> b(4 * hidden, Real(0));
  for (std::size_t i = hidden; i < 2 * hidden; ++i) b[i] = kForgetBias;
  w.bias = Tensor({4 * hidden}, std::move(b), true);
  return w;
}

LSTMWeights LSTMWeights::zeros(std::size_t input_dim, std::size_t hidden) {
  return {zero_param({4 * hidden, input_dim}), zero_param({4 * hidden, hidden}), zero_param({4 * hidden})};
}

LSTMState LSTMState::zeros(std::size_t hidden) {
  return {Tensor::zeros({1, hidden}), Tensor::zeros({1, hidden})};
}

LSTMState lstm_step(const LSTMWeights& w, const Tensor& x_t, const LSTMState& prev) {
  w.validate();
  const std::size_t h = w.hidden();
  Tensor x = as_row(x_t);
  if (x.rank() != 2 || x.dim(0) != 1 || x.dim(1) != w.input_dim())
    throw DimensionError("lstm_step: input " + shape_str(x_t.shape()) + " does not match w_ih " +
                         shape_str(w.w_ih.shape()));
  if (prev.h.shape() != Shape{1, h} || prev.c.shape() != Shape{1, h})
    throw DimensionError("lstm_step: state shapes " + shape_str(prev.h.shape()) + "/" + shape_str(prev.c.shape()) +
                         " do not match hidden size " + std::to_string(h));
  Tensor gates = ops::add(ops::add(ops::matmul_nt(x, w.w_ih), ops::matmul_nt(prev.h, w.w_hh)),
                          ops::reshape(w.bias, {1, 4 * h}));
  return cell_update(gates, prev.c, h);
}

Tensor BiLSTMOutput::combined() const { return ops::concat({forward, backward}, 1); }

BiLSTMOutput bilstm_directional(const LSTMWeights& fwd, const LSTMWeights& bwd, const Tensor& xs) {
  fwd.validate();
  bwd.validate();
  if (xs.rank() != 2 || xs.dim(0) == 0)
    throw DimensionError("bilstm: expected a nonempty [T, d] sequence, got " + shape_str(xs.shape()));
  if (fwd.hidden() != bwd.hidden())
    throw DimensionError("bilstm: direction hidden sizes differ, " + std::to_string(fwd.hidden()) + " vs " +
                         std::to_string(bwd.hidden()));
  if (xs.dim(1) != fwd.input_dim() || xs.dim(1) != bwd.input_dim())
    throw DimensionError("bilstm: input " + shape_str(xs.shape()) + " does not match w_ih " +
                         shape_str(fwd.w_ih.shape()));
  const std::size_t T = xs.dim(0), h = fwd.hidden();
  // Input projections for all time steps in one product per direction.
  auto project = [&](const LSTMWeights& w) {
    return ops::add(ops::matmul_nt(xs, w.w_ih), ops::expand(ops::reshape(w.bias, {1, 4 * h}), 0, T));
  };
  return {run_direction(fwd, project(fwd), false), run_direction(bwd, project(bwd), true)};
}

}  // namespace dman
