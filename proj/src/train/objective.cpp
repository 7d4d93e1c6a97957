#include "dman/train/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dman/autodiff/ops.hpp"

namespace dman {

Real reward(Label l, const std::vector<std::string>& ann) {
  if (ann.empty()) throw std::invalid_argument("reward: empty annotator label list");
  const auto name = label_name(l);
  const auto hits = std::count(ann.begin(), ann.end(), name);
  return static_cast<Real>(hits) / static_cast<Real>(ann.size());
}

std::array<Real, kNumLabels> rewards(const std::vector<std::string>& ann) {
  std::array<Real, kNumLabels> r{};
  for (std::size_t l = 0; l < kNumLabels; ++l) r[l] = reward(static_cast<Label>(l), ann);
  return r;
}

namespace {

void check_distribution(const Tensor& d) {
  if (d.rank() != 1 || d.numel() != kNumLabels) {
    throw std::invalid_argument("expected a 3-way distribution, got shape " + shape_str(d.shape()));
  }
}

}  // namespace

Tensor ce_loss(const Tensor& d, Label gold, bool* clamped) {
  check_distribution(d);
  const auto idx = static_cast<std::size_t>(gold);
  if (clamped) *clamped = d.at(idx) < kProbFloor;
  return ops::scale(ops::log(ops::pick(d, idx), kProbFloor), -1);
}

Tensor mean_loss(const std::vector<Tensor>& losses) {
  if (losses.empty()) throw std::invalid_argument("mean_loss of no losses");
  if (losses.size() == 1) return losses[0];
  std::vector<Tensor> flat;
  flat.reserve(losses.size());
  for (const auto& l : losses) flat.push_back(ops::reshape(l, {1}));
  return ops::mean(ops::concat(flat, 0));
}

Tensor rl_loss_exact(const Tensor& d, const std::vector<std::string>& ann) {
  check_distribution(d);
  const auto r = rewards(ann);
  return ops::scale(ops::sum(ops::mul(d, Tensor::vector({r[0], r[1], r[2]}))), -1);
}

SampledRL rl_loss_sampled(const Tensor& d, const std::vector<std::string>& ann, std::size_t k, Rng& rng,
                          bool baseline) {
  check_distribution(d);
  if (k == 0) throw std::invalid_argument("rl_loss_sampled needs at least one sample");
  const auto r = rewards(ann);
  SampledRL out;
  std::array<std::size_t, kNumLabels> counts{};
  for (std::size_t s = 0; s < k; ++s) {
    const double u = rng.uniform();
    double acc = 0;
    std::size_t l = 0;
    for (; l + 1 < kNumLabels; ++l) {
      acc += static_cast<double>(d.at(l));
      if (u < acc) break;
    }
    // Labels with zero probability are never drawn, even at the last bucket.
    while (d.at(l) <= 0 && l > 0) --l;
    out.samples.push_back(l);
    ++counts[l];
  }
  // Per-label frequencies, so a point mass reproduces the exact loss bit for bit.
  std::array<double, kNumLabels> freq{};
  double mean_reward = 0;
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    freq[l] = static_cast<double>(counts[l]) / static_cast<double>(k);
    mean_reward += freq[l] * static_cast<double>(r[l]);
  }
  const double b = baseline ? mean_reward : 0.0;
  out.estimate = -mean_reward;

  std::array<Real, kNumLabels> weight{};
  for (std::size_t l = 0; l < kNumLabels; ++l) weight[l] = static_cast<Real>(freq[l] * (static_cast<double>(r[l]) - b));
  const auto logd = ops::log(d, kProbFloor);
  out.surrogate = ops::scale(ops::sum(ops::mul(logd, Tensor::vector({weight[0], weight[1], weight[2]}))), -1);
  return out;
}

Tensor combined_loss(const Tensor& ce, const Tensor& rl, Real lambda) {
  if (!(lambda >= 0 && lambda <= 1)) throw std::invalid_argument("lambda must be in [0, 1], got " + std::to_string(lambda));
  if (lambda == 1) return ce;
  if (lambda == 0) return rl;
  return ops::add(ops::scale(ce, lambda), ops::scale(rl, 1 - lambda));
}

Real dropout_keep(std::size_t step, Real keep0, Real decay, std::size_t every, Real floor) {
  const auto k = static_cast<Real>(step / every);
  return std::clamp(keep0 * std::pow(decay, k), floor, Real(1));
}

}  // namespace dman
