#include "dman/train/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace dman {
namespace {

void check_params(const std::vector<Tensor>& params) {
  for (const auto& p : params) {
    if (!p.requires_grad()) throw std::invalid_argument("optimizer parameter does not require grad");
  }
}

}  // namespace

Sgd::Sgd(std::vector<Tensor> params, Real lr) : params_(std::move(params)), lr_(lr) { check_params(params_); }

void Sgd::step() {
  for (auto& p : params_) {
    auto x = p.mutable_values();
    auto g = p.grad();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= lr_ * g[i];
  }
}

void Sgd::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

AdaDelta::AdaDelta(std::vector<Tensor> params, AdaDeltaOptions opts) : params_(std::move(params)), opts_(opts) {
  check_params(params_);
  if (!(opts_.rho > 0 && opts_.rho < 1)) throw std::invalid_argument("AdaDelta rho must be in (0,1)");
  if (!(opts_.eps > 0)) throw std::invalid_argument("AdaDelta eps must be positive");
  for (const auto& p : params_) {
    eg2_.emplace_back(p.numel(), Real(0));
    edx2_.emplace_back(p.numel(), Real(0));
  }
}

void AdaDelta::step() {
  const Real rho = opts_.rho, eps = opts_.eps;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto x = params_[k].mutable_values();
    auto g = params_[k].grad();
    auto& eg2 = eg2_[k];
    auto& edx2 = edx2_[k];
    for (std::size_t i = 0; i < x.size(); ++i) {
      eg2[i] = rho * eg2[i] + (1 - rho) * g[i] * g[i];
      const Real dx = -std::sqrt(edx2[i] + eps) / std::sqrt(eg2[i] + eps) * g[i];
      edx2[i] = rho * edx2[i] + (1 - rho) * dx * dx;
      x[i] += opts_.lr * dx;
    }
  }
}

void AdaDelta::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace dman
