#pragma once

#include <vector>

#include "dman/autodiff/tensor.hpp"

namespace dman {

// Plain gradient descent: x <- x - lr * g.
class Sgd {
 public:
  Sgd(std::vector<Tensor> params, Real lr);
  void step();
  void zero_grad();
  Real lr() const { return lr_; }
  void set_lr(Real lr) { lr_ = lr; }

 private:
  std::vector<Tensor> params_;
  Real lr_;
};

struct AdaDeltaOptions {
  Real rho = 0.95;
  Real eps = 1e-8;
  Real lr = 1.0;  // global multiplier on the update
};

// E[g^2] <- rho E[g^2] + (1-rho) g^2
// dx     <- -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
// E[dx^2]<- rho E[dx^2] + (1-rho) dx^2
// x      <- x + lr * dx
class AdaDelta {
 public:
  AdaDelta(std::vector<Tensor> params, AdaDeltaOptions opts = {});
  void step();
  void zero_grad();
  const AdaDeltaOptions& options() const { return opts_; }
  void set_lr(Real lr) { opts_.lr = lr; }
  const std::vector<std::vector<Real>>& sq_grad() const { return eg2_; }
  const std::vector<std::vector<Real>>& sq_update() const { return edx2_; }

 private:
  std::vector<Tensor> params_;
  AdaDeltaOptions opts_;
  std::vector<std::vector<Real>> eg2_;
  std::vector<std::vector<Real>> edx2_;
};

}  // namespace dman
