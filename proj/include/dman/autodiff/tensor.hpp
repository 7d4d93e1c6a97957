#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dman/real.hpp"

namespace dman {

namespace detail {

struct TensorImpl {
  Shape shape;
  std::vector<Real> values;
  // Allocated (same length as values) iff requires_grad.
  std::vector<Real> grad;
  bool requires_grad = false;
};

}  // namespace detail

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major tensor handle. Copies share storage; use clone() for a deep
// copy. Tensors without a grad slot are never mutated by ops.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<Real> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, Real value, bool requires_grad = false);
  static Tensor scalar(Real value, bool requires_grad = false);
  static Tensor vector(std::vector<Real> values, bool requires_grad = false);
  static Tensor matrix(std::initializer_list<std::initializer_list<Real>> rows,
                       bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const Real> values() const;
  // Direct write access for initializers and optimizers. Never call this on a
  // tensor that is an input to a recorded op before backward has run.
  std::span<Real> mutable_values();

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on);
  std::span<const Real> grad() const;
  std::span<Real> mutable_grad();
  void zero_grad();

  Real item() const;
  Real at(std::size_t i) const;
  Real at(std::size_t i, std::size_t j) const;

  Tensor clone() const;
  // Value copy without a grad slot.
  Tensor detach() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

  const std::shared_ptr<detail::TensorImpl>& impl() const { return impl_; }
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}

 private:
  const detail::TensorImpl& checked() const;
  detail::TensorImpl& checked();

  std::shared_ptr<detail::TensorImpl> impl_;
};

}  // namespace dman
