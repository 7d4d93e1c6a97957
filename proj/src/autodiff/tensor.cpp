#include "dman/autodiff/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace dman {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<Real> values, bool requires_grad) {
  for (auto e : shape)
    if (e == 0) throw std::invalid_argument("tensor extents must be positive, got " + shape_str(shape));
  if (shape_numel(shape) != values.size())
    throw std::invalid_argument("tensor of shape " + shape_str(shape) + " needs " +
                                std::to_string(shape_numel(shape)) + " values, got " +
                                std::to_string(values.size()));
  impl_ = std::make_shared<detail::TensorImpl>();
  impl_->shape = std::move(shape);
  impl_->values = std::move(values);
  set_requires_grad(requires_grad);
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0, requires_grad); }

Tensor Tensor::full(Shape shape, Real value, bool requires_grad) {
  const auto n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<Real>(n, value), requires_grad);
}

Tensor Tensor::scalar(Real value, bool requires_grad) { return Tensor({}, {value}, requires_grad); }

Tensor Tensor::vector(std::vector<Real> values, bool requires_grad) {
  const auto n = values.size();
  return Tensor({n}, std::move(values), requires_grad);
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<Real>> rows, bool requires_grad) {
  std::vector<Real> v;
  std::size_t cols = rows.size() ? rows.begin()->size() : 0;
  for (const auto& r : rows) {
    if (r.size() != cols) throw std::invalid_argument("ragged matrix literal");
    v.insert(v.end(), r.begin(), r.end());
  }
  return Tensor({rows.size(), cols}, std::move(v), requires_grad);
}

const detail::TensorImpl& Tensor::checked() const {
  if (!impl_) throw std::logic_error("use of an undefined tensor");
  return *impl_;
}

detail::TensorImpl& Tensor::checked() {
  if (!impl_) throw std::logic_error("use of an undefined tensor");
  return *impl_;
}

const Shape& Tensor::shape() const { return checked().shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size())
    throw std::out_of_range("axis " + std::to_string(axis) + " out of range for shape " + shape_str(s));
  return s[axis];
}

std::size_t Tensor::numel() const { return checked().values.size(); }

std::span<const Real> Tensor::values() const { return checked().values; }
std::span<Real> Tensor::mutable_values() { return checked().values; }

bool Tensor::requires_grad() const { return checked().requires_grad; }

Tensor& Tensor::set_requires_grad(bool on) {
  auto& im = checked();
  im.requires_grad = on;
  if (on)
    im.grad.assign(im.values.size(), 0);
  else
    im.grad.clear();
  return *this;
}

std::span<const Real> Tensor::grad() const {
  const auto& im = checked();
  if (!im.requires_grad) throw std::logic_error("tensor has no grad slot");
  return im.grad;
}

std::span<Real> Tensor::mutable_grad() {
  auto& im = checked();
  if (!im.requires_grad) throw std::logic_error("tensor has no grad slot");
  return im.grad;
}

void Tensor::zero_grad() {
  auto& im = checked();
  std::fill(im.grad.begin(), im.grad.end(), Real(0));
}

Real Tensor::item() const {
  const auto& im = checked();
  if (im.values.size() != 1)
    throw std::invalid_argument("item() on non-scalar tensor of shape " + shape_str(im.shape));
  return im.values[0];
}

Real Tensor::at(std::size_t i) const {
  const auto& im = checked();
  if (i >= im.values.size()) throw std::out_of_range("flat index out of range");
  return im.values[i];
}

Real Tensor::at(std::size_t i, std::size_t j) const {
  const auto& im = checked();
  if (im.shape.size() != 2 || i >= im.shape[0] || j >= im.shape[1])
    throw std::out_of_range("index (" + std::to_string(i) + "," + std::to_string(j) +
                            ") out of range for shape " + shape_str(im.shape));
  return im.values[i * im.shape[1] + j];
}

Tensor Tensor::clone() const {
  const auto& im = checked();
  Tensor t(im.shape, im.values, false);
  if (im.requires_grad) {
    t.impl_->requires_grad = true;
    t.impl_->grad = im.grad;
  }
  return t;
}

Tensor Tensor::detach() const {
  const auto& im = checked();
  return Tensor(im.shape, im.values, false);
}

}  // namespace dman
