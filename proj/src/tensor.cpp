#include "dmn/tensor.h"

#include <algorithm>
#include <functional>
#include <numeric>

namespace dmn::ad {

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = element_count(shape);
  return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
  if (element_count(shape) != values.size()) {
    throw ShapeError("tensor of shape " + to_string(shape) + " needs " +
                     std::to_string(element_count(shape)) + " values, got " + std::to_string(values.size()));
  }
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = std::move(shape);
  impl->value = std::move(values);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::column(std::vector<double> values) {
  const std::size_t n = values.size();
  return from({n, 1}, std::move(values));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({1}, {value}, requires_grad); }

detail::TensorImpl& Tensor::impl() const {
  if (!impl_) throw std::logic_error("use of an undefined tensor");
  return *impl_;
}

std::size_t Tensor::rows() const {
  const auto& s = shape();
  return s.size() == 1 ? 1 : s[0];
}

std::size_t Tensor::cols() const {
  const auto& s = shape();
  return s.size() == 1 ? s[0] : s[1];
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on tensor of shape " + to_string(shape()));
  return impl().value[0];
}

std::vector<double> Tensor::grad() const {
  const auto& im = impl();
  return im.grad.empty() ? std::vector<double>(im.value.size(), 0.0) : im.grad;
}

std::span<double> Tensor::grad_buffer() {
  auto& im = impl();
  if (im.grad.empty()) im.grad.assign(im.value.size(), 0.0);
  return im.grad;
}

void Tensor::zero_grad() {
  auto& g = impl().grad;
  std::fill(g.begin(), g.end(), 0.0);
}

Tensor Tensor::clone() const {
  auto copy = std::make_shared<detail::TensorImpl>(impl());
  return Tensor(std::move(copy));
}

}  // namespace dmn::ad
