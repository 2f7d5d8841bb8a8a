#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dmn::ad {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t element_count(const Shape& shape);

/// Raised when operand shapes are incompatible with an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {
struct TensorImpl {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until a gradient reaches this tensor
  bool requires_grad = false;
};
}  // namespace detail

/// Dense row-major tensor of doubles. Copies are cheap handles onto the same storage;
/// use clone() for an independent copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  /// Column vector [n x 1].
  static Tensor column(std::vector<double> values);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl().shape; }
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const { return impl().value.size(); }
  /// Rank-2 extents; a rank-1 tensor of length n is treated as [1 x n].
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> values() { return impl().value; }
  std::span<const double> values() const { return impl().value; }
  double operator[](std::size_t i) const { return impl().value[i]; }
  double item() const;

  bool requires_grad() const { return impl().requires_grad; }
  void set_requires_grad(bool flag) { impl().requires_grad = flag; }
  bool has_grad() const { return !impl().grad.empty(); }
  /// Gradient buffer; all zeros if no gradient has been accumulated.
  std::vector<double> grad() const;
  std::span<double> grad_buffer();
  void zero_grad();

  Tensor clone() const;
  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  friend class Graph;
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}
  detail::TensorImpl& impl() const;

  std::shared_ptr<detail::TensorImpl> impl_;
};

}  // namespace dmn::ad
