#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "dmn/tensor.h"

namespace dmn::ad {

using Rng = std::mt19937_64;

/// Reverse-mode tape. Every primitive evaluates eagerly and, when any input requires a
/// gradient, appends a backward closure. backward() replays the tape in reverse exactly
/// once and then clears it. A Graph is meant to be used from one thread.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Disables recording; results never require gradients while disabled.
  void set_grad_enabled(bool enabled) { grad_enabled_ = enabled; }
  bool grad_enabled() const { return grad_enabled_; }
  std::size_t recorded() const { return tape_.size(); }

  /// [m x k] * [k x n]
  Tensor matmul(const Tensor& a, const Tensor& b);
  /// Same-shape sum, or a rank-2 `a` plus a bias `b` of a.cols() elements broadcast over rows.
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor div(const Tensor& a, const Tensor& b);
  Tensor scale(const Tensor& a, double factor);
  Tensor add_scalar(const Tensor& a, double offset);
  Tensor neg(const Tensor& a) { return scale(a, -1.0); }

  Tensor tanh(const Tensor& a);
  Tensor sigmoid(const Tensor& a);
  Tensor abs(const Tensor& a);
  Tensor square(const Tensor& a);
  Tensor sqrt(const Tensor& a);
  Tensor log(const Tensor& a);
  /// Gradient passes only where lo < a < hi.
  Tensor clamp(const Tensor& a, double lo, double hi);

  Tensor sum(const Tensor& a);
  Tensor mean(const Tensor& a);

  /// Concatenates rank-2 tensors along axis 0 (rows) or 1 (columns).
  Tensor concat(std::span<const Tensor> parts, int axis);
  Tensor concat(std::initializer_list<Tensor> parts, int axis) {
    return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
  }
  Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
  Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);

  /// Populates grads of every tensor that requires one with d loss / d tensor, summing over
  /// fan-out, then clears the tape. Throws ShapeError if `loss` is not a scalar.
  void backward(const Tensor& loss);

  /// Drops recorded operations without propagating.
  void clear() { tape_.clear(); }

 private:
  bool tracks(std::initializer_list<const Tensor*> inputs) const;
  Tensor make_output(Shape shape, std::vector<double> values, bool tracked);
  void record(std::function<void()> step) { tape_.push_back(std::move(step)); }

  std::vector<std::function<void()>> tape_;
  bool grad_enabled_ = true;
};

/// Inverted-dropout keep mask: each entry is 0 with probability `rate`, else 1/(1-rate).
Tensor sample_dropout_mask(const Shape& shape, double rate, Rng& rng);

enum class DropoutMode { PerStep, Variational };

/// Dropout layer. In per-step mode a fresh mask is drawn on every call; in variational mode
/// one mask is drawn per sequence and reused until reset(). Outside training it is the
/// identity.
class Dropout {
 public:
  Dropout(double rate, DropoutMode mode);

  Tensor apply(Graph& graph, const Tensor& x, Rng& rng, bool training);
  void reset() { mask_ = Tensor{}; }
  double rate() const { return rate_; }

 private:
  double rate_;
  DropoutMode mode_;
  Tensor mask_;
};

/// Functional per-step dropout.
Tensor dropout(Graph& graph, const Tensor& x, double rate, Rng& rng, bool training);

}  // namespace dmn::ad
