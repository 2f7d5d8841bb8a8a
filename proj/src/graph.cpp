#include "dmn/graph.h"

#include <algorithm>
#include <cmath>

namespace dmn::ad {

namespace {

using Impl = std::shared_ptr<detail::TensorImpl>;

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
}

void require_rank2(const char* op, const Tensor& a) {
  if (a.rank() != 2) throw ShapeError(std::string(op) + ": expected rank-2 tensor, got " + to_string(a.shape()));
}

std::vector<double>& grad_of(detail::TensorImpl& t) {
  if (t.grad.empty()) t.grad.assign(t.value.size(), 0.0);
  return t.grad;
}

}  // namespace

bool Graph::tracks(std::initializer_list<const Tensor*> inputs) const {
  if (!grad_enabled_) return false;
  return std::any_of(inputs.begin(), inputs.end(), [](const Tensor* t) { return t->requires_grad(); });
}

Tensor Graph::make_output(Shape shape, std::vector<double> values, bool tracked) {
  return Tensor::from(std::move(shape), std::move(values), tracked);
}

// Elementwise op; DERIV may use the input `xv` and the output `yv`.
#define DMN_ELEMENTWISE_UNARY(NAME, FWD, DERIV)                                      \
  Tensor Graph::NAME(const Tensor& a) {                                               \
    const auto& x = a.values();                                                       \
    std::vector<double> y(x.size());                                                  \
    for (std::size_t i = 0; i < x.size(); ++i) {                                      \
      const double xv = x[i];                                                         \
      y[i] = (FWD);                                                                   \
    }                                                                                 \
    const bool tracked = tracks({&a});                                                \
    Tensor out = make_output(a.shape(), std::move(y), tracked);                       \
    if (tracked) {                                                                    \
      record([ai = a.impl_, oi = out.impl_] {                                         \
        if (!ai->requires_grad || oi->grad.empty()) return;                           \
        auto& ga = grad_of(*ai);                                                      \
        for (std::size_t i = 0; i < ga.size(); ++i) {                                 \
          const double xv = ai->value[i];                                             \
          const double yv = oi->value[i];                                             \
          (void)xv;                                                                   \
          (void)yv;                                                                   \
          ga[i] += oi->grad[i] * (DERIV);                                             \
        }                                                                             \
      });                                                                             \
    }                                                                                 \
    return out;                                                                       \
  }

DMN_ELEMENTWISE_UNARY(tanh, std::tanh(xv), 1.0 - yv * yv)
DMN_ELEMENTWISE_UNARY(sigmoid, 1.0 / (1.0 + std::exp(-xv)), yv * (1.0 - yv))
DMN_ELEMENTWISE_UNARY(abs, std::fabs(xv), static_cast<double>((xv > 0.0) - (xv < 0.0)))
DMN_ELEMENTWISE_UNARY(square, xv * xv, 2.0 * xv)
DMN_ELEMENTWISE_UNARY(sqrt, std::sqrt(xv), 0.5 / yv)
DMN_ELEMENTWISE_UNARY(log, std::log(xv), 1.0 / xv)

#undef DMN_ELEMENTWISE_UNARY

Tensor Graph::scale(const Tensor& a, double factor) {
  std::vector<double> y(a.values().begin(), a.values().end());
  for (double& v : y) v *= factor;
  const bool tracked = tracks({&a});
  Tensor out = make_output(a.shape(), std::move(y), tracked);
  if (tracked) {
    record([ai = a.impl_, oi = out.impl_, factor] {
      if (!ai->requires_grad || oi->grad.empty()) return;
      auto& ga = grad_of(*ai);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += oi->grad[i] * factor;
    });
  }
  return out;
}

Tensor Graph::add_scalar(const Tensor& a, double offset) {
  std::vector<double> y(a.values().begin(), a.values().end());
  for (double& v : y) v += offset;
  const bool tracked = tracks({&a});
  Tensor out = make_output(a.shape(), std::move(y), tracked);
  if (tracked) {
    record([ai = a.impl_, oi = out.impl_] {
      if (!ai->requires_grad || oi->grad.empty()) return;
      auto& ga = grad_of(*ai);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += oi->grad[i];
    });
  }
  return out;
}

Tensor Graph::clamp(const Tensor& a, double lo, double hi) {
  std::vector<double> y(a.values().begin(), a.values().end());
  for (double& v : y) v = std::clamp(v, lo, hi);
  const bool tracked = tracks({&a});
  Tensor out = make_output(a.shape(), std::move(y), tracked);
  if (tracked) {
    record([ai = a.impl_, oi = out.impl_, lo, hi] {
      if (!ai->requires_grad || oi->grad.empty()) return;
      auto& ga = grad_of(*ai);
      for (std::size_t i = 0; i < ga.size(); ++i) {
        const double x = ai->value[i];
        if (x > lo && x < hi) ga[i] += oi->grad[i];
      }
    });
  }
  return out;
}

Tensor Graph::matmul(const Tensor& a, const Tensor& b) {
  require_rank2("matmul", a);
  require_rank2("matmul", b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw ShapeError("matmul: shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  std::vector<double> c(m * n, 0.0);
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  const bool tracked = tracks({&a, &b});
  Tensor out = make_output({m, n}, std::move(c), tracked);
  if (tracked) {
    record([ai = a.impl_, bi = b.impl_, oi = out.impl_, m, k, n] {
      if (oi->grad.empty()) return;
      const auto& gc = oi->grad;
      if (ai->requires_grad) {
        auto& ga = grad_of(*ai);
        for (std::size_t i = 0; i < m; ++i) {
          const double* grow = gc.data() + i * n;
          for (std::size_t p = 0; p < k; ++p) {
            const double* brow = bi->value.data() + p * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
            ga[i * k + p] += acc;
          }
        }
      }
      if (bi->requires_grad) {
        auto& gb = grad_of(*bi);
        for (std::size_t i = 0; i < m; ++i) {
          const double* grow = gc.data() + i * n;
          for (std::size_t p = 0; p < k; ++p) {
            const double aip = ai->value[i * k + p];
            if (aip == 0.0) continue;
            double* gbrow = gb.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
          }
        }
      }
    });
  }
  return out;
}

namespace {

// Returns true when b broadcasts as a row bias over rank-2 a.
bool is_row_broadcast(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return false;
  const bool bias_like = b.rank() == 1 || (b.rank() == 2 && b.rows() == 1);
  if (a.rank() == 2 && bias_like && b.size() == a.cols()) return true;
  throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
}

}  // namespace

Tensor Graph::add(const Tensor& a, const Tensor& b) {
  const bool broadcast = is_row_broadcast("add", a, b);
  const std::size_t n = broadcast ? b.size() : a.size();
  std::vector<double> y(a.values().begin(), a.values().end());
  const auto bv = b.values();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i % n];
  const bool tracked = tracks({&a, &b});
  Tensor out = make_output(a.shape(), std::move(y), tracked);
  if (tracked) {
    record([ai = a.impl_, bi = b.impl_, oi = out.impl_, n] {
      if (oi->grad.empty()) return;
      if (ai->requires_grad) {
        auto& ga = grad_of(*ai);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += oi->grad[i];
      }
      if (bi->requires_grad) {
        auto& gb = grad_of(*bi);
        for (std::size_t i = 0; i < oi->grad.size(); ++i) gb[i % n] += oi->grad[i];
      }
    });
  }
  return out;
}

Tensor Graph::sub(const Tensor& a, const Tensor& b) {
  const bool broadcast = is_row_broadcast("sub", a, b);
  const std::size_t n = broadcast ? b.size() : a.size();
  std::vector<double> y(a.values().begin(), a.values().end());
  const auto bv = b.values();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i % n];
  const bool tracked = tracks({&a, &b});
  Tensor out = make_output(a.shape(), std::move(y), tracked);
  if (tracked) {
    record([ai = a.impl_, bi = b.impl_, oi = out.impl_, n] {
      if (oi->grad.empty()) return;
      if (ai->requires_grad) {
        auto& ga = grad_of(*ai);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += oi->grad[i];
      }
      if (bi->requires_grad) {
        auto& gb = grad_of(*bi);
        for (std::size_t i = 0; i < oi->grad.size(); ++i) gb[i % n] -= oi->grad[i];
      }
    });
  }
  return out;
}

Tensor Graph::mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  std::vector<double> y(a.size());
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
  const bool tracked = tracks({&a, &b});
  Tensor out = make_output(a.shape(), std::move(y), tracked);
  if (tracked) {
    record([ai = a.impl_, bi = b.impl_, oi = out.impl_] {
      if (oi->grad.empty()) return;
      if (ai->requires_grad) {
        auto& ga = grad_of(*ai);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += oi->grad[i] * bi->value[i];
      }
      if (bi->requires_grad) {
        auto& gb = grad_of(*bi);
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += oi->grad[i] * ai->value[i];
      }
    });
  }
  return out;
}

Tensor Graph::div(const Tensor& a, const Tensor& b) {
  require_same_shape("div", a, b);
  std::vector<double> y(a.size());
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] / bv[i];
  const bool tracked = tracks({&a, &b});
  Tensor out = make_output(a.shape(), std::move(y), tracked);
  if (tracked) {
    record([ai = a.impl_, bi = b.impl_, oi = out.impl_] {
      if (oi->grad.empty()) return;
      if (ai->requires_grad) {
        auto& ga = grad_of(*ai);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += oi->grad[i] / bi->value[i];
      }
      if (bi->requires_grad) {
        auto& gb = grad_of(*bi);
        for (std::size_t i = 0; i < gb.size(); ++i) {
          gb[i] -= oi->grad[i] * oi->value[i] / bi->value[i];
        }
      }
    });
  }
  return out;
}

Tensor Graph::sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  const bool tracked = tracks({&a});
  Tensor out = make_output({1}, {total}, tracked);
  if (tracked) {
    record([ai = a.impl_, oi = out.impl_] {
      if (!ai->requires_grad || oi->grad.empty()) return;
      auto& ga = grad_of(*ai);
      for (double& g : ga) g += oi->grad[0];
    });
  }
  return out;
}

Tensor Graph::mean(const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  const double n = static_cast<double>(a.size());
  const bool tracked = tracks({&a});
  Tensor out = make_output({1}, {total / n}, tracked);
  if (tracked) {
    record([ai = a.impl_, oi = out.impl_, n] {
      if (!ai->requires_grad || oi->grad.empty()) return;
      auto& ga = grad_of(*ai);
      for (double& g : ga) g += oi->grad[0] / n;
    });
  }
  return out;
}

Tensor Graph::concat(std::span<const Tensor> parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  if (axis != 0 && axis != 1) throw ShapeError("concat: axis must be 0 or 1");
  for (const auto& p : parts) require_rank2("concat", p);
  const std::size_t rows0 = parts[0].rows(), cols0 = parts[0].cols();
  std::size_t rows = axis == 0 ? 0 : rows0;
  std::size_t cols = axis == 1 ? 0 : cols0;
  for (const auto& p : parts) {
    if (axis == 0) {
      if (p.cols() != cols0) {
        throw ShapeError("concat: shape mismatch " + to_string(parts[0].shape()) + " vs " + to_string(p.shape()));
      }
      rows += p.rows();
    } else {
      if (p.rows() != rows0) {
        throw ShapeError("concat: shape mismatch " + to_string(parts[0].shape()) + " vs " + to_string(p.shape()));
      }
      cols += p.cols();
    }
  }
  std::vector<double> y(rows * cols);
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const auto v = p.values();
    if (axis == 0) {
      std::copy(v.begin(), v.end(), y.begin() + static_cast<std::ptrdiff_t>(offset * cols));
      offset += p.rows();
    } else {
      const std::size_t pc = p.cols();
      for (std::size_t r = 0; r < rows; ++r) {
        std::copy(v.begin() + static_cast<std::ptrdiff_t>(r * pc), v.begin() + static_cast<std::ptrdiff_t>((r + 1) * pc),
                  y.begin() + static_cast<std::ptrdiff_t>(r * cols + offset));
      }
      offset += pc;
    }
  }
  bool tracked = false;
  if (grad_enabled_) {
    for (const auto& p : parts) tracked = tracked || p.requires_grad();
  }
  Tensor out = make_output({rows, cols}, std::move(y), tracked);
  if (tracked) {
    std::vector<Impl> impls;
    for (const auto& p : parts) impls.push_back(p.impl_);
    record([impls = std::move(impls), offsets = std::move(offsets), oi = out.impl_, axis, rows, cols] {
      if (oi->grad.empty()) return;
      for (std::size_t k = 0; k < impls.size(); ++k) {
        auto& p = *impls[k];
        if (!p.requires_grad) continue;
        auto& gp = grad_of(p);
        if (axis == 0) {
          const std::size_t base = offsets[k] * cols;
          for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += oi->grad[base + i];
        } else {
          const std::size_t pc = p.shape[1];
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < pc; ++c) gp[r * pc + c] += oi->grad[r * cols + offsets[k] + c];
          }
        }
      }
    });
  }
  return out;
}

Tensor Graph::slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  require_rank2("slice_cols", a);
  if (begin >= end || end > a.cols()) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") out of bounds for " + to_string(a.shape()));
  }
  const std::size_t rows = a.rows(), cols = a.cols(), width = end - begin;
  std::vector<double> y(rows * width);
  const auto v = a.values();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < width; ++c) y[r * width + c] = v[r * cols + begin + c];
  }
  const bool tracked = tracks({&a});
  Tensor out = make_output({rows, width}, std::move(y), tracked);
  if (tracked) {
    record([ai = a.impl_, oi = out.impl_, rows, cols, width, begin] {
      if (!ai->requires_grad || oi->grad.empty()) return;
      auto& ga = grad_of(*ai);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < width; ++c) ga[r * cols + begin + c] += oi->grad[r * width + c];
      }
    });
  }
  return out;
}

Tensor Graph::slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  require_rank2("slice_rows", a);
  if (begin >= end || end > a.rows()) {
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") out of bounds for " + to_string(a.shape()));
  }
  const std::size_t cols = a.cols();
  const auto v = a.values();
  std::vector<double> y(v.begin() + static_cast<std::ptrdiff_t>(begin * cols),
                        v.begin() + static_cast<std::ptrdiff_t>(end * cols));
  const bool tracked = tracks({&a});
  Tensor out = make_output({end - begin, cols}, std::move(y), tracked);
  if (tracked) {
    record([ai = a.impl_, oi = out.impl_, base = begin * cols] {
      if (!ai->requires_grad || oi->grad.empty()) return;
      auto& ga = grad_of(*ai);
      for (std::size_t i = 0; i < oi->grad.size(); ++i) ga[base + i] += oi->grad[i];
    });
  }
  return out;
}

void Graph::backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " + to_string(loss.shape()));
  }
  if (!loss.requires_grad()) {
    tape_.clear();
    return;
  }
  auto& g = grad_of(*loss.impl_);
  g[0] = 1.0;
  for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) (*it)();
  tape_.clear();
}

Tensor sample_dropout_mask(const Shape& shape, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout rate must lie in [0, 1)");
  const std::size_t n = element_count(shape);
  std::vector<double> mask(n, 1.0);
  if (rate > 0.0) {
    const double keep_scale = 1.0 / (1.0 - rate);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& m : mask) m = u(rng) < rate ? 0.0 : keep_scale;
  }
  return Tensor::from(shape, std::move(mask));
}

Dropout::Dropout(double rate, DropoutMode mode) : rate_(rate), mode_(mode) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout rate must lie in [0, 1)");
}

Tensor Dropout::apply(Graph& graph, const Tensor& x, Rng& rng, bool training) {
  if (!training || rate_ == 0.0) return x;
  if (mode_ == DropoutMode::PerStep || !mask_.defined() || mask_.shape() != x.shape()) {
    mask_ = sample_dropout_mask(x.shape(), rate_, rng);
  }
  return graph.mul(x, mask_);
}

Tensor dropout(Graph& graph, const Tensor& x, double rate, Rng& rng, bool training) {
  Dropout layer(rate, DropoutMode::PerStep);
  return layer.apply(graph, x, rng, training);
}

}  // namespace dmn::ad
