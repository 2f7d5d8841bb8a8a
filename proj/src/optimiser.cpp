#include "dmn/optimiser.h"

#include <cmath>
#include <stdexcept>

namespace dmn {

void adam_step(std::vector<ad::Tensor>& params, AdamState& state, const AdamConfig& config) {
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.size(), 0.0);
      state.v.emplace_back(p.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw ad::ShapeError("adam state does not match parameter list");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (state.m[k].size() != params[k].size()) throw ad::ShapeError("adam state does not match parameter shape");
    if (!params[k].has_grad()) continue;
    for (double g : params[k].grad_buffer()) {
      if (!std::isfinite(g)) throw std::domain_error("non-finite gradient");
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    if (!p.has_grad()) continue;
    auto grad = p.grad_buffer();
    auto value = p.values();
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
      value[i] -= config.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.epsilon);
    }
  }
}

double global_grad_norm(const std::vector<ad::Tensor>& params) {
  double sq = 0.0;
  for (const auto& p : params) {
    for (double g : p.grad()) sq += g * g;
  }
  return std::sqrt(sq);
}

double clip_gradients(std::vector<ad::Tensor>& params, double max_norm) {
  if (!(max_norm > 0.0)) throw std::invalid_argument("max_norm must be positive");
  const double norm = global_grad_norm(params);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& p : params) {
      if (!p.has_grad()) continue;
      for (double& g : p.grad_buffer()) g *= factor;
    }
  }
  return norm;
}

double clip_gradients(std::vector<std::vector<double>>& grads, double max_norm) {
  if (!(max_norm > 0.0)) throw std::invalid_argument("max_norm must be positive");
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double x : g) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& g : grads) {
      for (double& x : g) x *= factor;
    }
  }
  return norm;
}

}  // namespace dmn
