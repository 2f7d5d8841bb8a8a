#pragma once

#include <cstddef>
#include <vector>

#include "dmn/tensor.h"

namespace dmn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moment estimates, one buffer per parameter tensor.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t step = 0;
};

/// Bias-corrected Adam update applied in place to `params` using their gradient buffers.
/// Throws std::domain_error on a non-finite gradient, leaving the parameters untouched.
void adam_step(std::vector<ad::Tensor>& params, AdamState& state, const AdamConfig& config);

/// Global L2 norm over every gradient buffer.
double global_grad_norm(const std::vector<ad::Tensor>& params);

/// Rescales all gradients by max_norm / norm when the global norm exceeds max_norm.
/// Returns the norm before clipping.
double clip_gradients(std::vector<ad::Tensor>& params, double max_norm);

/// Overload on raw gradient vectors.
double clip_gradients(std::vector<std::vector<double>>& grads, double max_norm);

}  // namespace dmn
