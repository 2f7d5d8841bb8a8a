#pragma once

#include <string_view>
#include <vector>

#include "dmn/graph.h"
#include "dmn/networks.h"

namespace dmn {

/// Annualised volatility target applied to every asset position.
inline constexpr double kVolTarget = 0.15;
/// Variance floor inside the Sharpe loss square root.
inline constexpr double kSharpeEpsilon = 1e-12;
/// Probabilities are clamped to [eps, 1 - eps] before taking logs.
inline constexpr double kProbabilityEpsilon = 1e-7;

enum class LossKind { Mse, Binary, Returns, Sharpe, SharpeCost };

std::string_view to_string(LossKind loss);
LossKind parse_loss(std::string_view name);
/// Regression -> linear, classification -> sigmoid, direct outputs -> tanh.
OutputHead head_for(LossKind loss);
bool is_direct(LossKind loss);

/// Predictions with their targets. All vectors have one entry per prediction row.
struct Batch {
  ad::Tensor predictions;  ///< [M x 1], attached to the graph
  std::vector<double> next_returns;  ///< r_{t,t+1}
  std::vector<double> vols;          ///< annualised sigma_t
  /// Previous-day positions X_{t-1} ([M x 1]) for the turnover term; undefined means zero.
  ad::Tensor prev_predictions;
  /// 1 / sigma_{t-1}, or 0 where the sample has no previous position.
  std::vector<double> prev_inverse_vols;

  std::size_t size() const { return next_returns.size(); }
  void validate() const;
};

/// Regression target r_{t,t+1} / sigma_daily with sigma_daily = sigma_t / sqrt(252).
std::vector<double> normalised_targets(const Batch& batch);

ad::Tensor mse_loss(ad::Graph& graph, const Batch& batch);
ad::Tensor bce_loss(ad::Graph& graph, const Batch& batch);
/// Captured returns R = X * (sigma_tgt / sigma_t) * r_{t,t+1}.
ad::Tensor captured_returns(ad::Graph& graph, const Batch& batch);
ad::Tensor avg_returns_loss(ad::Graph& graph, const Batch& batch);
/// -mean(R) * sqrt(252) / sqrt(mean(R^2) - mean(R)^2 + eps), over any [M x 1] return tensor.
ad::Tensor sharpe_of(ad::Graph& graph, const ad::Tensor& returns);
ad::Tensor sharpe_loss(ad::Graph& graph, const Batch& batch);
/// Sharpe loss on R - c * sigma_tgt * |X_t / sigma_t - X_{t-1} / sigma_{t-1}|.
ad::Tensor cost_adjusted_sharpe_loss(ad::Graph& graph, const Batch& batch, double cost);
/// alpha * sum |w|.
ad::Tensor l1_penalty(ad::Graph& graph, const ad::Tensor& weights, double alpha);

ad::Tensor compute_loss(ad::Graph& graph, LossKind kind, const Batch& batch, double cost = 0.0);

}  // namespace dmn
