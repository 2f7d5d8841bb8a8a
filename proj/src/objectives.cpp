#include "dmn/objectives.h"

#include <cmath>
#include <stdexcept>

namespace dmn {

using ad::Graph;
using ad::Tensor;

std::string_view to_string(LossKind loss) {
  switch (loss) {
    case LossKind::Mse: return "mse";
    case LossKind::Binary: return "binary";
    case LossKind::Returns: return "returns";
    case LossKind::Sharpe: return "sharpe";
    case LossKind::SharpeCost: return "sharpe_cost";
  }
  return "?";
}

LossKind parse_loss(std::string_view name) {
  if (name == "mse") return LossKind::Mse;
  if (name == "binary" || name == "bce") return LossKind::Binary;
  if (name == "returns") return LossKind::Returns;
  if (name == "sharpe") return LossKind::Sharpe;
  if (name == "sharpe_cost") return LossKind::SharpeCost;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

OutputHead head_for(LossKind loss) {
  switch (loss) {
    case LossKind::Mse: return OutputHead::Linear;
    case LossKind::Binary: return OutputHead::Sigmoid;
    default: return OutputHead::Tanh;
  }
}

bool is_direct(LossKind loss) { return head_for(loss) == OutputHead::Tanh; }

void Batch::validate() const {
  const std::size_t m = size();
  if (m == 0) throw std::invalid_argument("loss over an empty batch");
  if (!predictions.defined() || predictions.size() != m || vols.size() != m) {
    throw ad::ShapeError("batch arrays must all have length " + std::to_string(m));
  }
  for (double s : vols) {
    if (!(s > 0.0)) throw std::invalid_argument("batch volatilities must be positive");
  }
}

std::vector<double> normalised_targets(const Batch& batch) {
  std::vector<double> y(batch.size());
  const double root = std::sqrt(kTradingDaysPerYear);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = batch.next_returns[i] / (batch.vols[i] / root);
  return y;
}

Tensor mse_loss(Graph& graph, const Batch& batch) {
  batch.validate();
  const Tensor target = Tensor::from(batch.predictions.shape(), normalised_targets(batch));
  return graph.mean(graph.square(graph.sub(batch.predictions, target)));
}

Tensor bce_loss(Graph& graph, const Batch& batch) {
  batch.validate();
  const auto targets = normalised_targets(batch);
  std::vector<double> positive(targets.size());
  std::vector<double> negative(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    positive[i] = targets[i] > 0.0 ? 1.0 : 0.0;
    negative[i] = 1.0 - positive[i];
  }
  const auto& shape = batch.predictions.shape();
  const Tensor p = graph.clamp(batch.predictions, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  const Tensor log_p = graph.log(p);
  const Tensor log_q = graph.log(graph.add_scalar(graph.neg(p), 1.0));
  const Tensor ll = graph.add(graph.mul(log_p, Tensor::from(shape, std::move(positive))),
                              graph.mul(log_q, Tensor::from(shape, std::move(negative))));
  return graph.neg(graph.mean(ll));
}

Tensor captured_returns(Graph& graph, const Batch& batch) {
  batch.validate();
  std::vector<double> scale(batch.size());
  for (std::size_t i = 0; i < scale.size(); ++i) scale[i] = kVolTarget / batch.vols[i] * batch.next_returns[i];
  return graph.mul(batch.predictions, Tensor::from(batch.predictions.shape(), std::move(scale)));
}

Tensor avg_returns_loss(Graph& graph, const Batch& batch) { return graph.neg(graph.mean(captured_returns(graph, batch))); }

Tensor sharpe_of(Graph& graph, const Tensor& returns) {
  if (returns.size() < 2) throw std::invalid_argument("Sharpe loss needs at least 2 samples");
  const Tensor mu = graph.mean(returns);
  const Tensor second = graph.mean(graph.square(returns));
  const Tensor var = graph.add_scalar(graph.sub(second, graph.square(mu)), kSharpeEpsilon);
  return graph.neg(graph.div(graph.scale(mu, std::sqrt(kTradingDaysPerYear)), graph.sqrt(var)));
}

Tensor sharpe_loss(Graph& graph, const Batch& batch) { return sharpe_of(graph, captured_returns(graph, batch)); }

Tensor cost_adjusted_sharpe_loss(Graph& graph, const Batch& batch, double cost) {
  if (cost < 0.0) throw std::invalid_argument("transaction cost must be non-negative");
  const Tensor gross = captured_returns(graph, batch);
  const auto& shape = batch.predictions.shape();
  std::vector<double> inv_vol(batch.size());
  for (std::size_t i = 0; i < inv_vol.size(); ++i) inv_vol[i] = 1.0 / batch.vols[i];
  Tensor scaled = graph.mul(batch.predictions, Tensor::from(shape, std::move(inv_vol)));
  if (batch.prev_predictions.defined()) {
    if (batch.prev_inverse_vols.size() != batch.size() || batch.prev_predictions.size() != batch.size()) {
      throw ad::ShapeError("previous positions must align with the batch");
    }
    scaled = graph.sub(scaled, graph.mul(batch.prev_predictions, Tensor::from(shape, batch.prev_inverse_vols)));
  }
  const Tensor net = graph.sub(gross, graph.scale(graph.abs(scaled), cost * kVolTarget));
  return sharpe_of(graph, net);
}

Tensor l1_penalty(Graph& graph, const Tensor& weights, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("L1 weight must be non-negative");
  return graph.scale(graph.sum(graph.abs(weights)), alpha);
}

Tensor compute_loss(Graph& graph, LossKind kind, const Batch& batch, double cost) {
  switch (kind) {
    case LossKind::Mse: return mse_loss(graph, batch);
    case LossKind::Binary: return bce_loss(graph, batch);
    case LossKind::Returns: return avg_returns_loss(graph, batch);
    case LossKind::Sharpe: return sharpe_loss(graph, batch);
    case LossKind::SharpeCost: return cost_adjusted_sharpe_loss(graph, batch, cost);
  }
  throw std::logic_error("unreachable");
}

}  // namespace dmn
