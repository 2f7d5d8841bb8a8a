#include "dmn/training_data.h"

#include <stdexcept>

namespace dmn {

using ad::Graph;
using ad::Tensor;

bool window_valid(const AssetFeatures& features, std::size_t t, std::size_t rows) {
  if (t + 1 < rows || t >= features.size()) return false;
  for (std::size_t r = t + 1 - rows; r <= t; ++r) {
    if (!features.valid[r]) return false;
  }
  return true;
}

namespace {

void append_runs(std::span<const std::size_t> samples, std::size_t asset, std::size_t length, std::vector<Unit>& out) {
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i + 1;
    while (j < samples.size() && samples[j] == samples[j - 1] + 1) ++j;
    for (std::size_t s = i; s + length <= j; s += length) out.push_back({asset, samples[s], length});
    i = j;
  }
}

}  // namespace

DataSplit make_split(const MarketPanel& panel, const ModelSpec& spec, Date cutoff, double validation_fraction) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("validation fraction must lie in (0, 1)");
  }
  DataSplit split{&panel, spec, {}, {}};
  const std::size_t rows = spec.window_rows();
  for (std::size_t a = 0; a < panel.size(); ++a) {
    const auto& f = panel.features[a];
    const auto& r = panel.returns[a];
    const auto& v = panel.vols[a];
    std::vector<std::size_t> usable;
    for (std::size_t t = 0; t + 1 < f.size() && f.dates[t + 1] < cutoff; ++t) {
      if (!f.valid[t] || !v.tradeable(t) || !std::isfinite(r.next[t])) continue;
      if (!spec.is_recurrent() && !window_valid(f, t, rows)) continue;
      usable.push_back(t);
    }
    const auto n_train = static_cast<std::size_t>(static_cast<double>(usable.size()) * (1.0 - validation_fraction));
    const std::span<const std::size_t> all(usable);
    if (spec.is_recurrent()) {
      append_runs(all.first(n_train), a, spec.trajectory_length, split.train);
      append_runs(all.subspan(n_train), a, spec.trajectory_length, split.validation);
    } else {
      for (std::size_t k = 0; k < usable.size(); ++k) (k < n_train ? split.train : split.validation).push_back({a, usable[k], 1});
    }
  }
  return split;
}

Tensor units_loss(Graph& graph, const ModelParams& params, const MarketPanel& panel, std::span<const Unit> units,
                  LossKind kind, double cost, const ForwardOptions& options) {
  if (units.empty()) throw std::invalid_argument("loss over no units");
  const auto& spec = params.spec();
  const bool with_cost = kind == LossKind::SharpeCost;
  Batch batch;

  if (spec.is_recurrent()) {
    const std::size_t length = units.front().length;
    const std::size_t b_count = units.size();
    for (const auto& u : units) {
      if (u.length != length) throw ad::ShapeError("trajectories in one batch must share a length");
    }
    std::vector<Tensor> steps;
    steps.reserve(length);
    for (std::size_t k = 0; k < length; ++k) {
      std::vector<double> flat;
      flat.reserve(b_count * kFeatureCount);
      for (const auto& u : units) {
        const auto& row = panel.features[u.asset].rows[u.start + k];
        flat.insert(flat.end(), row.begin(), row.end());
      }
      steps.push_back(Tensor::from({b_count, kFeatureCount}, std::move(flat)));
    }
    const auto outputs = lstm_forward(graph, params, steps, options);
    batch.predictions = outputs.size() == 1 ? outputs.front() : graph.concat(outputs, 0);
    for (std::size_t k = 0; k < length; ++k) {
      for (const auto& u : units) {
        const std::size_t t = u.start + k;
        batch.next_returns.push_back(panel.returns[u.asset].next[t]);
        batch.vols.push_back(panel.vols[u.asset].sigma[t]);
        if (with_cost) batch.prev_inverse_vols.push_back(k == 0 ? 0.0 : 1.0 / panel.vols[u.asset].sigma[t - 1]);
      }
    }
    if (with_cost) {
      std::vector<Tensor> prev{Tensor::zeros({b_count, 1})};
      prev.insert(prev.end(), outputs.begin(), outputs.end() - 1);
      batch.prev_predictions = prev.size() == 1 ? prev.front() : graph.concat(prev, 0);
    }
    return compute_loss(graph, kind, batch, cost);
  }

  const std::size_t rows = spec.window_rows();
  std::vector<double> flat;
  std::vector<double> prev_flat;
  flat.reserve(units.size() * rows * kFeatureCount);
  auto append_window = [&](std::vector<double>& out, const AssetFeatures& f, std::size_t t) {
    for (std::size_t r = t + 1 - rows; r <= t; ++r) out.insert(out.end(), f.rows[r].begin(), f.rows[r].end());
  };
  for (const auto& u : units) {
    const std::size_t t = u.start;
    const auto& f = panel.features[u.asset];
    append_window(flat, f, t);
    batch.next_returns.push_back(panel.returns[u.asset].next[t]);
    batch.vols.push_back(panel.vols[u.asset].sigma[t]);
    if (with_cost) {
      const bool has_prev = t > 0 && window_valid(f, t - 1, rows) && panel.vols[u.asset].tradeable(t - 1);
      // Without a previous position the unit's own window stands in; its zero weight masks it.
      append_window(prev_flat, f, has_prev ? t - 1 : t);
      batch.prev_inverse_vols.push_back(has_prev ? 1.0 / panel.vols[u.asset].sigma[t - 1] : 0.0);
    }
  }
  const ad::Shape shape{units.size(), rows * kFeatureCount};
  const Tensor x = Tensor::from(shape, std::move(flat));
  batch.predictions = forward(graph, params, std::span<const Tensor>(&x, 1), options);
  if (with_cost) {
    const Tensor x_prev = Tensor::from(shape, std::move(prev_flat));
    batch.prev_predictions = forward(graph, params, std::span<const Tensor>(&x_prev, 1), options);
  }
  return compute_loss(graph, kind, batch, cost);
}

}  // namespace dmn
