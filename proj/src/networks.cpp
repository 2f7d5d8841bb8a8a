#include "dmn/networks.h"

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>

namespace dmn {

namespace {

using ad::Graph;
using ad::Tensor;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Weekly blocks see u_{t-5:t}: six rows.
constexpr std::size_t kWeeklyRows = 6;
constexpr std::array<std::size_t, 4> kMonthlyLags{0, 5, 10, 15};
constexpr std::array<std::size_t, 3> kQuarterlyLags{0, 21, 42};
constexpr std::array<const char*, 4> kGates{"f", "i", "o", "c"};

bool dropout_active(const ModelParams& params, const ForwardOptions& options) {
  if (!options.training || params.spec().dropout_rate == 0.0) return false;
  if (options.rng == nullptr) throw std::invalid_argument("training-mode dropout requires an rng");
  return true;
}

Tensor affine(Graph& g, const Tensor& x, const Tensor& w, const Tensor& b) { return g.add(g.matmul(x, w), b); }

void require_width(const char* op, const Tensor& x, std::size_t width) {
  if (x.rank() != 2 || x.cols() != width) {
    throw ad::ShapeError(std::string(op) + ": expected input [B x " + std::to_string(width) + "], got " +
                         ad::to_string(x.shape()));
  }
}

// Gated residual block: tanh(uW) * sigmoid(uV) + uA + b.
Tensor gated_block(Graph& g, const ModelParams& p, const std::string& prefix, const Tensor& u) {
  Tensor gate = g.mul(g.tanh(g.matmul(u, p.at(prefix + ".W"))), g.sigmoid(g.matmul(u, p.at(prefix + ".V"))));
  Tensor skip = g.add(g.matmul(u, p.at(prefix + ".A")), p.at(prefix + ".b"));
  return g.add(gate, skip);
}

}  // namespace

std::string_view to_string(Architecture arch) {
  switch (arch) {
    case Architecture::Linear: return "linear";
    case Architecture::Mlp: return "mlp";
    case Architecture::WaveNet: return "wavenet";
    case Architecture::Lstm: return "lstm";
  }
  return "?";
}

std::string_view to_string(OutputHead head) {
  switch (head) {
    case OutputHead::Linear: return "linear";
    case OutputHead::Sigmoid: return "sigmoid";
    case OutputHead::Tanh: return "tanh";
  }
  return "?";
}

Architecture parse_architecture(std::string_view name) {
  if (name == "linear") return Architecture::Linear;
  if (name == "mlp") return Architecture::Mlp;
  if (name == "wavenet") return Architecture::WaveNet;
  if (name == "lstm") return Architecture::Lstm;
  throw std::invalid_argument("unknown architecture '" + std::string(name) + "'");
}

OutputHead parse_output_head(std::string_view name) {
  if (name == "linear") return OutputHead::Linear;
  if (name == "sigmoid") return OutputHead::Sigmoid;
  if (name == "tanh") return OutputHead::Tanh;
  throw std::invalid_argument("unknown output head '" + std::string(name) + "'");
}

std::size_t ModelSpec::window_rows() const {
  switch (architecture) {
    case Architecture::Linear:
    case Architecture::Mlp: return lookback + 1;
    case Architecture::WaveNet: return kWaveNetWindow;
    case Architecture::Lstm: return 1;
  }
  return 1;
}

nlohmann::json ModelSpec::to_json() const {
  return {{"architecture", to_string(architecture)},
          {"output_head", to_string(head)},
          {"hidden_size", hidden_size},
          {"dropout_rate", dropout_rate},
          {"lookback", lookback},
          {"trajectory_length", trajectory_length}};
}

ModelSpec ModelSpec::from_json(const nlohmann::json& j) {
  ModelSpec s;
  s.architecture = parse_architecture(j.at("architecture").get<std::string>());
  s.head = parse_output_head(j.at("output_head").get<std::string>());
  s.hidden_size = j.at("hidden_size").get<std::size_t>();
  s.dropout_rate = j.at("dropout_rate").get<double>();
  s.lookback = j.value("lookback", kDefaultLookback);
  s.trajectory_length = j.value("trajectory_length", kTrajectoryLength);
  return s;
}

void ModelParams::add(const std::string& name, ad::Shape shape, ad::Rng* rng, std::size_t fan_in) {
  Tensor t = Tensor::zeros(std::move(shape), true);
  if (rng != nullptr && fan_in > 0) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& v : t.values()) v = u(*rng);
  }
  params_.emplace(name, std::move(t));
}

namespace {

void build_params(const ModelSpec& spec, ad::Rng* rng,
                  const std::function<void(const std::string&, ad::Shape, ad::Rng*, std::size_t)>& add) {
  const std::size_t h = spec.hidden_size;
  const std::size_t in = spec.input_width();
  if (spec.architecture != Architecture::Linear && h == 0) throw std::invalid_argument("hidden_size must be positive");
  switch (spec.architecture) {
    case Architecture::Linear:
      add("w", {in, 1}, rng, in);
      add("b", {1}, nullptr, 0);
      break;
    case Architecture::Mlp:
      add("W_h", {in, h}, rng, in);
      add("b_h", {h}, nullptr, 0);
      add("W_z", {h, 1}, rng, h);
      add("b_z", {1}, nullptr, 0);
      break;
    case Architecture::WaveNet: {
      const std::array<std::pair<const char*, std::size_t>, 3> blocks{
          {{"weekly", kWeeklyRows * kFeatureCount}, {"monthly", kMonthlyLags.size() * h},
           {"quarterly", kQuarterlyLags.size() * h}}};
      for (const auto& [name, width] : blocks) {
        const std::string prefix(name);
        add(prefix + ".W", {width, h}, rng, width);
        add(prefix + ".V", {width, h}, rng, width);
        add(prefix + ".A", {width, h}, rng, width);
        add(prefix + ".b", {h}, nullptr, 0);
      }
      add("W_h", {3 * h, h}, rng, 3 * h);
      add("b_h", {h}, nullptr, 0);
      add("W_z", {h, 1}, rng, h);
      add("b_z", {1}, nullptr, 0);
      break;
    }
    case Architecture::Lstm:
      for (const char* gate : kGates) {
        add(std::string("W_") + gate, {kFeatureCount, h}, rng, kFeatureCount);
        add(std::string("V_") + gate, {h, h}, rng, h);
        add(std::string("b_") + gate, {h}, nullptr, 0);
      }
      add("W_z", {h, 1}, rng, h);
      add("b_z", {1}, nullptr, 0);
      break;
  }
}

}  // namespace

ModelParams::ModelParams(const ModelSpec& spec, ad::Rng& rng) : spec_(spec) {
  build_params(spec, &rng, [this](const std::string& n, ad::Shape s, ad::Rng* r, std::size_t f) {
    add(n, std::move(s), r, f);
  });
}

ModelParams ModelParams::zeros(const ModelSpec& spec) {
  ModelParams p;
  p.spec_ = spec;
  build_params(spec, nullptr, [&p](const std::string& n, ad::Shape s, ad::Rng*, std::size_t) {
    p.add(n, std::move(s), nullptr, 0);
  });
  return p;
}

ModelParams::ModelParams(const ModelParams& other) : spec_(other.spec_) {
  for (const auto& [name, t] : other.params_) params_.emplace(name, t.clone());
}

ModelParams& ModelParams::operator=(const ModelParams& other) {
  if (this != &other) {
    ModelParams copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Tensor& ModelParams::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return it->second;
}

const Tensor& ModelParams::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return it->second;
}

std::vector<Tensor> ModelParams::trainable() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& [name, t] : params_) out.push_back(t);
  return out;
}

void ModelParams::zero_grad() {
  for (auto& [name, t] : params_) t.zero_grad();
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params_) n += t.size();
  return n;
}

nlohmann::json ModelParams::to_json() const {
  return {{"model", spec_.to_json()}, {"parameters", ad::checkpoint_to_json(params_)}};
}

ModelParams ModelParams::from_json(const nlohmann::json& j) {
  ModelParams p = zeros(ModelSpec::from_json(j.at("model")));
  const auto loaded = ad::checkpoint_from_json(j.at("parameters"));
  for (auto& [name, t] : p.params_) {
    auto it = loaded.find(name);
    if (it == loaded.end()) throw std::invalid_argument("checkpoint missing parameter '" + name + "'");
    if (it->second.shape() != t.shape()) {
      throw ad::ShapeError("checkpoint parameter '" + name + "' has shape " + ad::to_string(it->second.shape()) +
                           ", expected " + ad::to_string(t.shape()));
    }
    t = it->second;
  }
  return p;
}

Tensor apply_head(Graph& graph, const Tensor& pre_activation, OutputHead head) {
  switch (head) {
    case OutputHead::Linear: return pre_activation;
    case OutputHead::Sigmoid: return graph.sigmoid(pre_activation);
    case OutputHead::Tanh: return graph.tanh(pre_activation);
  }
  return pre_activation;
}

Tensor linear_forward(Graph& graph, const ModelParams& params, const Tensor& window, const ForwardOptions&) {
  require_width("linear_forward", window, params.spec().input_width());
  return apply_head(graph, affine(graph, window, params.at("w"), params.at("b")), params.spec().head);
}

Tensor mlp_forward(Graph& graph, const ModelParams& params, const Tensor& window, const ForwardOptions& options) {
  require_width("mlp_forward", window, params.spec().input_width());
  const bool drop = dropout_active(params, options);
  const double rate = params.spec().dropout_rate;
  Tensor x = drop ? ad::dropout(graph, window, rate, *options.rng, true) : window;
  Tensor h = graph.tanh(affine(graph, x, params.at("W_h"), params.at("b_h")));
  if (drop) h = ad::dropout(graph, h, rate, *options.rng, true);
  return apply_head(graph, affine(graph, h, params.at("W_z"), params.at("b_z")), params.spec().head);
}

Tensor wavenet_forward(Graph& graph, const ModelParams& params, const Tensor& window, const ForwardOptions& options) {
  require_width("wavenet_forward", window, kWaveNetWindow * kFeatureCount);
  const bool drop = dropout_active(params, options);
  const double rate = params.spec().dropout_rate;
  Tensor x = drop ? ad::dropout(graph, window, rate, *options.rng, true) : window;

  // Weekly state at lag l reads rows t-l-5 .. t-l, i.e. window rows 57-l .. 62-l.
  std::map<std::size_t, Tensor> weekly;
  auto weekly_at = [&](std::size_t lag) -> const Tensor& {
    auto it = weekly.find(lag);
    if (it != weekly.end()) return it->second;
    const std::size_t first_row = kWaveNetWindow - kWeeklyRows - lag;
    Tensor u = graph.slice_cols(x, first_row * kFeatureCount, (first_row + kWeeklyRows) * kFeatureCount);
    return weekly.emplace(lag, gated_block(graph, params, "weekly", u)).first->second;
  };
  std::vector<Tensor> monthly;
  for (std::size_t mlag : kQuarterlyLags) {
    std::vector<Tensor> parts;
    for (std::size_t wlag : kMonthlyLags) parts.push_back(weekly_at(mlag + wlag));
    monthly.push_back(gated_block(graph, params, "monthly", graph.concat(parts, 1)));
  }
  Tensor quarterly = gated_block(graph, params, "quarterly", graph.concat(monthly, 1));

  Tensor s = graph.concat({weekly_at(0), monthly[0], quarterly}, 1);
  if (drop) s = ad::dropout(graph, s, rate, *options.rng, true);
  Tensor h = graph.tanh(affine(graph, s, params.at("W_h"), params.at("b_h")));
  return apply_head(graph, affine(graph, h, params.at("W_z"), params.at("b_z")), params.spec().head);
}

std::vector<Tensor> lstm_forward(Graph& graph, const ModelParams& params, std::span<const Tensor> steps,
                                 const ForwardOptions& options, LstmState* state) {
  if (steps.empty()) return {};
  const std::size_t hidden = params.spec().hidden_size;
  const std::size_t batch = steps.front().rows();
  for (const auto& x : steps) {
    require_width("lstm_forward", x, kFeatureCount);
    if (x.rows() != batch) throw ad::ShapeError("lstm_forward: inconsistent batch size across steps");
  }

  Tensor h, c;
  if (state != nullptr && state->h.defined()) {
    h = state->h;
    c = state->c;
  } else {
    h = Tensor::zeros({batch, hidden});
    c = Tensor::zeros({batch, hidden});
  }

  const bool drop = dropout_active(params, options);
  const double rate = params.spec().dropout_rate;
  ad::Dropout input_drop(rate, ad::DropoutMode::Variational);
  ad::Dropout state_drop(rate, ad::DropoutMode::Variational);
  ad::Dropout output_drop(rate, ad::DropoutMode::Variational);

  std::vector<Tensor> outputs;
  outputs.reserve(steps.size());
  for (const auto& step : steps) {
    const Tensor x = drop ? input_drop.apply(graph, step, *options.rng, true) : step;
    const Tensor h_prev = drop ? state_drop.apply(graph, h, *options.rng, true) : h;
    std::array<Tensor, 4> pre;
    for (std::size_t k = 0; k < kGates.size(); ++k) {
      const std::string g(kGates[k]);
      pre[k] = graph.add(graph.add(graph.matmul(x, params.at("W_" + g)), graph.matmul(h_prev, params.at("V_" + g))),
                         params.at("b_" + g));
    }
    const Tensor forget = graph.sigmoid(pre[0]);
    const Tensor input = graph.sigmoid(pre[1]);
    const Tensor output = graph.sigmoid(pre[2]);
    const Tensor candidate = graph.tanh(pre[3]);
    c = graph.add(graph.mul(forget, c), graph.mul(input, candidate));
    h = graph.mul(output, graph.tanh(c));
    const Tensor h_out = drop ? output_drop.apply(graph, h, *options.rng, true) : h;
    outputs.push_back(apply_head(graph, affine(graph, h_out, params.at("W_z"), params.at("b_z")), params.spec().head));
  }
  if (state != nullptr) {
    state->h = h;
    state->c = c;
  }
  return outputs;
}

Tensor forward(Graph& graph, const ModelParams& params, std::span<const Tensor> steps, const ForwardOptions& options) {
  const auto arch = params.spec().architecture;
  if (arch == Architecture::Lstm) {
    const auto outputs = lstm_forward(graph, params, steps, options);
    if (outputs.size() == 1) return outputs.front();
    return graph.concat(outputs, 0);
  }
  if (steps.size() != 1) throw std::invalid_argument("feed-forward models take exactly one input tensor");
  switch (arch) {
    case Architecture::Linear: return linear_forward(graph, params, steps.front(), options);
    case Architecture::Mlp: return mlp_forward(graph, params, steps.front(), options);
    case Architecture::WaveNet: return wavenet_forward(graph, params, steps.front(), options);
    case Architecture::Lstm: break;
  }
  throw std::logic_error("unreachable");
}

std::vector<double> predict_asset(const ModelParams& params, const AssetFeatures& features, std::size_t begin,
                                  std::size_t end) {
  end = std::min(end, features.size());
  std::vector<double> out(end > begin ? end - begin : 0, kNaN);
  if (out.empty()) return out;
  Graph graph;
  graph.set_grad_enabled(false);
  const auto& spec = params.spec();

  if (spec.is_recurrent()) {
    // Each date gets a fresh pass over its trailing valid rows, at most one trajectory long.
    std::map<std::size_t, std::vector<std::size_t>> by_length;
    std::size_t run = 0;
    for (std::size_t t = 0; t < end; ++t) {
      run = features.valid[t] ? run + 1 : 0;
      if (t >= begin && run > 0) by_length[std::min(run, spec.trajectory_length)].push_back(t);
    }
    for (const auto& [length, dates] : by_length) {
      std::vector<Tensor> steps;
      steps.reserve(length);
      for (std::size_t k = 0; k < length; ++k) {
        std::vector<double> flat;
        flat.reserve(dates.size() * kFeatureCount);
        for (std::size_t t : dates) {
          const auto& row = features.rows[t + 1 - length + k];
          flat.insert(flat.end(), row.begin(), row.end());
        }
        steps.push_back(Tensor::from({dates.size(), kFeatureCount}, std::move(flat)));
      }
      const auto z = lstm_forward(graph, params, steps);
      for (std::size_t b = 0; b < dates.size(); ++b) out[dates[b] - begin] = z.back()[b];
    }
    return out;
  }

  const std::size_t rows = spec.window_rows();
  std::vector<std::size_t> dates;
  std::vector<double> flat;
  std::size_t run = 0;  // consecutive valid rows ending at t
  for (std::size_t t = 0; t < end; ++t) {
    run = features.valid[t] ? run + 1 : 0;
    if (t < begin || run < rows) continue;
    dates.push_back(t);
    for (std::size_t r = t + 1 - rows; r <= t; ++r) flat.insert(flat.end(), features.rows[r].begin(), features.rows[r].end());
  }
  if (dates.empty()) return out;
  const Tensor window = Tensor::from({dates.size(), rows * kFeatureCount}, std::move(flat));
  const Tensor z = forward(graph, params, std::span<const Tensor>(&window, 1));
  for (std::size_t k = 0; k < dates.size(); ++k) out[dates[k] - begin] = z[k];
  return out;
}

double to_position(double z, OutputHead head) {
  if (!std::isfinite(z)) return kNaN;
  auto sign = [](double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); };
  switch (head) {
    case OutputHead::Linear: return sign(z);
    case OutputHead::Sigmoid: return sign(z - 0.5);
    case OutputHead::Tanh: return z;
  }
  return kNaN;
}

}  // namespace dmn
