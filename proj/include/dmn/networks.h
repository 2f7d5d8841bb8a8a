#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dmn/checkpoint.h"
#include "dmn/graph.h"
#include "dmn/market_data.h"

namespace dmn {

enum class Architecture { Linear, Mlp, WaveNet, Lstm };
/// Output activation g(.): linear for regression, sigmoid for classification, tanh for
/// direct position outputs.
enum class OutputHead { Linear, Sigmoid, Tanh };

std::string_view to_string(Architecture arch);
std::string_view to_string(OutputHead head);
Architecture parse_architecture(std::string_view name);
OutputHead parse_output_head(std::string_view name);

/// Days of history concatenated into the linear/MLP input; the window holds lookback + 1 rows.
inline constexpr std::size_t kDefaultLookback = 5;
inline constexpr std::size_t kWaveNetWindow = 63;
inline constexpr std::size_t kTrajectoryLength = 63;

struct ModelSpec {
  Architecture architecture = Architecture::Linear;
  OutputHead head = OutputHead::Tanh;
  std::size_t hidden_size = 10;
  double dropout_rate = 0.0;
  std::size_t lookback = kDefaultLookback;
  std::size_t trajectory_length = kTrajectoryLength;

  bool is_recurrent() const { return architecture == Architecture::Lstm; }
  /// Feature rows fed to one feed-forward evaluation (1 for the LSTM, which is fed per step).
  std::size_t window_rows() const;
  /// Width of one step tensor: window_rows() * 8.
  std::size_t input_width() const { return window_rows() * kFeatureCount; }

  nlohmann::json to_json() const;
  static ModelSpec from_json(const nlohmann::json& j);
};

/// Named parameter tensors for one architecture. Copying deep-copies every tensor.
class ModelParams {
 public:
  ModelParams() = default;
  /// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases zero.
  ModelParams(const ModelSpec& spec, ad::Rng& rng);
  static ModelParams zeros(const ModelSpec& spec);

  ModelParams(const ModelParams& other);
  ModelParams& operator=(const ModelParams& other);
  ModelParams(ModelParams&&) noexcept = default;
  ModelParams& operator=(ModelParams&&) noexcept = default;

  const ModelSpec& spec() const { return spec_; }
  ad::Tensor& at(const std::string& name);
  const ad::Tensor& at(const std::string& name) const;
  const ad::ParamMap& tensors() const { return params_; }
  /// Handles onto the parameter tensors in name order.
  std::vector<ad::Tensor> trainable() const;
  void zero_grad();
  std::size_t parameter_count() const;

  /// Model manifest plus checkpoint.
  nlohmann::json to_json() const;
  static ModelParams from_json(const nlohmann::json& j);

 private:
  void add(const std::string& name, ad::Shape shape, ad::Rng* rng, std::size_t fan_in);

  ModelSpec spec_;
  ad::ParamMap params_;
};

struct ForwardOptions {
  bool training = false;
  ad::Rng* rng = nullptr;  ///< required when training with dropout
};

ad::Tensor apply_head(ad::Graph& graph, const ad::Tensor& pre_activation, OutputHead head);

/// `window` is [B x (lookback+1)*8], rows of u ordered oldest to newest. Returns [B x 1].
ad::Tensor linear_forward(ad::Graph& graph, const ModelParams& params, const ad::Tensor& window,
                          const ForwardOptions& options = {});
ad::Tensor mlp_forward(ad::Graph& graph, const ModelParams& params, const ad::Tensor& window,
                       const ForwardOptions& options = {});
/// `window` is [B x 63*8].
ad::Tensor wavenet_forward(ad::Graph& graph, const ModelParams& params, const ad::Tensor& window,
                           const ForwardOptions& options = {});

struct LstmState {
  ad::Tensor h;
  ad::Tensor c;
};

/// One [B x 8] tensor per time step. Starts from `state` when given and defined (zeros
/// otherwise) and leaves the final state in it. Dropout masks on inputs, recurrent state and
/// outputs are sampled once per call. Returns one [B x 1] prediction per step.
std::vector<ad::Tensor> lstm_forward(ad::Graph& graph, const ModelParams& params,
                                     std::span<const ad::Tensor> steps, const ForwardOptions& options = {},
                                     LstmState* state = nullptr);

/// Architecture-agnostic entry point. Feed-forward models take exactly one step tensor of
/// flattened windows; the LSTM takes one tensor per time step. Predictions are stacked
/// step-major into [T*B x 1].
ad::Tensor forward(ad::Graph& graph, const ModelParams& params, std::span<const ad::Tensor> steps,
                   const ForwardOptions& options = {});

/// Raw outputs Z for dates [begin, end) of one asset (NaN where no prediction is possible).
/// Feed-forward models need a fully valid window ending at t. The LSTM starts from a zero state
/// on the trailing run of valid rows, capped at one trajectory length, and emits its last output.
std::vector<double> predict_asset(const ModelParams& params, const AssetFeatures& features, std::size_t begin,
                                  std::size_t end);

/// Maps a raw output to a position: sgn(Y) for regression, sgn(Y - 0.5) for
/// classification, Z itself for direct outputs.
double to_position(double z, OutputHead head);

}  // namespace dmn
