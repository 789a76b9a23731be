#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace demodrive::nn {

enum class Activation { Identity, Tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct MlpSpec {
  std::vector<int> layer_sizes;  // input, hidden..., output
  Activation hidden_activation = Activation::Tanh;
  Activation output_activation = Activation::Identity;

  void validate() const;  // throws ShapeError
  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return layer_sizes.size() - 1; }
  bool operator==(const MlpSpec&) const = default;
};

struct DenseLayer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;  // out
};

struct NetworkParams {
  MlpSpec spec;
  std::vector<DenseLayer> layers;

  std::size_t parameter_count() const;
  bool all_finite() const;
  bool operator==(const NetworkParams& other) const;
};

// Activations kept from a forward pass. Columns are batch samples.
struct Tape {
  std::vector<Eigen::MatrixXd> inputs;       // input to layer l (inputs[0] is the network input)
  std::vector<Eigen::MatrixXd> activations;  // output of layer l after its activation
};

struct ParamGrads {
  std::vector<DenseLayer> layers;
  Eigen::MatrixXd input;  // gradient w.r.t. the network input, same shape as the input batch
};

// Glorot-uniform weights, zero biases; deterministic per seed.
NetworkParams init(const MlpSpec& spec, std::uint64_t seed);

// Batched forward pass: `input` is input_size x batch. Throws ShapeError.
Eigen::MatrixXd forward(const NetworkParams& params, const Eigen::MatrixXd& input, Tape* tape = nullptr);

Eigen::VectorXd forward(const NetworkParams& params, const Eigen::VectorXd& input);

// Gradients of sum(output .* output_grad) w.r.t. every parameter and the input.
ParamGrads backward(const NetworkParams& params, const Tape& tape, const Eigen::MatrixXd& output_grad);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<DenseLayer> first_moment;
  std::vector<DenseLayer> second_moment;

  static AdamState for_params(const NetworkParams& params, double learning_rate);
};

// Bias-corrected Adam. Throws TrainingError when any gradient is non-finite;
// params and state are untouched in that case.
void adam_step(NetworkParams& params, const ParamGrads& grads, AdamState& state);

// target <- (1 - tau) * target + tau * online, elementwise.
void soft_update(NetworkParams& target, const NetworkParams& online, double tau);

nlohmann::json to_json(const NetworkParams& params);
NetworkParams from_json(const nlohmann::json& doc);

// Model file: {"format_version": 1, "spec": {...}, "layers": [{"w": [[...]], "b": [...]}, ...]}.
// load throws IoError (missing), VersionError (format_version), CorruptError
// (unparseable, truncated, or shapes inconsistent with the spec).
void save(const NetworkParams& params, const std::string& path);
NetworkParams load(const std::string& path);

inline constexpr int kModelFormatVersion = 1;

}  // namespace demodrive::nn
