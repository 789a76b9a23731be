#include "demodrive/nn.hpp"

#include <cmath>
#include <random>

#include "demodrive/errors.hpp"
#include "demodrive/io.hpp"

namespace demodrive::nn {
namespace {

Eigen::MatrixXd apply(Activation a, const Eigen::MatrixXd& z) {
  if (a == Activation::Tanh) return z.array().tanh().matrix();
  return z;
}

// Multiplies the upstream gradient by the activation derivative, expressed in
// terms of the activation output.
Eigen::MatrixXd activation_backward(Activation a, const Eigen::MatrixXd& out, const Eigen::MatrixXd& grad) {
  if (a == Activation::Tanh) return (grad.array() * (1.0 - out.array().square())).matrix();
  return grad;
}

Activation layer_activation(const MlpSpec& spec, std::size_t l) {
  return l + 1 == spec.layer_count() ? spec.output_activation : spec.hidden_activation;
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "identity"; }

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "identity") return Activation::Identity;
  throw ValidationError("unknown activation '" + name + "'");
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw ShapeError("an MLP needs at least input and output sizes");
  for (int s : layer_sizes) {
    if (s < 1) throw ShapeError("layer sizes must be positive");
  }
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.w.size() + l.b.size());
  return n;
}

bool NetworkParams::all_finite() const {
  for (const auto& l : layers) {
    if (!l.w.allFinite() || !l.b.allFinite()) return false;
  }
  return true;
}

bool NetworkParams::operator==(const NetworkParams& other) const {
  if (!(spec == other.spec) || layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& a = layers[i];
    const auto& b = other.layers[i];
    if (a.w.rows() != b.w.rows() || a.w.cols() != b.w.cols() || a.b.size() != b.b.size()) return false;
    if (a.w != b.w || a.b != b.b) return false;
  }
  return true;
}

NetworkParams init(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  NetworkParams p{spec, {}};
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    const int fan_in = spec.layer_sizes[l];
    const int fan_out = spec.layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.w(r, c) = dist(rng);
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

Eigen::MatrixXd forward(const NetworkParams& params, const Eigen::MatrixXd& input, Tape* tape) {
  if (input.rows() != params.spec.input_size()) {
    throw ShapeError("forward: input has " + std::to_string(input.rows()) + " rows, network expects " +
                     std::to_string(params.spec.input_size()));
  }
  if (tape) {
    tape->inputs.clear();
    tape->activations.clear();
  }
  Eigen::MatrixXd a = input;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const DenseLayer& layer = params.layers[l];
    Eigen::MatrixXd z = layer.w * a;
    z.colwise() += layer.b;
    Eigen::MatrixXd out = apply(layer_activation(params.spec, l), z);
    if (tape) {
      tape->inputs.push_back(std::move(a));
      tape->activations.push_back(out);
    }
    a = std::move(out);
  }
  return a;
}

Eigen::VectorXd forward(const NetworkParams& params, const Eigen::VectorXd& input) {
  return forward(params, Eigen::MatrixXd(input), nullptr).col(0);
}

ParamGrads backward(const NetworkParams& params, const Tape& tape, const Eigen::MatrixXd& output_grad) {
  const std::size_t n = params.layers.size();
  if (tape.inputs.size() != n || tape.activations.size() != n) throw ShapeError("backward: tape does not match network");
  const Eigen::MatrixXd& out = tape.activations.back();
  if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols()) {
    throw ShapeError("backward: output gradient shape does not match forward output");
  }
  ParamGrads g;
  g.layers.resize(n);
  Eigen::MatrixXd delta = output_grad;
  for (std::size_t i = n; i-- > 0;) {
    delta = activation_backward(layer_activation(params.spec, i), tape.activations[i], delta);
    g.layers[i].w = delta * tape.inputs[i].transpose();
    g.layers[i].b = delta.rowwise().sum();
    delta = params.layers[i].w.transpose() * delta;
  }
  g.input = std::move(delta);
  return g;
}

AdamState AdamState::for_params(const NetworkParams& params, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  for (const auto& l : params.layers) {
    s.first_moment.push_back({Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()), Eigen::VectorXd::Zero(l.b.size())});
    s.second_moment.push_back({Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()), Eigen::VectorXd::Zero(l.b.size())});
  }
  return s;
}

void adam_step(NetworkParams& params, const ParamGrads& grads, AdamState& state) {
  const std::size_t n = params.layers.size();
  if (grads.layers.size() != n || state.first_moment.size() != n || state.second_moment.size() != n) {
    throw ShapeError("adam_step: gradient/state layer count mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& gl = grads.layers[i];
    const auto& pl = params.layers[i];
    if (gl.w.rows() != pl.w.rows() || gl.w.cols() != pl.w.cols() || gl.b.size() != pl.b.size()) {
      throw ShapeError("adam_step: gradient shape mismatch in layer " + std::to_string(i));
    }
    if (!gl.w.allFinite() || !gl.b.allFinite()) {
      throw TrainingError("non-finite gradient in layer " + std::to_string(i));
    }
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const double lr = state.learning_rate;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double eps = state.epsilon;
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * grad;
    v = (b2 * v.array() + (1.0 - b2) * grad.array().square()).matrix();
    param.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
  };
  for (std::size_t i = 0; i < n; ++i) {
    update(params.layers[i].w, grads.layers[i].w, state.first_moment[i].w, state.second_moment[i].w);
    update(params.layers[i].b, grads.layers[i].b, state.first_moment[i].b, state.second_moment[i].b);
  }
}

void soft_update(NetworkParams& target, const NetworkParams& online, double tau) {
  if (target.layers.size() != online.layers.size()) throw ShapeError("soft_update: layer count mismatch");
  for (std::size_t i = 0; i < target.layers.size(); ++i) {
    target.layers[i].w = (1.0 - tau) * target.layers[i].w + tau * online.layers[i].w;
    target.layers[i].b = (1.0 - tau) * target.layers[i].b + tau * online.layers[i].b;
  }
}

nlohmann::json to_json(const NetworkParams& params) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : params.layers) {
    nlohmann::json w = nlohmann::json::array();
    for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) row.push_back(l.w(r, c));
      w.push_back(std::move(row));
    }
    nlohmann::json b = nlohmann::json::array();
    for (Eigen::Index r = 0; r < l.b.size(); ++r) b.push_back(l.b(r));
    layers.push_back({{"w", std::move(w)}, {"b", std::move(b)}});
  }
  return {{"format_version", kModelFormatVersion},
          {"spec",
           {{"layer_sizes", params.spec.layer_sizes},
            {"hidden_activation", to_string(params.spec.hidden_activation)},
            {"output_activation", to_string(params.spec.output_activation)}}},
          {"layers", std::move(layers)}};
}

NetworkParams from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("format_version")) throw CorruptError("model document has no format_version");
  if (!doc["format_version"].is_number_integer() || doc["format_version"].get<int>() != kModelFormatVersion) {
    throw VersionError("unsupported model format_version " + doc["format_version"].dump());
  }
  NetworkParams p;
  try {
    const auto& spec = doc.at("spec");
    p.spec.layer_sizes = spec.at("layer_sizes").get<std::vector<int>>();
    p.spec.hidden_activation = activation_from_string(spec.at("hidden_activation").get<std::string>());
    p.spec.output_activation = activation_from_string(spec.at("output_activation").get<std::string>());
    p.spec.validate();
    const auto& layers = doc.at("layers");
    if (layers.size() != p.spec.layer_count()) throw CorruptError("layer count does not match spec");
    for (std::size_t l = 0; l < p.spec.layer_count(); ++l) {
      const int in = p.spec.layer_sizes[l];
      const int out = p.spec.layer_sizes[l + 1];
      const auto& w = layers[l].at("w");
      const auto& b = layers[l].at("b");
      if (w.size() != static_cast<std::size_t>(out) || b.size() != static_cast<std::size_t>(out)) {
        throw CorruptError("layer " + std::to_string(l) + " has wrong output size");
      }
      DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
      for (int r = 0; r < out; ++r) {
        if (w[r].size() != static_cast<std::size_t>(in)) {
          throw CorruptError("layer " + std::to_string(l) + " has wrong input size");
        }
        for (int c = 0; c < in; ++c) layer.w(r, c) = w[r][c].get<double>();
        layer.b(r) = b[r].get<double>();
      }
      p.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptError(std::string("malformed model document: ") + e.what());
  } catch (const ShapeError& e) {
    throw CorruptError(std::string("invalid model spec: ") + e.what());
  } catch (const ValidationError& e) {
    throw CorruptError(std::string("invalid model spec: ") + e.what());
  }
  if (!p.all_finite()) throw CorruptError("model contains non-finite parameters");
  return p;
}

void save(const NetworkParams& params, const std::string& path) { write_file_atomic(path, to_json(params).dump() + "\n"); }

NetworkParams load(const std::string& path) {
  const std::string text = read_file(path);
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw CorruptError("model file " + path + " is not valid JSON (truncated?)");
  return from_json(doc);
}

}  // namespace demodrive::nn
