#include "demodrive/policy.hpp"

#include "demodrive/errors.hpp"

namespace demodrive {

nn::MlpSpec policy_spec() {
  return {{kObservationSize, 64, 64, kActionSize}, nn::Activation::Tanh, nn::Activation::Tanh};
}

nn::MlpSpec critic_spec() {
  return {{kObservationSize + kActionSize, 64, 64, 1}, nn::Activation::Tanh, nn::Activation::Identity};
}

std::array<double, kActionSize> normalize_action(const Action& a) {
  const Action c = a.clamped();
  return {2.0 * c.speed / kMaxSpeed - 1.0, c.steer / kMaxSteerRate};
}

Action denormalize_action(double speed_unit, double steer_unit) {
  return Action{0.5 * (speed_unit + 1.0) * kMaxSpeed, steer_unit * kMaxSteerRate}.clamped();
}

Eigen::VectorXd observation_vector(const Observation& obs) {
  const auto flat = obs.flat();
  return Eigen::Map<const Eigen::VectorXd>(flat.data(), kObservationSize);
}

Action predict(const nn::NetworkParams& policy, const Observation& obs) {
  if (policy.spec.input_size() != kObservationSize || policy.spec.output_size() != kActionSize) {
    throw ShapeError("policy network must map observations to actions");
  }
  const Eigen::VectorXd y = nn::forward(policy, observation_vector(obs));
  return denormalize_action(y(0), y(1));
}

}  // namespace demodrive
