#pragma once

#include <array>

#include <Eigen/Dense>

#include "demodrive/nn.hpp"
#include "demodrive/sim.hpp"

namespace demodrive {

// Network shapes shared by the behavior-cloning regressor and the DDPG actor
// (observation -> normalized action), and the critic (observation + action -> Q).
nn::MlpSpec policy_spec();
nn::MlpSpec critic_spec();

// Speed [0, v_max] and steer [-w_max, w_max] mapped affinely onto [-1, 1].
std::array<double, kActionSize> normalize_action(const Action& a);
Action denormalize_action(double speed_unit, double steer_unit);

Eigen::VectorXd observation_vector(const Observation& obs);

// Forward pass, de-normalization and clamping.
Action predict(const nn::NetworkParams& policy, const Observation& obs);

}  // namespace demodrive
