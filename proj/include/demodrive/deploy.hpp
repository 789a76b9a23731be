#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "demodrive/nn.hpp"
#include "demodrive/sim.hpp"

namespace demodrive {

// Evaluation-clock time charged per intervention (a human re-centering the car).
inline constexpr double kInterventionPenaltySeconds = 6.0;

// Operator-tuned conditioning applied between the policy and the motors.
struct DriveGains {
  double speed_gain = 1.0;
  double steering_gain = 1.0;
  double steering_bias = 0.0;     // rad/s
  double smoothing_alpha = 0.3;   // 1 = no smoothing, 0 = steering frozen

  void validate() const;  // throws ArgumentError
  bool operator==(const DriveGains&) const = default;
};

void to_json(nlohmann::json& j, const DriveGains& g);
void from_json(const nlohmann::json& j, DriveGains& g);
// "speed_gain,steering_gain,steering_bias"; throws ArgumentError on bad input.
DriveGains parse_gains(const std::string& text, DriveGains base = {});

// speed = clamp(raw.speed * speed_gain)
// steer = clamp((1 - alpha) * prev_steer + alpha * (raw.steer * steering_gain + steering_bias))
Action condition(const Action& raw, const DriveGains& gains, double prev_steer);

using DrivePolicy = std::function<Action(const Environment&)>;

DrivePolicy network_policy(const nn::NetworkParams& params);

struct DriveTrace {
  std::vector<StepResult> steps;
  std::vector<double> intervention_times;  // simulated seconds at which the car left the track
  double dt = 0.05;
  double track_length = 0.0;
  double duration = 0.0;         // evaluation clock requested from drive()
  bool ended_off_track = false;  // only without interventions

  std::size_t interventions() const { return intervention_times.size(); }
  double driven_time() const { return dt * static_cast<double>(steps.size()); }
  // Driven time plus the intervention penalties.
  double elapsed_time() const {
    return driven_time() + kInterventionPenaltySeconds * static_cast<double>(interventions());
  }
};

// Runs policy -> condition -> step until the evaluation clock reaches
// `duration`. With `intervene`, each off-track step is an intervention: the
// car is re-centered on the nearest centerline point at rest and the clock is
// charged the penalty without any sim steps. Otherwise the trace ends at the
// first off-track step.
DriveTrace drive(Environment& env, const DrivePolicy& policy, const DriveGains& gains, double duration, bool intervene);

std::string trace_jsonl(const DriveTrace& trace);

}  // namespace demodrive
