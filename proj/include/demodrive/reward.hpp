#pragma once

#include <cstddef>
#include <span>

#include <nlohmann/json.hpp>

namespace demodrive {

// Parameters of the distance/speed reward. Distances in meters, speeds in m/s.
struct RewardParams {
  double ideal_distance = 0.10;  // D_i
  double ideal_speed = 0.10;     // V_i
  double distance_weight = 0.5;  // W_d
  double speed_weight = 0.5;     // W_s
  double cutoff = 0.1;
  double event_threshold = 0.9;  // rho: a step with R >= rho counts as a reward event

  // Throws ArgumentError on a broken invariant (weights must sum to one, ...).
  void validate() const;

  bool operator==(const RewardParams&) const = default;
};

// R = 0 when either normalized component is below the cutoff, otherwise the
// weighted sum W_d * min(1, D/D_i) + W_s * min(1, V/V_i). Negative D or V
// clamp to zero. Throws ArgumentError on non-finite input.
double compute_reward(double distance_to_edge, double speed, const RewardParams& params);

bool is_reward_event(double reward, const RewardParams& params);

std::size_t count_events(std::span<const double> rewards, const RewardParams& params);

void to_json(nlohmann::json& j, const RewardParams& p);
void from_json(const nlohmann::json& j, RewardParams& p);

}  // namespace demodrive
