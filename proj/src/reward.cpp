#include "demodrive/reward.hpp"

#include <algorithm>
#include <cmath>

#include "demodrive/errors.hpp"
#include "demodrive/json_util.hpp"

namespace demodrive {

void RewardParams::validate() const {
  const double fields[] = {ideal_distance, ideal_speed, distance_weight, speed_weight, cutoff, event_threshold};
  for (double v : fields) {
    if (!std::isfinite(v) || v < 0.0) throw ArgumentError("reward parameters must be finite and non-negative");
  }
  if (!(ideal_distance > 0.0) || !(ideal_speed > 0.0)) throw ArgumentError("ideal distance and speed must be positive");
  if (std::abs(distance_weight + speed_weight - 1.0) > 1e-9) throw ArgumentError("reward weights must sum to 1");
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw ArgumentError("reward cutoff must lie in (0, 1)");
  if (!(event_threshold > cutoff && event_threshold <= 1.0)) {
    throw ArgumentError("event threshold must lie in (cutoff, 1]");
  }
}

double compute_reward(double distance_to_edge, double speed, const RewardParams& params) {
  if (!std::isfinite(distance_to_edge) || !std::isfinite(speed)) {
    throw ArgumentError("reward inputs must be finite");
  }
  const double r_distance = std::min(1.0, std::max(0.0, distance_to_edge) / params.ideal_distance);
  const double r_speed = std::min(1.0, std::max(0.0, speed) / params.ideal_speed);
  if (r_distance < params.cutoff || r_speed < params.cutoff) return 0.0;
  return params.distance_weight * r_distance + params.speed_weight * r_speed;
}

bool is_reward_event(double reward, const RewardParams& params) { return reward >= params.event_threshold; }

std::size_t count_events(std::span<const double> rewards, const RewardParams& params) {
  return static_cast<std::size_t>(
      std::count_if(rewards.begin(), rewards.end(), [&](double r) { return is_reward_event(r, params); }));
}

void to_json(nlohmann::json& j, const RewardParams& p) {
  j = {{"ideal_distance", p.ideal_distance}, {"ideal_speed", p.ideal_speed},
       {"distance_weight", p.distance_weight}, {"speed_weight", p.speed_weight},
       {"cutoff", p.cutoff}, {"event_threshold", p.event_threshold}};
}

void from_json(const nlohmann::json& j, RewardParams& p) {
  json_util::reject_unknown_keys(j, {"ideal_distance", "ideal_speed", "distance_weight", "speed_weight", "cutoff",
                                     "event_threshold"},
                                 "reward");
  json_util::read_opt(j, "ideal_distance", p.ideal_distance);
  json_util::read_opt(j, "ideal_speed", p.ideal_speed);
  json_util::read_opt(j, "distance_weight", p.distance_weight);
  json_util::read_opt(j, "speed_weight", p.speed_weight);
  json_util::read_opt(j, "cutoff", p.cutoff);
  json_util::read_opt(j, "event_threshold", p.event_threshold);
}

}  // namespace demodrive
