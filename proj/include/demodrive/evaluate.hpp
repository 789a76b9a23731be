#pragma once

#include <cstddef>

#include <nlohmann/json.hpp>

#include "demodrive/deploy.hpp"
#include "demodrive/reward.hpp"

namespace demodrive {

struct EvalReport {
  double autonomy_value = 0.0;  // percent, [0, 100]
  std::size_t interventions = 0;
  double testing_time = 0.0;  // seconds of evaluation clock, penalties included
  std::size_t reward_events = 0;
  double mean_reward = 0.0;
  std::size_t laps_completed = 0;
  nlohmann::json config = nlohmann::json::object();
};

void to_json(nlohmann::json& j, const EvalReport& r);

// max(0, 1 - interventions * penalty / testing_time) * 100.
// Throws ArgumentError for testing_time <= 0.
double autonomy(std::size_t interventions, double testing_time, double penalty = kInterventionPenaltySeconds);

// Laps count only uninterrupted driving: the progress accumulator restarts at
// every intervention, and each stretch contributes floor(progress / L) laps.
EvalReport summarize(const DriveTrace& trace, const RewardParams& params);

}  // namespace demodrive
