#include "demodrive/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "demodrive/errors.hpp"

namespace demodrive {

void to_json(nlohmann::json& j, const EvalReport& r) {
  j = {{"autonomy_value", r.autonomy_value}, {"interventions", r.interventions},
       {"testing_time", r.testing_time},     {"reward_events", r.reward_events},
       {"mean_reward", r.mean_reward},       {"laps_completed", r.laps_completed},
       {"config", r.config}};
}

double autonomy(std::size_t interventions, double testing_time, double penalty) {
  if (!(testing_time > 0.0) || !std::isfinite(testing_time)) throw ArgumentError("testing time must be positive");
  // 100 (T - nP) / T rather than (1 - nP / T) 100: same value, but the
  // worked cases (95 and 0 interventions in 600 s) come out exact.
  const double value = 100.0 * (testing_time - static_cast<double>(interventions) * penalty) / testing_time;
  return std::max(0.0, value);
}

EvalReport summarize(const DriveTrace& trace, const RewardParams& params) {
  EvalReport report;
  report.interventions = trace.interventions();
  // A trace cut short by leaving the track only covers the time actually driven.
  report.testing_time = trace.ended_off_track || trace.duration <= 0.0
                            ? trace.elapsed_time()
                            : std::max(trace.duration, trace.elapsed_time());
  if (trace.steps.empty()) return report;

  double reward_sum = 0.0;
  double stretch = 0.0;
  std::size_t laps = 0;
  const double length = trace.track_length;
  auto close_stretch = [&] {
    if (length > 0.0 && stretch > 0.0) laps += static_cast<std::size_t>(std::floor(stretch / length));
    stretch = 0.0;
  };
  for (const StepResult& r : trace.steps) {
    if (is_reward_event(r.reward, params)) ++report.reward_events;
    reward_sum += r.reward;
    stretch += r.progress;
    if (r.off_track) close_stretch();
  }
  close_stretch();
  report.laps_completed = laps;
  report.mean_reward = reward_sum / static_cast<double>(trace.steps.size());
  if (report.testing_time > 0.0) report.autonomy_value = autonomy(report.interventions, report.testing_time);
  return report;
}

}  // namespace demodrive
