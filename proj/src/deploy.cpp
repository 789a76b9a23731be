#include "demodrive/deploy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "demodrive/errors.hpp"
#include "demodrive/json_util.hpp"
#include "demodrive/policy.hpp"

namespace demodrive {

void DriveGains::validate() const {
  if (!(speed_gain >= 0.0) || !(steering_gain >= 0.0)) throw ArgumentError("gains must be non-negative");
  if (!std::isfinite(speed_gain) || !std::isfinite(steering_gain) || !std::isfinite(steering_bias)) {
    throw ArgumentError("gains must be finite");
  }
  if (!(smoothing_alpha >= 0.0 && smoothing_alpha <= 1.0)) throw ArgumentError("smoothing alpha must lie in [0, 1]");
}

void to_json(nlohmann::json& j, const DriveGains& g) {
  j = {{"speed_gain", g.speed_gain}, {"steering_gain", g.steering_gain}, {"steering_bias", g.steering_bias},
       {"smoothing_alpha", g.smoothing_alpha}};
}

void from_json(const nlohmann::json& j, DriveGains& g) {
  json_util::reject_unknown_keys(j, {"speed_gain", "steering_gain", "steering_bias", "smoothing_alpha"}, "gains");
  json_util::read_opt(j, "speed_gain", g.speed_gain);
  json_util::read_opt(j, "steering_gain", g.steering_gain);
  json_util::read_opt(j, "steering_bias", g.steering_bias);
  json_util::read_opt(j, "smoothing_alpha", g.smoothing_alpha);
}

DriveGains parse_gains(const std::string& text, DriveGains base) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ArgumentError("cannot parse gain value '" + item + "'");
    }
  }
  if (values.size() != 3) throw ArgumentError("--gains expects speed_gain,steering_gain,steering_bias");
  base.speed_gain = values[0];
  base.steering_gain = values[1];
  base.steering_bias = values[2];
  base.validate();
  return base;
}

Action condition(const Action& raw, const DriveGains& gains, double prev_steer) {
  const double target = raw.steer * gains.steering_gain + gains.steering_bias;
  const double steer = (1.0 - gains.smoothing_alpha) * prev_steer + gains.smoothing_alpha * target;
  return Action{raw.speed * gains.speed_gain, steer}.clamped();
}

DrivePolicy network_policy(const nn::NetworkParams& params) {
  return [params](const Environment& env) { return predict(params, env.observation()); };
}

DriveTrace drive(Environment& env, const DrivePolicy& policy, const DriveGains& gains, double duration, bool intervene) {
  if (!(duration > 0.0)) throw ArgumentError("drive duration must be positive");
  gains.validate();
  if (!env.running()) throw StateError("drive requires a reset environment");
  const Track& track = env.track();
  DriveTrace trace;
  trace.dt = env.config().dt;
  trace.track_length = track.total_length();
  trace.duration = duration;
  trace.steps.reserve(static_cast<std::size_t>(std::llround(duration / trace.dt)));
  double prev_steer = 0.0;
  // Half-step slack keeps 600 s at dt 0.05 at exactly 12000 steps despite rounding.
  while (trace.elapsed_time() + 0.5 * trace.dt < duration) {
    if (!env.running()) env.reposition(env.pose(), env.speed());  // step budget exhausted, keep going
    const Action a = condition(policy(env), gains, prev_steer);
    prev_steer = a.steer;
    const StepResult r = env.step(a);
    trace.steps.push_back(r);
    if (!r.off_track) continue;
    if (!intervene) {
      trace.ended_off_track = true;
      break;
    }
    trace.intervention_times.push_back(trace.driven_time());
    const TrackQuery q = track.query(r.pose.position());
    const TrackPoint tp = track.point_at(q.arc_position);
    env.reposition({tp.point.x, tp.point.y, tp.heading}, 0.0);
    prev_steer = 0.0;
  }
  return trace;
}

std::string trace_jsonl(const DriveTrace& trace) {
  std::ostringstream out;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const StepResult& r = trace.steps[i];
    nlohmann::json j = {{"t", trace.dt * static_cast<double>(i + 1)},
                        {"pose", {r.pose.x, r.pose.y, r.pose.heading}},
                        {"speed", r.speed},
                        {"dist_to_edge", r.dist_to_edge},
                        {"reward", r.reward},
                        {"reward_event", r.reward_event},
                        {"off_track", r.off_track},
                        {"progress", r.progress}};
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace demodrive
