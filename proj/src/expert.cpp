#include "demodrive/expert.hpp"

#include <cmath>

#include "demodrive/errors.hpp"

namespace demodrive {

Vec2 PurePursuitExpert::target(const Track& track, const Pose& pose) const {
  const TrackQuery q = track.query(pose.position());
  return track.point_at(q.arc_position + lookahead).point;
}

Action PurePursuitExpert::act(const Track& track, const Pose& pose) const {
  const Vec2 d = target(track, pose) - pose.position();
  const double lateral = -std::sin(pose.heading) * d.x + std::cos(pose.heading) * d.y;
  const double dist2 = dot(d, d);
  const double curvature = dist2 > 0.0 ? 2.0 * lateral / dist2 : 0.0;
  return Action{speed, speed * curvature}.clamped();
}

int default_stride(const Track& track, const SimConfig& sim, double speed, std::size_t samples) {
  if (samples == 0 || !(speed > 0.0)) return 1;
  const double lap_ticks = track.total_length() / (speed * sim.dt);
  return std::max(1, static_cast<int>(std::ceil(lap_ticks / static_cast<double>(samples))));
}

DemoSet record_expert(Environment& env, const PurePursuitExpert& expert, const ExpertRecordOptions& options) {
  const Track& track = env.track();
  const int stride = options.stride > 0 ? options.stride
                                        : default_stride(track, env.config(), expert.speed, options.samples);
  nlohmann::json cfg = {{"expert", "pure_pursuit"},
                        {"lookahead", expert.lookahead},
                        {"speed", expert.speed},
                        {"stride", stride},
                        {"spawn_arc", options.spawn_arc},
                        {"sim", env.config()},
                        {"reward", env.reward_params()}};
  DemoSet set(make_meta(track, "scripted", std::move(cfg)));
  const std::string hash = track.hash();

  env.reset(options.spawn_arc);
  double t = 0.0;
  long tick = 0;
  while (set.size() < options.samples) {
    if (!env.running()) env.reposition(env.pose(), env.speed());  // step budget only; keep driving
    const Observation obs = env.observation();
    const Pose pose = env.pose();
    const Action label = expert.act(track, pose);
    const StepResult r = env.step(label);
    if (r.off_track) throw DatasetError("scripted expert left the track while recording");
    if (tick % stride == 0) set.append(DemoSample{obs, label, r.reward, pose, t}, hash);
    t += env.config().dt;
    ++tick;
  }
  return set;
}

}  // namespace demodrive
