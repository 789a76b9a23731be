#include "demodrive/sim.hpp"

#include <algorithm>
#include <cmath>

#include "demodrive/errors.hpp"
#include "demodrive/json_util.hpp"

namespace demodrive {

Action Action::clamped() const {
  return {std::clamp(speed, 0.0, kMaxSpeed), std::clamp(steer, -kMaxSteerRate, kMaxSteerRate)};
}

bool Action::in_range() const {
  return std::isfinite(speed) && std::isfinite(steer) && speed >= 0.0 && speed <= kMaxSpeed &&
         std::abs(steer) <= kMaxSteerRate;
}

std::array<double, kObservationSize> Observation::flat() const {
  std::array<double, kObservationSize> v{};
  std::copy(rays.begin(), rays.end(), v.begin());
  v[kRayCount] = speed_norm;
  return v;
}

Observation Observation::from_flat(const std::array<double, kObservationSize>& v) {
  Observation o;
  std::copy(v.begin(), v.begin() + kRayCount, o.rays.begin());
  o.speed_norm = v[kRayCount];
  return o;
}

bool Observation::valid() const {
  for (double r : rays) {
    if (!std::isfinite(r) || r < 0.0 || r > 1.0) return false;
  }
  return std::isfinite(speed_norm) && speed_norm >= 0.0 && speed_norm <= kMaxSpeedNorm;
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ArgumentError("dt must be positive");
  if (max_episode_steps <= 0) throw ArgumentError("max_episode_steps must be positive");
  if (!(vehicle_half_size >= 0.0)) throw ArgumentError("vehicle_half_size must be non-negative");
}

void to_json(nlohmann::json& j, const SimConfig& c) {
  j = {{"dt", c.dt}, {"max_episode_steps", c.max_episode_steps}, {"rng_seed", c.rng_seed},
       {"vehicle_half_size", c.vehicle_half_size}};
}

void from_json(const nlohmann::json& j, SimConfig& c) {
  json_util::reject_unknown_keys(j, {"dt", "max_episode_steps", "rng_seed", "vehicle_half_size"}, "sim");
  json_util::read_opt(j, "dt", c.dt);
  json_util::read_opt(j, "max_episode_steps", c.max_episode_steps);
  json_util::read_opt(j, "rng_seed", c.rng_seed);
  json_util::read_opt(j, "vehicle_half_size", c.vehicle_half_size);
}

double raycast(const Track& track, const Pose& pose, double angle) {
  const Vec2 dir = unit_from_angle(pose.heading + angle);
  return track.edge_crossing_distance(pose.position(), dir, kRayMaxRange) / kRayMaxRange;
}

Observation observe(const Track& track, const Pose& pose, double speed, const RewardParams& reward) {
  Observation o;
  for (int i = 0; i < kRayCount; ++i) o.rays[static_cast<std::size_t>(i)] = raycast(track, pose, ray_angle(i));
  o.speed_norm = std::clamp(speed / reward.ideal_speed, 0.0, kMaxSpeedNorm);
  return o;
}

Environment::Environment(Track track, SimConfig config, RewardParams reward)
    : track_(std::move(track)), config_(config), reward_(reward), rng_(config.rng_seed) {
  config_.validate();
  reward_.validate();
}

Observation Environment::reset(std::optional<double> spawn) {
  const double s = spawn.value_or(0.0);
  if (!(s >= 0.0 && s < track_.total_length())) throw RangeError("spawn arc outside [0, track length)");
  const TrackPoint tp = track_.point_at(s);
  return reposition({tp.point.x, tp.point.y, wrap_angle(tp.heading)}, 0.0);
}

Observation Environment::reposition(const Pose& pose, double speed) {
  pose_ = {pose.x, pose.y, wrap_angle(pose.heading)};
  speed_ = std::clamp(speed, 0.0, kMaxSpeed);
  arc_ = track_.query(pose_.position()).arc_position;
  steps_ = 0;
  running_ = true;
  return observation();
}

double Environment::sample_spawn() {
  std::uniform_real_distribution<double> dist(0.0, track_.total_length());
  return track_.wrap_arc(dist(rng_));
}

Observation Environment::observation() const { return observe(track_, pose_, speed_, reward_); }

StepResult Environment::step(const Action& action) {
  if (!running_) throw StateError("step called on a finished or unstarted episode");
  const Action a = action.clamped();
  const double dt = config_.dt;
  pose_.x += a.speed * std::cos(pose_.heading) * dt;
  pose_.y += a.speed * std::sin(pose_.heading) * dt;
  pose_.heading = wrap_angle(pose_.heading + a.steer * dt);
  speed_ = a.speed;
  ++steps_;

  const TrackQuery q = track_.query(pose_.position());
  StepResult r;
  r.pose = pose_;
  r.speed = speed_;
  r.dist_to_edge = q.dist_to_edge;
  r.arc_position = q.arc_position;
  r.progress = track_.progress_delta(arc_, q.arc_position);
  arc_ = q.arc_position;
  r.obs = observation();
  r.reward = compute_reward(q.dist_to_edge, speed_, reward_);
  r.reward_event = is_reward_event(r.reward, reward_);
  r.off_track = q.dist_to_edge < -config_.vehicle_half_size;
  r.truncated = !r.off_track && steps_ >= config_.max_episode_steps;
  if (r.done()) running_ = false;
  return r;
}

}  // namespace demodrive
