#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>

#include <nlohmann/json.hpp>

#include "demodrive/geometry.hpp"
#include "demodrive/reward.hpp"
#include "demodrive/track.hpp"

namespace demodrive {

inline constexpr double kMaxSpeed = 0.20;      // m/s
inline constexpr double kMaxSteerRate = 2.0;   // rad/s
inline constexpr int kRayCount = 9;
inline constexpr double kRayMaxRange = 0.5;    // m
inline constexpr double kRaySpacing = std::numbers::pi / 8.0;  // 22.5 deg, rays span -90..+90 deg
inline constexpr double kMaxSpeedNorm = 2.0;
inline constexpr int kObservationSize = kRayCount + 1;
inline constexpr int kActionSize = 2;

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // (-pi, pi]

  Vec2 position() const { return {x, y}; }
  bool operator==(const Pose&) const = default;
};

// Speed and steering-rate command. Use clamped() before feeding the kinematics.
struct Action {
  double speed = 0.0;  // m/s, [0, kMaxSpeed]
  double steer = 0.0;  // rad/s, [-kMaxSteerRate, kMaxSteerRate]

  Action clamped() const;
  bool in_range() const;
  bool operator==(const Action&) const = default;
};

struct Observation {
  std::array<double, kRayCount> rays{};  // normalized hit distances, index 0 = -90 deg (right)
  double speed_norm = 0.0;               // V / V_i clamped to [0, 2]

  std::array<double, kObservationSize> flat() const;
  static Observation from_flat(const std::array<double, kObservationSize>& v);
  bool valid() const;
  bool operator==(const Observation&) const = default;
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool reward_event = false;
  bool off_track = false;
  bool truncated = false;  // step budget exhausted while still on track
  Pose pose;
  double speed = 0.0;
  double dist_to_edge = 0.0;
  double arc_position = 0.0;
  double progress = 0.0;  // arc delta covered this step

  bool done() const { return off_track || truncated; }
};

struct SimConfig {
  double dt = 0.05;
  int max_episode_steps = 1200;
  std::uint64_t rng_seed = 0;
  double vehicle_half_size = 0.05;

  void validate() const;
  bool operator==(const SimConfig&) const = default;
};

void to_json(nlohmann::json& j, const SimConfig& c);
void from_json(const nlohmann::json& j, SimConfig& c);

// Normalized distance (in [0, 1]) from the vehicle center along heading + angle
// to the first lane-edge crossing, capped at kRayMaxRange.
double raycast(const Track& track, const Pose& pose, double angle);

// Angle of ray i relative to the vehicle heading.
constexpr double ray_angle(int i) { return -std::numbers::pi / 2.0 + kRaySpacing * i; }

Observation observe(const Track& track, const Pose& pose, double speed, const RewardParams& reward);

// Single-owner episodic environment with first-order kinematics:
// x += v cos(h) dt, y += v sin(h) dt, h += w dt.
class Environment {
public:
  Environment(Track track, SimConfig config, RewardParams reward = {});

  // Places the vehicle on the centerline at `spawn` (default arc 0) heading
  // along the local tangent, at rest. Throws RangeError for spawn outside [0, L).
  Observation reset(std::optional<double> spawn = std::nullopt);

  // Throws StateError when the episode is not running.
  StepResult step(const Action& action);

  // Puts the vehicle at an arbitrary state and restarts the step budget.
  Observation reposition(const Pose& pose, double speed);

  // Uniform spawn arc drawn from the environment's seeded generator.
  double sample_spawn();

  const Track& track() const noexcept { return track_; }
  const SimConfig& config() const noexcept { return config_; }
  const RewardParams& reward_params() const noexcept { return reward_; }
  const Pose& pose() const noexcept { return pose_; }
  double speed() const noexcept { return speed_; }
  Observation observation() const;
  TrackQuery track_query() const { return track_.query(pose_.position()); }
  bool running() const noexcept { return running_; }
  int steps() const noexcept { return steps_; }

private:
  Track track_;
  SimConfig config_;
  RewardParams reward_;
  std::mt19937_64 rng_;
  Pose pose_;
  double speed_ = 0.0;
  double arc_ = 0.0;
  int steps_ = 0;
  bool running_ = false;
};

}  // namespace demodrive
