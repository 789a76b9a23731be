#pragma once

#include <cstdint>
#include <optional>

#include "demodrive/demo_store.hpp"
#include "demodrive/sim.hpp"

namespace demodrive {

// Scripted demonstrator: pure-pursuit steering toward the centerline point
// `lookahead` meters ahead of the vehicle's projection, at a fixed speed.
struct PurePursuitExpert {
  double lookahead = 0.15;
  double speed = 0.10;

  Action act(const Track& track, const Pose& pose) const;
  // The lookahead point itself (what the teleop UI draws as the target dot).
  Vec2 target(const Track& track, const Pose& pose) const;
};

struct ExpertRecordOptions {
  std::size_t samples = 331;
  // Ticks between recorded samples; 0 picks the smallest stride whose samples
  // span at least one full lap.
  int stride = 0;
  double spawn_arc = 0.0;
};

// Drives the expert continuously from `spawn_arc` and records one DemoSample
// every `stride` ticks. The reward stored is the one returned by the step that
// executed the labeled action. Throws DatasetError if the expert leaves the
// track before enough samples are collected.
DemoSet record_expert(Environment& env, const PurePursuitExpert& expert, const ExpertRecordOptions& options);

int default_stride(const Track& track, const SimConfig& sim, double speed, std::size_t samples);

}  // namespace demodrive
