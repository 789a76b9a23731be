#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "demodrive/sim.hpp"
#include "demodrive/track.hpp"

namespace demodrive {

// One expert-labeled record: what was observed at `pose`, the commanded
// (speed, steer) label, and the reward the sim returned for executing it.
struct DemoSample {
  Observation obs;
  Action action;
  double reward = 0.0;
  Pose pose;
  double t = 0.0;  // seconds since session start

  // Throws ValidationError when a field breaks its invariant.
  void validate() const;
  bool operator==(const DemoSample&) const = default;
};

struct DemoMeta {
  std::string track_hash;
  std::string recorder = "scripted";  // "human" | "scripted"
  std::string created_at;
  nlohmann::json config = nlohmann::json::object();

  bool operator==(const DemoMeta&) const = default;
};

class DemoSet {
public:
  DemoSet() = default;
  explicit DemoSet(DemoMeta meta) : meta_(std::move(meta)) {}

  // Validates the sample; throws ValidationError on an invalid sample.
  void append(const DemoSample& sample);
  // Same, and throws DatasetError when `track_hash` differs from the set's.
  void append(const DemoSample& sample, const std::string& track_hash);

  const DemoMeta& meta() const noexcept { return meta_; }
  const std::vector<DemoSample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  std::vector<double> rewards() const;

  bool operator==(const DemoSet&) const = default;

private:
  DemoMeta meta_;
  std::vector<DemoSample> samples_;
};

DemoMeta make_meta(const Track& track, std::string recorder, nlohmann::json config = nlohmann::json::object());

// Seeded shuffle, then the first round((1 - train_fraction) * N) samples form
// the test set. Throws DatasetError for N < 10 or a fraction outside (0, 1).
std::pair<DemoSet, DemoSet> split(const DemoSet& set, double train_fraction, std::uint64_t seed);

// JSONL: header line {"format_version":1,"meta":{...}}, then one sample per line.
void save(const DemoSet& set, const std::string& path);
std::string serialize(const DemoSet& set);
// Throws ParseError (with line number) on malformed text, ValidationError when
// a sample breaks an invariant, VersionError for an unknown format_version.
DemoSet load_demos(const std::string& path);
DemoSet parse_demos(const std::string& text);
// As load_demos, and throws DatasetError when the set was recorded on another track.
DemoSet load_demos(const std::string& path, const Track& track);

nlohmann::json sample_to_json(const DemoSample& s);

// The V_i that the samples' speed_norm was taken against: the one stored in
// the set's meta, else `fallback`'s.
double recorded_ideal_speed(const DemoSet& set, const RewardParams& fallback);

// Recomputes every frozen reward under env's RewardParams by replaying the
// labeled action for one step from the recorded pose (speed recovered from
// the observation and recorded_ideal_speed). Throws DatasetError
// when the set belongs to another track.
DemoSet relabel_rewards(const DemoSet& set, Environment& env);

inline constexpr int kDemoFormatVersion = 1;

}  // namespace demodrive
