#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "demodrive/ddpg.hpp"
#include "demodrive/deploy.hpp"
#include "demodrive/evaluate.hpp"
#include "demodrive/imitation.hpp"

namespace demodrive {

enum class Method { PureIl, PureRl, Combined };

std::string to_string(Method m);  // "pure_il", "pure_rl", "combined"

struct ComparePoint {
  long step = 0;
  std::size_t cum_reward_events = 0;  // demonstration events included
  std::size_t rl_reward_events = 0;   // earned by the agent only
  std::size_t laps = 0;               // training laps
};

struct MethodRun {
  Method method = Method::PureIl;
  std::uint64_t seed = 0;
  std::vector<ComparePoint> series;
  TrainingLog log;  // empty for pure_il
  EvalReport report;
  std::string track_hash;
  RewardParams reward;
};

struct CompareOptions {
  long budget = 50'000;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  double eval_duration = 600.0;
  DriveGains gains;
  bool parallel = true;  // one worker per (method, seed)
};

struct ComparisonTable {
  long budget = 0;
  std::vector<std::uint64_t> seeds;
  std::string track_hash;
  RewardParams reward;
  std::vector<MethodRun> runs;  // method-major, then seed order

  const MethodRun& run(Method m, std::uint64_t seed) const;  // throws ArgumentError
  std::vector<const MethodRun*> runs_of(Method m) const;
};

// Trains and evaluates pure IL, pure RL and the combined method for every
// seed under the same budget, track, reward and evaluation protocol. Each run
// gets its own environment with rng_seed = seed; DDPG and BC seeds follow the
// run seed. pure_il spends no RL steps and its series is flat at the demo
// event count. Throws DatasetError when the demos were recorded on another
// track, StateError if any run ends up with a different track or reward.
ComparisonTable compare(const Track& track, const SimConfig& sim, const RewardParams& reward, const DemoSet& demos,
                        const DdpgConfig& ddpg, const BcConfig& bc, const CompareOptions& options);

// Pointwise median over seeds of a method's series. All seeds share the step axis.
std::vector<ComparePoint> median_series(const ComparisonTable& table, Method m);
double median_eval_laps(const ComparisonTable& table, Method m);

// comparison.csv: method,seed,step,cum_reward_events,laps,rl_reward_events
std::string comparison_csv(const ComparisonTable& table);
// plot_data.csv, long format: method,seed,step,metric,value (seed "median" rows included)
std::string plot_data_csv(const ComparisonTable& table);
nlohmann::json reports_json(const ComparisonTable& table);

// Writes comparison.csv, reports.json and plot_data.csv into `dir` atomically.
void write_comparison(const ComparisonTable& table, const std::string& dir);

}  // namespace demodrive
