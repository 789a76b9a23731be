#include "demodrive/compare.hpp"

#include <algorithm>
#include <filesystem>
#include <future>
#include <sstream>

#include "demodrive/errors.hpp"
#include "demodrive/io.hpp"
#include "demodrive/policy.hpp"

namespace demodrive {

std::string to_string(Method m) {
  switch (m) {
    case Method::PureIl: return "pure_il";
    case Method::PureRl: return "pure_rl";
    case Method::Combined: return "combined";
  }
  return "unknown";
}

const MethodRun& ComparisonTable::run(Method m, std::uint64_t seed) const {
  for (const auto& r : runs) {
    if (r.method == m && r.seed == seed) return r;
  }
  throw ArgumentError("no run for " + to_string(m) + " seed " + std::to_string(seed));
}

std::vector<const MethodRun*> ComparisonTable::runs_of(Method m) const {
  std::vector<const MethodRun*> out;
  for (const auto& r : runs) {
    if (r.method == m) out.push_back(&r);
  }
  return out;
}

namespace {

constexpr Method kMethods[] = {Method::PureIl, Method::PureRl, Method::Combined};

std::vector<long> step_axis(long budget, long interval) {
  std::vector<long> steps;
  for (long s = interval; s <= budget; s += interval) steps.push_back(s);
  if (steps.empty() || steps.back() != budget) steps.push_back(budget);
  return steps;
}

EvalReport evaluate_policy(const Track& track, const SimConfig& sim, const RewardParams& reward,
                           const nn::NetworkParams& policy, const CompareOptions& options) {
  Environment env(track, sim, reward);
  env.reset();
  const DriveTrace trace = drive(env, network_policy(policy), options.gains, options.eval_duration, true);
  EvalReport report = summarize(trace, reward);
  report.config = {{"duration", options.eval_duration}, {"gains", options.gains}, {"spawn_arc", 0.0}};
  return report;
}

MethodRun run_method(Method method, std::uint64_t seed, const Track& track, SimConfig sim, const RewardParams& reward,
                     const DemoSet& demos, DdpgConfig ddpg, BcConfig bc, const CompareOptions& options) {
  sim.rng_seed = seed;
  ddpg.seed = seed;
  bc.seed = seed;
  Environment env(track, sim, reward);
  MethodRun run;
  run.method = method;
  run.seed = seed;
  run.track_hash = env.track().hash();
  run.reward = env.reward_params();

  if (method == Method::PureIl) {
    const BcResult il = train_bc(demos, bc);
    const std::size_t demo_events = count_events(demos.rewards(), reward);
    for (long s : step_axis(options.budget, ddpg.checkpoint_interval)) run.series.push_back({s, demo_events, 0, 0});
    run.report = evaluate_policy(track, sim, reward, il.policy, options);
    return run;
  }

  const std::optional<DemoSet> maybe_demos = method == Method::Combined ? std::optional<DemoSet>(demos) : std::nullopt;
  TrainResult trained = train_ddpg(env, ddpg, maybe_demos, options.budget, bc);
  for (const auto& c : trained.log.checkpoints) {
    run.series.push_back({c.step, c.cum_reward_events + trained.log.demo_reward_events, c.cum_reward_events, c.laps});
  }
  run.log = std::move(trained.log);
  run.report = evaluate_policy(track, sim, reward, trained.actor, options);
  return run;
}

template <typename T>
T median_of(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2;
}

}  // namespace

ComparisonTable compare(const Track& track, const SimConfig& sim, const RewardParams& reward, const DemoSet& demos,
                        const DdpgConfig& ddpg, const BcConfig& bc, const CompareOptions& options) {
  if (options.seeds.empty()) throw ArgumentError("compare needs at least one seed");
  if (options.budget <= 0) throw ArgumentError("compare budget must be positive");
  if (!(options.eval_duration > 0.0)) throw ArgumentError("evaluation duration must be positive");
  sim.validate();
  reward.validate();
  ddpg.validate();
  bc.validate();
  options.gains.validate();
  if (demos.meta().track_hash != track.hash()) {
    throw DatasetError("demonstrations were recorded on track " + demos.meta().track_hash + ", comparing on " +
                       track.hash());
  }

  ComparisonTable table;
  table.budget = options.budget;
  table.seeds = options.seeds;
  table.track_hash = track.hash();
  table.reward = reward;

  std::vector<std::future<MethodRun>> pending;
  const auto launch = options.parallel ? std::launch::async : std::launch::deferred;
  for (Method m : kMethods) {
    for (std::uint64_t seed : options.seeds) {
      pending.push_back(std::async(launch, run_method, m, seed, std::cref(track), sim, std::cref(reward),
                                   std::cref(demos), ddpg, bc, std::cref(options)));
    }
  }
  for (auto& f : pending) table.runs.push_back(f.get());

  const std::size_t axis = table.runs.front().series.size();
  for (const auto& r : table.runs) {
    if (r.track_hash != table.track_hash || !(r.reward == table.reward)) {
      throw StateError(to_string(r.method) + " seed " + std::to_string(r.seed) + " ran on a different track or reward");
    }
    if (r.series.size() != axis) throw StateError("methods disagree on the checkpoint axis");
  }
  return table;
}

std::vector<ComparePoint> median_series(const ComparisonTable& table, Method m) {
  const auto runs = table.runs_of(m);
  if (runs.empty()) return {};
  std::vector<ComparePoint> out;
  for (std::size_t i = 0; i < runs.front()->series.size(); ++i) {
    std::vector<std::size_t> cum, rl, laps;
    for (const MethodRun* r : runs) {
      cum.push_back(r->series.at(i).cum_reward_events);
      rl.push_back(r->series.at(i).rl_reward_events);
      laps.push_back(r->series.at(i).laps);
    }
    out.push_back({runs.front()->series[i].step, median_of(cum), median_of(rl), median_of(laps)});
  }
  return out;
}

double median_eval_laps(const ComparisonTable& table, Method m) {
  std::vector<double> laps;
  for (const MethodRun* r : table.runs_of(m)) laps.push_back(static_cast<double>(r->report.laps_completed));
  if (laps.empty()) throw ArgumentError("no runs for " + to_string(m));
  return median_of(laps);
}

std::string comparison_csv(const ComparisonTable& table) {
  std::ostringstream out;
  out << "method,seed,step,cum_reward_events,laps,rl_reward_events\n";
  for (const auto& r : table.runs) {
    for (const auto& p : r.series) {
      out << to_string(r.method) << ',' << r.seed << ',' << p.step << ',' << p.cum_reward_events << ',' << p.laps << ','
          << p.rl_reward_events << '\n';
    }
  }
  return out.str();
}

std::string plot_data_csv(const ComparisonTable& table) {
  std::ostringstream out;
  out << "method,seed,step,metric,value\n";
  auto emit = [&](const std::string& method, const std::string& seed, const std::vector<ComparePoint>& series) {
    for (const auto& p : series) {
      out << method << ',' << seed << ',' << p.step << ",cum_reward_events," << p.cum_reward_events << '\n';
      out << method << ',' << seed << ',' << p.step << ",rl_reward_events," << p.rl_reward_events << '\n';
    }
  };
  for (const auto& r : table.runs) emit(to_string(r.method), std::to_string(r.seed), r.series);
  for (Method m : kMethods) emit(to_string(m), "median", median_series(table, m));
  return out.str();
}

nlohmann::json reports_json(const ComparisonTable& table) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : table.runs) {
    runs.push_back({{"method", to_string(r.method)},
                    {"seed", r.seed},
                    {"report", r.report},
                    {"demo_reward_events", r.log.demo_reward_events},
                    {"bc_pretrain_steps", r.log.bc_pretrain_steps}});
  }
  nlohmann::json medians = nlohmann::json::object();
  for (Method m : kMethods) medians[to_string(m)] = {{"laps_completed", median_eval_laps(table, m)}};
  return {{"budget", table.budget}, {"seeds", table.seeds}, {"track_hash", table.track_hash},
          {"reward", table.reward}, {"runs", runs},         {"median", medians}};
}

void write_comparison(const ComparisonTable& table, const std::string& dir) {
  const std::filesystem::path base(dir);
  write_file_atomic((base / "comparison.csv").string(), comparison_csv(table));
  write_file_atomic((base / "reports.json").string(), reports_json(table).dump(2) + "\n");
  write_file_atomic((base / "plot_data.csv").string(), plot_data_csv(table));
}

}  // namespace demodrive
