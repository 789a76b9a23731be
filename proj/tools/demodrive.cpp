#include <csignal>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include "CLI11.hpp"
#include "demodrive/compare.hpp"
#include "demodrive/config.hpp"
#include "demodrive/errors.hpp"
#include "demodrive/expert.hpp"
#include "demodrive/io.hpp"
#include "demodrive/teleop_server.hpp"

using namespace demodrive;

namespace {

struct Common {
  std::optional<std::string> config_path;
  std::optional<std::string> track;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> event_threshold, wd, ws, di, vi;
};

GlobalConfig effective_config(const Common& c) {
  GlobalConfig g = resolve_config(c.config_path);
  if (c.track) g.track = *c.track;
  if (c.out_dir) g.out_dir = *c.out_dir;
  if (c.seed) {
    g.sim.rng_seed = *c.seed;
    g.bc.seed = *c.seed;
    g.ddpg.seed = *c.seed;
  }
  if (c.event_threshold) g.reward.event_threshold = *c.event_threshold;
  if (c.wd) g.reward.distance_weight = *c.wd;
  if (c.ws) g.reward.speed_weight = *c.ws;
  if (c.di) g.reward.ideal_distance = *c.di;
  if (c.vi) g.reward.ideal_speed = *c.vi;
  g.validate();
  return g;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ArgumentError("cannot parse seed '" + item + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return seeds;
}

// Blocks SIGINT/SIGTERM in every thread and stops the server from a waiter.
int serve_until_signal(TeleopServer& server) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  server.run();
  // run() only returns after stop(), which only the waiter calls.
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Demonstration-bootstrapped driving lab: record, train, evaluate and compare policies."};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config_path, "GlobalConfig JSON (falls back to $DEMODRIVE_CONFIG)");
  app.add_option("--track", common.track, "Track JSON file or 'default'");
  app.add_option("--out-dir", common.out_dir, "Output directory (default ./results)");
  app.add_option("--seed", common.seed, "Seed for the sim, BC and DDPG");
  app.add_option("--event-threshold", common.event_threshold, "Reward-event threshold rho");
  app.add_option("--wd", common.wd, "Distance weight");
  app.add_option("--ws", common.ws, "Speed weight");
  app.add_option("--di", common.di, "Ideal distance to the edge (m)");
  app.add_option("--vi", common.vi, "Ideal speed (m/s)");

  // record
  auto* record = app.add_subcommand("record", "Serve the teleoperation WebSocket and record human demonstrations");
  unsigned short port = 8090;
  double tick_hz = 20.0;
  std::string record_out = "session.demos.jsonl";
  record->add_option("--port", port, "WebSocket port")->capture_default_str();
  record->add_option("--tick-hz", tick_hz, "Loop rate")->capture_default_str();
  record->add_option("--out", record_out, "Demo file for the first recording session")->capture_default_str();

  // expert-record
  auto* expert_cmd = app.add_subcommand("expert-record", "Record demonstrations from the scripted pure-pursuit expert");
  ExpertRecordOptions expert_opts;
  PurePursuitExpert expert;
  std::string expert_out;
  expert_cmd->add_option("--samples", expert_opts.samples, "Number of samples")->capture_default_str();
  expert_cmd->add_option("--stride", expert_opts.stride, "Ticks between samples (0 = one lap coverage)")
      ->capture_default_str();
  expert_cmd->add_option("--spawn-arc", expert_opts.spawn_arc, "Start arc position (m)")->capture_default_str();
  expert_cmd->add_option("--lookahead", expert.lookahead, "Pure-pursuit lookahead (m)")->capture_default_str();
  expert_cmd->add_option("--speed", expert.speed, "Expert speed (m/s)")->capture_default_str();
  expert_cmd->add_option("--out", expert_out, "Demo file")->required();

  // train-il
  auto* il_cmd = app.add_subcommand("train-il", "Behavior-clone a policy from a demo file");
  std::string il_demos, il_out, il_report;
  std::optional<int> il_epochs, il_batch;
  std::optional<double> il_lr;
  il_cmd->add_option("--demos", il_demos, "Demo file")->required();
  il_cmd->add_option("--epochs", il_epochs, "Epochs (default 50)");
  il_cmd->add_option("--batch", il_batch, "Batch size (default 64)");
  il_cmd->add_option("--lr", il_lr, "Learning rate (default 1e-3)");
  il_cmd->add_option("--out", il_out, "Model file")->required();
  il_cmd->add_option("--report", il_report, "Per-epoch CSV report");

  // train-rl
  auto* rl_cmd = app.add_subcommand("train-rl", "Train a DDPG actor, optionally bootstrapped by demonstrations");
  long rl_budget = 50'000;
  std::optional<std::string> rl_demos;
  std::optional<bool> rl_bc, rl_seed_demos;
  std::string rl_out, rl_log, rl_critic_out;
  rl_cmd->add_option("--budget", rl_budget, "Environment steps")->capture_default_str();
  rl_cmd->add_option("--demos", rl_demos, "Demo file for the combined method");
  rl_cmd->add_flag("--bc-pretrain,!--no-bc-pretrain", rl_bc, "Behavior-clone the actor before RL");
  rl_cmd->add_flag("--demo-seed,!--no-demo-seed", rl_seed_demos, "Seed the replay buffer with the demos");
  rl_cmd->add_option("--out", rl_out, "Actor model file")->required();
  rl_cmd->add_option("--critic-out", rl_critic_out, "Critic model file");
  rl_cmd->add_option("--log", rl_log, "TrainingLog CSV");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Drive a policy with interventions and report the autonomy value");
  std::string eval_policy, eval_trace, eval_report;
  std::optional<std::string> eval_gains;
  double eval_duration = 600.0;
  double eval_spawn = 0.0;
  bool eval_no_intervene = false;
  eval_cmd->add_option("--policy", eval_policy, "Actor or BC model file")->required();
  eval_cmd->add_option("--duration", eval_duration, "Evaluation clock (s)")->capture_default_str();
  eval_cmd->add_option("--gains", eval_gains, "speed_gain,steering_gain,steering_bias");
  eval_cmd->add_option("--spawn-arc", eval_spawn, "Start arc position (m)")->capture_default_str();
  eval_cmd->add_flag("--no-intervene", eval_no_intervene, "Stop at the first off-track step instead");
  eval_cmd->add_option("--trace", eval_trace, "Per-step JSONL trace");
  eval_cmd->add_option("--report", eval_report, "EvalReport JSON");

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Run pure IL, pure RL and the combined method under one budget");
  long cmp_budget = 50'000;
  std::string cmp_seeds = "1,2,3";
  std::optional<std::string> cmp_demos;
  double cmp_duration = 600.0;
  bool cmp_serial = false;
  cmp_cmd->add_option("--budget", cmp_budget, "Environment steps per RL run")->capture_default_str();
  cmp_cmd->add_option("--seeds", cmp_seeds, "Comma-separated seeds")->capture_default_str();
  cmp_cmd->add_option("--demos", cmp_demos, "Demo file (default: 331 scripted-expert samples)");
  cmp_cmd->add_option("--eval-duration", cmp_duration, "Evaluation clock per run (s)")->capture_default_str();
  cmp_cmd->add_flag("--serial", cmp_serial, "Run methods and seeds one after another");

  // relabel
  auto* relabel_cmd = app.add_subcommand("relabel", "Recompute frozen demo rewards under the current reward parameters");
  std::string relabel_in, relabel_out;
  relabel_cmd->add_option("--demos", relabel_in, "Input demo file")->required();
  relabel_cmd->add_option("--out", relabel_out, "Output demo file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const GlobalConfig cfg = effective_config(common);
    const Track track = resolve_track(cfg.track);
    auto make_env = [&] { return Environment(track, cfg.sim, cfg.reward); };

    if (*record) {
      auto session = std::make_unique<TeleopSession>(track, cfg.sim, cfg.reward, record_out);
      TeleopServer server(std::move(session), {"0.0.0.0", port, tick_hz});
      std::cout << "teleop server on port " << server.port() << ", recording to " << record_out << std::endl;
      serve_until_signal(server);
      for (const auto& p : server.session().saved_paths()) std::cout << "saved " << p << "\n";
      return 0;
    }
    if (*expert_cmd) {
      Environment env = make_env();
      const DemoSet demos = record_expert(env, expert, expert_opts);
      save(demos, expert_out);
      std::cout << "wrote " << demos.size() << " samples (" << count_events(demos.rewards(), cfg.reward)
                << " reward events) to " << expert_out << "\n";
      return 0;
    }
    if (*il_cmd) {
      BcConfig bc = cfg.bc;
      if (il_epochs) bc.epochs = *il_epochs;
      if (il_batch) bc.batch_size = *il_batch;
      if (il_lr) bc.learning_rate = *il_lr;
      bc.validate();
      const DemoSet demos = load_demos(il_demos, track);
      const BcResult result = train_bc(demos, bc);
      nn::save(result.policy, il_out);
      if (!il_report.empty()) write_file_atomic(il_report, report_csv(result.report));
      const EpochStats& best = result.report.at(static_cast<std::size_t>(result.best_epoch - 1));
      std::cout << "best epoch " << result.best_epoch << " train_mse " << best.train_mse << " test_mse "
                << best.test_mse << "\n";
      return 0;
    }
    if (*rl_cmd) {
      DdpgConfig ddpg = cfg.ddpg;
      if (rl_bc) ddpg.bc_pretrain = *rl_bc;
      if (rl_seed_demos) ddpg.demo_seed = *rl_seed_demos;
      std::optional<DemoSet> demos;
      if (rl_demos) demos = load_demos(*rl_demos, track);
      Environment env = make_env();
      const TrainResult result = train_ddpg(env, ddpg, demos, rl_budget, cfg.bc);
      nn::save(result.actor, rl_out);
      if (!rl_critic_out.empty()) nn::save(result.critic, rl_critic_out);
      if (!rl_log.empty()) write_file_atomic(rl_log, training_log_csv(result.log));
      const auto& last = result.log.checkpoints.empty() ? TrainingCheckpoint{} : result.log.checkpoints.back();
      std::cout << "trained " << rl_budget << " steps: " << last.cum_reward_events << " reward events, " << last.laps
                << " laps, " << last.episodes << " episodes\n";
      return 0;
    }
    if (*eval_cmd) {
      const DriveGains gains = eval_gains ? parse_gains(*eval_gains, cfg.gains) : cfg.gains;
      const nn::NetworkParams policy = nn::load(eval_policy);
      Environment env = make_env();
      env.reset(eval_spawn);
      const DriveTrace trace = drive(env, network_policy(policy), gains, eval_duration, !eval_no_intervene);
      EvalReport report = summarize(trace, cfg.reward);
      report.config = {{"policy", eval_policy}, {"duration", eval_duration}, {"gains", gains},
                       {"spawn_arc", eval_spawn}, {"intervene", !eval_no_intervene}, {"reward", cfg.reward},
                       {"sim", cfg.sim},          {"track_hash", track.hash()}};
      if (!eval_trace.empty()) write_file_atomic(eval_trace, trace_jsonl(trace));
      if (!eval_report.empty()) write_file_atomic(eval_report, nlohmann::json(report).dump(2) + "\n");
      std::cout << "autonomy " << report.autonomy_value << "% interventions " << report.interventions << " laps "
                << report.laps_completed << " reward_events " << report.reward_events << "\n";
      return 0;
    }
    if (*cmp_cmd) {
      DemoSet demos;
      if (cmp_demos) {
        demos = load_demos(*cmp_demos, track);
      } else {
        Environment env = make_env();
        demos = record_expert(env, PurePursuitExpert{}, {});
      }
      CompareOptions opts;
      opts.budget = cmp_budget;
      opts.seeds = parse_seeds(cmp_seeds);
      opts.eval_duration = cmp_duration;
      opts.gains = cfg.gains;
      opts.parallel = !cmp_serial;
      const ComparisonTable table = compare(track, cfg.sim, cfg.reward, demos, cfg.ddpg, cfg.bc, opts);
      write_comparison(table, cfg.out_dir);
      for (Method m : {Method::PureIl, Method::PureRl, Method::Combined}) {
        const auto series = median_series(table, m);
        std::cout << to_string(m) << ": median eval laps " << median_eval_laps(table, m) << ", final events "
                  << (series.empty() ? 0 : series.back().cum_reward_events) << "\n";
      }
      std::cout << "wrote comparison.csv, reports.json, plot_data.csv to " << cfg.out_dir << "\n";
      return 0;
    }
    if (*relabel_cmd) {
      const DemoSet in = load_demos(relabel_in, track);
      Environment env = make_env();
      const DemoSet out = relabel_rewards(in, env);
      save(out, relabel_out);
      std::cout << "relabeled " << out.size() << " samples: " << count_events(out.rewards(), cfg.reward)
                << " reward events (was " << count_events(in.rewards(), cfg.reward) << ")\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
