#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "demodrive/demo_store.hpp"
#include "demodrive/imitation.hpp"
#include "demodrive/nn.hpp"
#include "demodrive/replay_buffer.hpp"
#include "demodrive/sim.hpp"

namespace demodrive {

struct DdpgConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  int batch_size = 64;
  long warmup_steps = 1000;
  double noise_sigma_start = 0.2;  // in normalized action units
  double noise_sigma_end = 0.05;
  long noise_decay_steps = 100'000;
  bool demo_seed = true;
  bool bc_pretrain = true;
  // Weight of the behavior-cloning term added to the actor loss for the
  // demonstration transitions that land in a batch. Inert without demos.
  double demo_bc_weight = 10.0;
  std::uint64_t seed = 0;
  std::size_t buffer_capacity = 100'000;
  long checkpoint_interval = 1000;

  void validate() const;  // throws ArgumentError
  // Linear decay from start to end over noise_decay_steps, then constant.
  double noise_sigma(long step) const;
  bool operator==(const DdpgConfig&) const = default;
};

void to_json(nlohmann::json& j, const DdpgConfig& c);
void from_json(const nlohmann::json& j, DdpgConfig& c);

// Columns are samples. Actions are in normalized [-1, 1] units.
struct TransitionBatch {
  Eigen::MatrixXd obs;
  Eigen::MatrixXd action;
  Eigen::RowVectorXd reward;
  Eigen::MatrixXd next_obs;
  Eigen::RowVectorXd done;
  Eigen::RowVectorXd is_demo;
};

TransitionBatch make_batch(const ReplayBuffer& buffer, const std::vector<std::size_t>& indices);

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_objective = 0.0;
};

// y = r + gamma * (1 - done) * Q'(s', mu'(s')).
Eigen::RowVectorXd critic_targets(const nn::NetworkParams& actor_target, const nn::NetworkParams& critic_target,
                                  const TransitionBatch& batch, double gamma);

// Optional behavior-cloning term: bc_weight * sum_b mask_b * |mu(s_b) - target_b|^2 / B.
struct BcAnchor {
  const Eigen::MatrixXd* target_action = nullptr;
  const Eigen::RowVectorXd* mask = nullptr;
  double weight = 0.0;
};

// Gradient of -mean_b Q(s_b, mu(s_b)) (plus the anchor term, when given) with
// respect to the actor parameters, chained through the critic's input
// gradient. `objective` receives mean Q.
nn::ParamGrads actor_loss_gradient(const nn::NetworkParams& actor, const nn::NetworkParams& critic,
                                   const Eigen::MatrixXd& obs, double* objective = nullptr,
                                   const BcAnchor& anchor = {});

class DdpgAgent {
public:
  DdpgAgent(const DdpgConfig& config, nn::NetworkParams actor, nn::NetworkParams critic);
  // Fresh actor and critic initialized from config.seed.
  explicit DdpgAgent(const DdpgConfig& config);

  // Deterministic actor output plus N(0, sigma^2) noise per normalized action
  // component, clamped. sigma = 0 reproduces predict().
  Action act(const Observation& obs, double sigma, std::mt19937_64& rng) const;

  // One critic step, one actor step, then soft target updates. Throws
  // TrainingError on a non-finite loss; throws StateError when the buffer
  // holds fewer than batch_size transitions.
  UpdateStats update(ReplayBuffer& buffer);
  UpdateStats update_on_batch(const TransitionBatch& batch);

  const nn::NetworkParams& actor() const noexcept { return actor_; }
  const nn::NetworkParams& critic() const noexcept { return critic_; }
  const nn::NetworkParams& actor_target() const noexcept { return actor_target_; }
  const nn::NetworkParams& critic_target() const noexcept { return critic_target_; }
  const DdpgConfig& config() const noexcept { return config_; }

private:
  DdpgConfig config_;
  nn::NetworkParams actor_;
  nn::NetworkParams critic_;
  nn::NetworkParams actor_target_;
  nn::NetworkParams critic_target_;
  nn::AdamState actor_opt_;
  nn::AdamState critic_opt_;
};

// One protected transition per demo sample; next_obs comes from replaying the
// labeled action for one step from the recorded pose, the reward is the
// sample's frozen reward. Throws DatasetError for an empty set.
std::size_t seed_buffer(ReplayBuffer& buffer, const DemoSet& demos, Environment& env);

struct TrainingCheckpoint {
  long step = 0;
  std::size_t cum_reward_events = 0;  // earned by the agent during training
  std::size_t episodes = 0;           // finished episodes
  std::size_t laps = 0;               // lap completions during training episodes
  double mean_return = 0.0;           // over episodes finished since the previous checkpoint
  double critic_loss = 0.0;           // mean over updates since the previous checkpoint
  double actor_obj = 0.0;
};

struct TrainingLog {
  std::vector<TrainingCheckpoint> checkpoints;
  std::size_t demo_reward_events = 0;  // events among the seeded demonstrations
  long bc_pretrain_steps = 0;          // gradient steps spent on behavior cloning
};

// CSV columns: step, cum_reward_events, episodes, laps, mean_return, critic_loss, actor_obj.
std::string training_log_csv(const TrainingLog& log);

struct TrainResult {
  nn::NetworkParams actor;
  nn::NetworkParams critic;
  TrainingLog log;
};

// Combined method when demos are supplied (BC pretraining and/or replay
// seeding per config flags), pure DDPG otherwise. Episodes start at a uniformly
// drawn arc position; one update per environment step after warmup.
TrainResult train_ddpg(Environment& env, const DdpgConfig& config, const std::optional<DemoSet>& demos, long budget,
                       const BcConfig& bc = {});

}  // namespace demodrive
