#include "demodrive/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "demodrive/errors.hpp"
#include "demodrive/json_util.hpp"
#include "demodrive/policy.hpp"

namespace demodrive {

void DdpgConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ArgumentError("gamma must lie in (0, 1)");
  if (!(tau > 0.0 && tau <= 1.0)) throw ArgumentError("tau must lie in (0, 1]");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw ArgumentError("learning rates must be positive");
  if (batch_size < 1) throw ArgumentError("batch size must be >= 1");
  if (warmup_steps < 0) throw ArgumentError("warmup steps must be >= 0");
  if (!(demo_bc_weight >= 0.0)) throw ArgumentError("demo BC weight must be >= 0");
  if (!(noise_sigma_start >= 0.0) || !(noise_sigma_end >= 0.0)) throw ArgumentError("noise sigma must be >= 0");
  if (noise_decay_steps < 1) throw ArgumentError("noise decay steps must be >= 1");
  if (buffer_capacity < 1) throw ArgumentError("buffer capacity must be >= 1");
  if (checkpoint_interval < 1) throw ArgumentError("checkpoint interval must be >= 1");
}

double DdpgConfig::noise_sigma(long step) const {
  const double frac = std::clamp(static_cast<double>(step) / static_cast<double>(noise_decay_steps), 0.0, 1.0);
  return noise_sigma_start + (noise_sigma_end - noise_sigma_start) * frac;
}

void to_json(nlohmann::json& j, const DdpgConfig& c) {
  j = {{"gamma", c.gamma},
       {"tau", c.tau},
       {"actor_lr", c.actor_lr},
       {"critic_lr", c.critic_lr},
       {"batch_size", c.batch_size},
       {"warmup_steps", c.warmup_steps},
       {"noise_sigma_start", c.noise_sigma_start},
       {"noise_sigma_end", c.noise_sigma_end},
       {"noise_decay_steps", c.noise_decay_steps},
       {"demo_seed", c.demo_seed},
       {"bc_pretrain", c.bc_pretrain},
       {"demo_bc_weight", c.demo_bc_weight},
       {"seed", c.seed},
       {"buffer_capacity", c.buffer_capacity},
       {"checkpoint_interval", c.checkpoint_interval}};
}

void from_json(const nlohmann::json& j, DdpgConfig& c) {
  json_util::reject_unknown_keys(j,
                                 {"gamma", "tau", "actor_lr", "critic_lr", "batch_size", "warmup_steps",
                                  "noise_sigma_start", "noise_sigma_end", "noise_decay_steps", "demo_seed",
                                  "bc_pretrain", "demo_bc_weight", "seed", "buffer_capacity", "checkpoint_interval"},
                                 "ddpg");
  json_util::read_opt(j, "gamma", c.gamma);
  json_util::read_opt(j, "tau", c.tau);
  json_util::read_opt(j, "actor_lr", c.actor_lr);
  json_util::read_opt(j, "critic_lr", c.critic_lr);
  json_util::read_opt(j, "batch_size", c.batch_size);
  json_util::read_opt(j, "warmup_steps", c.warmup_steps);
  json_util::read_opt(j, "noise_sigma_start", c.noise_sigma_start);
  json_util::read_opt(j, "noise_sigma_end", c.noise_sigma_end);
  json_util::read_opt(j, "noise_decay_steps", c.noise_decay_steps);
  json_util::read_opt(j, "demo_seed", c.demo_seed);
  json_util::read_opt(j, "bc_pretrain", c.bc_pretrain);
  json_util::read_opt(j, "demo_bc_weight", c.demo_bc_weight);
  json_util::read_opt(j, "seed", c.seed);
  json_util::read_opt(j, "buffer_capacity", c.buffer_capacity);
  json_util::read_opt(j, "checkpoint_interval", c.checkpoint_interval);
}

TransitionBatch make_batch(const ReplayBuffer& buffer, const std::vector<std::size_t>& indices) {
  const auto n = static_cast<Eigen::Index>(indices.size());
  TransitionBatch b{Eigen::MatrixXd(kObservationSize, n), Eigen::MatrixXd(kActionSize, n), Eigen::RowVectorXd(n),
                    Eigen::MatrixXd(kObservationSize, n), Eigen::RowVectorXd(n), Eigen::RowVectorXd(n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const Transition& t = buffer.at(indices[static_cast<std::size_t>(k)]);
    b.obs.col(k) = observation_vector(t.obs);
    const auto a = normalize_action(t.action);
    b.action(0, k) = a[0];
    b.action(1, k) = a[1];
    b.reward(k) = t.reward;
    b.next_obs.col(k) = observation_vector(t.next_obs);
    b.done(k) = t.done ? 1.0 : 0.0;
    b.is_demo(k) = t.is_demo ? 1.0 : 0.0;
  }
  return b;
}

namespace {

Eigen::MatrixXd stack(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
  Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

}  // namespace

Eigen::RowVectorXd critic_targets(const nn::NetworkParams& actor_target, const nn::NetworkParams& critic_target,
                                  const TransitionBatch& batch, double gamma) {
  const Eigen::MatrixXd next_action = nn::forward(actor_target, batch.next_obs);
  const Eigen::MatrixXd next_q = nn::forward(critic_target, stack(batch.next_obs, next_action));
  const Eigen::RowVectorXd not_done = (1.0 - batch.done.array()).matrix();
  return batch.reward + gamma * not_done.cwiseProduct(next_q.row(0));
}

nn::ParamGrads actor_loss_gradient(const nn::NetworkParams& actor, const nn::NetworkParams& critic,
                                   const Eigen::MatrixXd& obs, double* objective, const BcAnchor& anchor) {
  const Eigen::Index obs_dim = obs.rows();
  const Eigen::Index act_dim = actor.spec.output_size();
  if (critic.spec.input_size() != obs_dim + act_dim) throw ShapeError("critic input must be obs + action");
  nn::Tape actor_tape;
  nn::Tape critic_tape;
  const Eigen::MatrixXd action = nn::forward(actor, obs, &actor_tape);
  const Eigen::MatrixXd q = nn::forward(critic, stack(obs, action), &critic_tape);
  const double batch = static_cast<double>(obs.cols());
  if (objective) *objective = q.sum() / batch;
  const Eigen::MatrixXd q_grad = Eigen::MatrixXd::Constant(1, obs.cols(), -1.0 / batch);
  const nn::ParamGrads critic_grads = nn::backward(critic, critic_tape, q_grad);
  Eigen::MatrixXd action_grad = critic_grads.input.bottomRows(act_dim);
  if (anchor.weight > 0.0 && anchor.target_action && anchor.mask) {
    const Eigen::MatrixXd diff = action - *anchor.target_action;
    action_grad += (diff.array().rowwise() * anchor.mask->array()).matrix() * (2.0 * anchor.weight / batch);
  }
  return nn::backward(actor, actor_tape, action_grad);
}

DdpgAgent::DdpgAgent(const DdpgConfig& config, nn::NetworkParams actor, nn::NetworkParams critic)
    : config_(config), actor_(std::move(actor)), critic_(std::move(critic)) {
  config_.validate();
  actor_target_ = actor_;
  critic_target_ = critic_;
  actor_opt_ = nn::AdamState::for_params(actor_, config_.actor_lr);
  critic_opt_ = nn::AdamState::for_params(critic_, config_.critic_lr);
}

DdpgAgent::DdpgAgent(const DdpgConfig& config)
    : DdpgAgent(config, nn::init(policy_spec(), config.seed * 2 + 11), nn::init(critic_spec(), config.seed * 2 + 12)) {}

Action DdpgAgent::act(const Observation& obs, double sigma, std::mt19937_64& rng) const {
  Eigen::VectorXd y = nn::forward(actor_, observation_vector(obs));
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += noise(rng);
  }
  return denormalize_action(std::clamp(y(0), -1.0, 1.0), std::clamp(y(1), -1.0, 1.0));
}

UpdateStats DdpgAgent::update(ReplayBuffer& buffer) {
  if (buffer.size() < static_cast<std::size_t>(config_.batch_size)) {
    throw StateError("replay buffer holds fewer transitions than one batch");
  }
  return update_on_batch(make_batch(buffer, buffer.sample_indices(static_cast<std::size_t>(config_.batch_size))));
}

UpdateStats DdpgAgent::update_on_batch(const TransitionBatch& batch) {
  UpdateStats stats;
  const double n = static_cast<double>(batch.obs.cols());

  const Eigen::RowVectorXd y = critic_targets(actor_target_, critic_target_, batch, config_.gamma);
  nn::Tape tape;
  const Eigen::MatrixXd q = nn::forward(critic_, stack(batch.obs, batch.action), &tape);
  const Eigen::RowVectorXd diff = q.row(0) - y;
  stats.critic_loss = diff.squaredNorm() / n;
  if (!std::isfinite(stats.critic_loss)) throw TrainingError("non-finite critic loss");
  nn::adam_step(critic_, nn::backward(critic_, tape, diff * (2.0 / n)), critic_opt_);

  const BcAnchor anchor{&batch.action, &batch.is_demo, config_.demo_bc_weight};
  const nn::ParamGrads actor_grads = actor_loss_gradient(actor_, critic_, batch.obs, &stats.actor_objective, anchor);
  if (!std::isfinite(stats.actor_objective)) throw TrainingError("non-finite actor objective");
  nn::adam_step(actor_, actor_grads, actor_opt_);

  nn::soft_update(critic_target_, critic_, config_.tau);
  nn::soft_update(actor_target_, actor_, config_.tau);
  return stats;
}

std::size_t seed_buffer(ReplayBuffer& buffer, const DemoSet& demos, Environment& env) {
  if (demos.empty()) throw DatasetError("cannot seed the replay buffer from an empty demo set");
  const double ideal_speed = recorded_ideal_speed(demos, env.reward_params());
  for (const DemoSample& s : demos.samples()) {
    env.reposition(s.pose, s.obs.speed_norm * ideal_speed);
    const StepResult r = env.step(s.action);
    buffer.add({s.obs, s.action, s.reward, r.obs, r.off_track, true});
  }
  return demos.size();
}

std::string training_log_csv(const TrainingLog& log) {
  std::ostringstream out;
  out.precision(17);
  out << "step,cum_reward_events,episodes,laps,mean_return,critic_loss,actor_obj\n";
  for (const auto& c : log.checkpoints) {
    out << c.step << ',' << c.cum_reward_events << ',' << c.episodes << ',' << c.laps << ',' << c.mean_return << ','
        << c.critic_loss << ',' << c.actor_obj << '\n';
  }
  return out.str();
}

TrainResult train_ddpg(Environment& env, const DdpgConfig& config, const std::optional<DemoSet>& demos, long budget,
                       const BcConfig& bc) {
  config.validate();
  if (budget < 0) throw ArgumentError("training budget must be >= 0");

  TrainingLog log;
  nn::NetworkParams actor = nn::init(policy_spec(), config.seed * 2 + 11);
  if (demos && config.bc_pretrain) {
    BcResult pre = train_bc(*demos, bc);
    actor = std::move(pre.policy);
    const long n_train = static_cast<long>(split(*demos, bc.train_fraction, bc.seed).first.size());
    log.bc_pretrain_steps = static_cast<long>(bc.epochs) * ((n_train + bc.batch_size - 1) / bc.batch_size);
  }
  DdpgAgent agent(config, std::move(actor), nn::init(critic_spec(), config.seed * 2 + 12));
  ReplayBuffer buffer(config.buffer_capacity, config.seed * 2 + 13);
  if (demos && config.demo_seed) {
    seed_buffer(buffer, *demos, env);
    log.demo_reward_events = count_events(demos->rewards(), env.reward_params());
  }

  std::mt19937_64 noise_rng(config.seed * 2 + 14);
  const double length = env.track().total_length();
  std::size_t cum_events = 0;
  std::size_t episodes = 0;
  std::size_t laps = 0;
  double episode_return = 0.0;
  double episode_progress = 0.0;
  double window_return_sum = 0.0;
  std::size_t window_episodes = 0;
  double window_critic = 0.0;
  double window_actor = 0.0;
  std::size_t window_updates = 0;
  bool need_reset = true;
  Observation obs;

  auto finish_episode = [&] {
    ++episodes;
    window_return_sum += episode_return;
    ++window_episodes;
    episode_return = 0.0;
    episode_progress = 0.0;
    need_reset = true;
  };

  for (long step = 1; step <= budget; ++step) {
    if (need_reset) {
      obs = env.reset(env.sample_spawn());
      need_reset = false;
    }
    const Action a = agent.act(obs, config.noise_sigma(step - 1), noise_rng);
    const StepResult r = env.step(a);
    buffer.add({obs, a, r.reward, r.obs, r.off_track, false});
    obs = r.obs;
    if (r.reward_event) ++cum_events;
    episode_return += r.reward;
    const double before = std::floor(std::max(0.0, episode_progress) / length);
    episode_progress += r.progress;
    const double after = std::floor(std::max(0.0, episode_progress) / length);
    if (after > before) laps += static_cast<std::size_t>(after - before);
    if (r.done()) finish_episode();

    if (step > config.warmup_steps && buffer.size() >= static_cast<std::size_t>(config.batch_size)) {
      const UpdateStats s = agent.update(buffer);
      window_critic += s.critic_loss;
      window_actor += s.actor_objective;
      ++window_updates;
    }

    if (step % config.checkpoint_interval == 0 || step == budget) {
      TrainingCheckpoint c;
      c.step = step;
      c.cum_reward_events = cum_events;
      c.episodes = episodes;
      c.laps = laps;
      c.mean_return = window_episodes ? window_return_sum / static_cast<double>(window_episodes) : episode_return;
      c.critic_loss = window_updates ? window_critic / static_cast<double>(window_updates) : 0.0;
      c.actor_obj = window_updates ? window_actor / static_cast<double>(window_updates) : 0.0;
      log.checkpoints.push_back(c);
      window_return_sum = 0.0;
      window_episodes = 0;
      window_critic = window_actor = 0.0;
      window_updates = 0;
    }
  }
  return {agent.actor(), agent.critic(), std::move(log)};
}

}  // namespace demodrive
