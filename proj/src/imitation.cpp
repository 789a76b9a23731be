#include "demodrive/imitation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "demodrive/errors.hpp"
#include "demodrive/json_util.hpp"
#include "demodrive/policy.hpp"

namespace demodrive {

void BcConfig::validate() const {
  if (epochs < 1) throw ArgumentError("epochs must be >= 1");
  if (batch_size < 1) throw ArgumentError("batch size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ArgumentError("learning rate must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ArgumentError("train fraction must lie in (0, 1)");
}

void to_json(nlohmann::json& j, const BcConfig& c) {
  j = {{"epochs", c.epochs}, {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
       {"seed", c.seed}, {"train_fraction", c.train_fraction}};
}

void from_json(const nlohmann::json& j, BcConfig& c) {
  json_util::reject_unknown_keys(j, {"epochs", "batch_size", "learning_rate", "seed", "train_fraction"}, "bc");
  json_util::read_opt(j, "epochs", c.epochs);
  json_util::read_opt(j, "batch_size", c.batch_size);
  json_util::read_opt(j, "learning_rate", c.learning_rate);
  json_util::read_opt(j, "seed", c.seed);
  json_util::read_opt(j, "train_fraction", c.train_fraction);
}

double mean_squared_error(const nn::NetworkParams& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.cols() == 0) return 0.0;
  const Eigen::MatrixXd pred = nn::forward(net, x);
  return (pred - y).squaredNorm() / static_cast<double>(y.size());
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> demo_matrices(const DemoSet& demos) {
  const auto n = static_cast<Eigen::Index>(demos.size());
  Eigen::MatrixXd x(kObservationSize, n);
  Eigen::MatrixXd y(kActionSize, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const DemoSample& s = demos.samples()[static_cast<std::size_t>(i)];
    x.col(i) = observation_vector(s.obs);
    const auto a = normalize_action(s.action);
    y(0, i) = a[0];
    y(1, i) = a[1];
  }
  return {std::move(x), std::move(y)};
}

BcResult train_regression(const nn::MlpSpec& spec, const Eigen::MatrixXd& train_x, const Eigen::MatrixXd& train_y,
                          const Eigen::MatrixXd& test_x, const Eigen::MatrixXd& test_y, const BcConfig& config) {
  config.validate();
  if (train_x.cols() == 0) throw DatasetError("no training samples");
  if (train_x.cols() != train_y.cols() || test_x.cols() != test_y.cols()) throw ShapeError("input/target count mismatch");
  if (train_y.rows() != spec.output_size() || train_x.rows() != spec.input_size()) {
    throw ShapeError("regression data does not match the network spec");
  }

  BcResult result;
  result.policy = nn::init(spec, config.seed);
  nn::AdamState adam = nn::AdamState::for_params(result.policy, config.learning_rate);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  const Eigen::Index n = train_x.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  nn::NetworkParams best = result.policy;
  double best_test = std::numeric_limits<double>::infinity();
  nn::Tape tape;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index count = std::min<Eigen::Index>(config.batch_size, n - start);
      Eigen::MatrixXd bx(train_x.rows(), count);
      Eigen::MatrixXd by(train_y.rows(), count);
      for (Eigen::Index k = 0; k < count; ++k) {
        bx.col(k) = train_x.col(order[static_cast<std::size_t>(start + k)]);
        by.col(k) = train_y.col(order[static_cast<std::size_t>(start + k)]);
      }
      const Eigen::MatrixXd pred = nn::forward(result.policy, bx, &tape);
      const Eigen::MatrixXd diff = pred - by;
      const double loss = diff.squaredNorm() / static_cast<double>(diff.size());
      if (!std::isfinite(loss)) throw TrainingError("non-finite loss in epoch " + std::to_string(epoch));
      const Eigen::MatrixXd grad = diff * (2.0 / static_cast<double>(diff.size()));
      try {
        nn::adam_step(result.policy, nn::backward(result.policy, tape, grad), adam);
      } catch (const TrainingError& e) {
        throw TrainingError("epoch " + std::to_string(epoch) + ": " + e.what());
      }
    }
    const double train_mse = mean_squared_error(result.policy, train_x, train_y);
    const double test_mse = test_x.cols() > 0 ? mean_squared_error(result.policy, test_x, test_y) : train_mse;
    if (!std::isfinite(train_mse) || !std::isfinite(test_mse)) {
      throw TrainingError("non-finite loss in epoch " + std::to_string(epoch));
    }
    result.report.push_back({epoch, train_mse, test_mse});
    if (test_mse < best_test) {
      best_test = test_mse;
      best = result.policy;
      result.best_epoch = epoch;
    }
  }
  result.policy = std::move(best);
  return result;
}

BcResult train_bc(const DemoSet& demos, const BcConfig& config) {
  config.validate();
  const auto [train, test] = split(demos, config.train_fraction, config.seed);
  const auto [train_x, train_y] = demo_matrices(train);
  const auto [test_x, test_y] = demo_matrices(test);
  return train_regression(policy_spec(), train_x, train_y, test_x, test_y, config);
}

std::string report_csv(const std::vector<EpochStats>& report) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,train_mse,test_mse\n";
  for (const auto& e : report) out << e.epoch << ',' << e.train_mse << ',' << e.test_mse << '\n';
  return out.str();
}

}  // namespace demodrive
