#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "demodrive/demo_store.hpp"
#include "demodrive/nn.hpp"

namespace demodrive {

struct BcConfig {
  int epochs = 50;
  int batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double train_fraction = 0.9;

  void validate() const;  // throws ArgumentError
  bool operator==(const BcConfig&) const = default;
};

void to_json(nlohmann::json& j, const BcConfig& c);
void from_json(const nlohmann::json& j, BcConfig& c);

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_mse = 0.0;
  double test_mse = 0.0;
};

struct BcResult {
  nn::NetworkParams policy;
  std::vector<EpochStats> report;
  int best_epoch = 0;
};

// Regresses normalized (speed, steer) labels from observations with mini-batch
// Adam. The returned policy is the epoch with the lowest test MSE. Throws
// TrainingError (naming the epoch) on a non-finite loss.
BcResult train_bc(const DemoSet& demos, const BcConfig& config);

// Lower-level entry for arbitrary regression data (inputs/targets are columns).
// Used by train_bc and by the realizable-target tests.
BcResult train_regression(const nn::MlpSpec& spec, const Eigen::MatrixXd& train_x, const Eigen::MatrixXd& train_y,
                          const Eigen::MatrixXd& test_x, const Eigen::MatrixXd& test_y, const BcConfig& config);

double mean_squared_error(const nn::NetworkParams& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

// Observations and normalized action labels of a demo set, one column per sample.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> demo_matrices(const DemoSet& demos);

// CSV columns: epoch, train_mse, test_mse.
std::string report_csv(const std::vector<EpochStats>& report);

}  // namespace demodrive
