#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "demodrive/errors.hpp"
#include "demodrive/io.hpp"
#include "demodrive/nn.hpp"
#include "oracles.hpp"

using namespace demodrive;
namespace fs = std::filesystem;

namespace {

nn::MlpSpec spec_of(std::vector<int> sizes, nn::Activation out = nn::Activation::Identity) {
  return {std::move(sizes), nn::Activation::Tanh, out};
}

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

fs::path temp_dir() {
  const fs::path d = fs::temp_directory_path() / "demodrive_nn_test";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(NnInit, DeterministicZeroBiasGlorotBound) {
  const nn::MlpSpec spec = spec_of({10, 64, 64, 2}, nn::Activation::Tanh);
  const nn::NetworkParams a = nn::init(spec, 7), b = nn::init(spec, 7), c = nn::init(spec, 8);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a == c);
  for (const auto& layer : a.layers) {
    EXPECT_TRUE((layer.b.array() == 0.0).all());
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.w.rows() + layer.w.cols()));
    EXPECT_LE(layer.w.cwiseAbs().maxCoeff(), bound);
  }
  EXPECT_EQ(a.parameter_count(), 10u * 64 + 64 + 64 * 64 + 64 + 64 * 2 + 2);
}

TEST(NnInit, WeightMeanWithinThreeSigma) {
  const nn::NetworkParams p = nn::init(spec_of({100, 100}), 3);
  const Eigen::MatrixXd& w = p.layers[0].w;
  const double bound = std::sqrt(6.0 / 200.0);
  const double sigma_mean = bound / std::sqrt(3.0) / std::sqrt(static_cast<double>(w.size()));
  EXPECT_LT(std::abs(w.mean()), 3.0 * sigma_mean);
}

TEST(NnForward, ZeroNetTanhOutput) {
  nn::NetworkParams p = nn::init(spec_of({3, 4, 2}, nn::Activation::Tanh), 1);
  for (auto& l : p.layers) {
    l.w.setZero();
    l.b.setZero();
  }
  EXPECT_TRUE((nn::forward(p, Eigen::VectorXd(Eigen::VectorXd::Ones(3))).array() == 0.0).all());
}

TEST(NnForward, HandComputedLinear) {
  nn::NetworkParams p = nn::init(spec_of({1, 1}), 1);
  p.layers[0].w << 2.0;
  p.layers[0].b << 1.0;
  Eigen::VectorXd x(1);
  x << 3.0;
  EXPECT_DOUBLE_EQ(nn::forward(p, x)[0], 7.0);
}

TEST(NnForward, PureAndShapeChecked) {
  std::mt19937_64 rng(2);
  const nn::NetworkParams p = nn::init(spec_of({5, 7, 3}), 4);
  const Eigen::MatrixXd x = random_matrix(5, 6, rng);
  EXPECT_EQ(nn::forward(p, x), nn::forward(p, x));
  // Batched and per-column passes agree.
  const Eigen::MatrixXd batched = nn::forward(p, x);
  for (int c = 0; c < 6; ++c) EXPECT_TRUE(batched.col(c).isApprox(nn::forward(p, Eigen::VectorXd(x.col(c))), 1e-14));
  EXPECT_THROW(nn::forward(p, Eigen::MatrixXd(Eigen::MatrixXd::Zero(4, 2))), ShapeError);
}

TEST(NnBackward, FiniteDifferencesOnTenFourTwo) {
  std::mt19937_64 rng(5);
  const nn::NetworkParams p = nn::init(spec_of({10, 4, 2}, nn::Activation::Tanh), 6);
  EXPECT_LT(oracle::nn_gradient_error(p, random_matrix(10, 3, rng), random_matrix(2, 3, rng)), 1e-5);
}

TEST(NnBackward, FiniteDifferencesOnRandomNets) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const nn::MlpSpec spec = oracle::random_spec(rng);
    nn::NetworkParams p = nn::init(spec, 100 + trial);
    for (auto& l : p.layers) l.b = random_matrix(l.b.size(), 1, rng, 0.3);
    const Eigen::MatrixXd x = random_matrix(spec.input_size(), 4, rng);
    const Eigen::MatrixXd g = random_matrix(spec.output_size(), 4, rng);
    EXPECT_LT(oracle::nn_gradient_error(p, x, g), 1e-5) << "trial " << trial;
  }
}

TEST(NnBackward, ZeroAndLinearInOutputGrad) {
  std::mt19937_64 rng(7);
  const nn::NetworkParams p = nn::init(spec_of({4, 5, 3}), 8);
  const Eigen::MatrixXd x = random_matrix(4, 2, rng), g = random_matrix(3, 2, rng);
  nn::Tape tape;
  nn::forward(p, x, &tape);
  const nn::ParamGrads zero = nn::backward(p, tape, Eigen::MatrixXd::Zero(3, 2));
  for (const auto& l : zero.layers) {
    EXPECT_TRUE((l.w.array() == 0.0).all());
    EXPECT_TRUE((l.b.array() == 0.0).all());
  }
  const nn::ParamGrads g1 = nn::backward(p, tape, g), g2 = nn::backward(p, tape, 2.0 * g);
  for (std::size_t l = 0; l < g1.layers.size(); ++l) {
    EXPECT_TRUE((2.0 * g1.layers[l].w).isApprox(g2.layers[l].w, 1e-14));
    EXPECT_TRUE((2.0 * g1.layers[l].b).isApprox(g2.layers[l].b, 1e-14));
  }
  EXPECT_THROW(nn::backward(p, tape, Eigen::MatrixXd::Zero(2, 2)), ShapeError);
}

namespace {

nn::ParamGrads grads_like(const nn::NetworkParams& p, double value) {
  nn::ParamGrads g;
  for (const auto& l : p.layers) {
    g.layers.push_back({Eigen::MatrixXd::Constant(l.w.rows(), l.w.cols(), value),
                        Eigen::VectorXd::Constant(l.b.size(), value)});
  }
  return g;
}

}  // namespace

TEST(NnAdam, FirstStepClosedForm) {
  nn::NetworkParams p = nn::init(spec_of({1, 1}), 1);
  p.layers[0].w << 0.0;
  p.layers[0].b << 0.0;
  nn::AdamState s = nn::AdamState::for_params(p, 0.001);
  nn::adam_step(p, grads_like(p, 1.0), s);
  // m_hat = 1, v_hat = 1, step = -lr * 1 / (1 + eps).
  EXPECT_LT(std::abs(p.layers[0].w(0, 0) + 0.001), 1e-9);
  EXPECT_LT(std::abs(p.layers[0].b(0) + 0.001), 1e-9);
  EXPECT_EQ(s.step, 1);
}

TEST(NnAdam, ZeroGradientLeavesParams) {
  nn::NetworkParams p = nn::init(spec_of({3, 4, 2}), 2);
  const nn::NetworkParams before = p;
  nn::AdamState s = nn::AdamState::for_params(p, 0.01);
  for (int i = 0; i < 5; ++i) nn::adam_step(p, grads_like(p, 0.0), s);
  EXPECT_EQ(p, before);
}

TEST(NnAdam, ConvexQuadraticMonotoneAfterTenSteps) {
  nn::NetworkParams p = nn::init(spec_of({4, 3}), 3);
  std::mt19937_64 rng(4);
  // Every coordinate starts 2-3 units from its optimum; 200 steps of at most
  // ~lr each cannot reach it, so Adam never enters its oscillation regime.
  std::uniform_real_distribution<double> gap(2.0, 3.0);
  std::bernoulli_distribution sign(0.5);
  nn::NetworkParams target = p;
  for (auto& l : target.layers) {
    for (Eigen::Index i = 0; i < l.w.size(); ++i) l.w.data()[i] += (sign(rng) ? 1 : -1) * gap(rng);
    for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b[i] += (sign(rng) ? 1 : -1) * gap(rng);
  }
  auto loss = [&] {
    double s = 0.0;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      s += (p.layers[l].w - target.layers[l].w).squaredNorm() + (p.layers[l].b - target.layers[l].b).squaredNorm();
    }
    return s;
  };
  nn::AdamState s = nn::AdamState::for_params(p, 0.005);
  double prev = loss();
  for (int it = 1; it <= 200; ++it) {
    nn::ParamGrads g;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      g.layers.push_back({2.0 * (p.layers[l].w - target.layers[l].w), 2.0 * (p.layers[l].b - target.layers[l].b)});
    }
    nn::adam_step(p, g, s);
    const double cur = loss();
    if (it > 10) EXPECT_LT(cur, prev) << "step " << it;
    prev = cur;
  }
}

TEST(NnAdam, NonFiniteGradientRejectedUntouched) {
  nn::NetworkParams p = nn::init(spec_of({2, 2}), 5);
  const nn::NetworkParams before = p;
  nn::AdamState s = nn::AdamState::for_params(p, 0.01);
  nn::ParamGrads g = grads_like(p, 0.5);
  g.layers[0].w(1, 1) = NAN;
  EXPECT_THROW(nn::adam_step(p, g, s), TrainingError);
  EXPECT_EQ(p, before);
  EXPECT_EQ(s.step, 0);
}

TEST(NnSoftUpdate, ElementwiseAndContraction) {
  const nn::MlpSpec spec = spec_of({3, 5, 2});
  nn::NetworkParams target = nn::init(spec, 1);
  const nn::NetworkParams online = nn::init(spec, 2);
  const nn::NetworkParams old = target;
  nn::soft_update(target, online, 0.005);
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    const Eigen::MatrixXd expect = 0.995 * old.layers[l].w + 0.005 * online.layers[l].w;
    EXPECT_LT((target.layers[l].w - expect).cwiseAbs().maxCoeff(), 1e-12);
  }
  // Distance to the online net shrinks by exactly (1 - tau) per update.
  const double tau = 0.1;
  double dist = (target.layers[0].w - online.layers[0].w).norm();
  for (int i = 0; i < 20; ++i) {
    nn::soft_update(target, online, tau);
    const double next = (target.layers[0].w - online.layers[0].w).norm();
    EXPECT_NEAR(next, (1.0 - tau) * dist, 1e-12);
    dist = next;
  }
}

TEST(NnPersistence, BitExactRoundTrip) {
  std::mt19937_64 rng(9);
  nn::NetworkParams p = nn::init(spec_of({10, 64, 64, 2}, nn::Activation::Tanh), 11);
  p.layers[1].b = random_matrix(64, 1, rng, 1e-3);
  const std::string path = (temp_dir() / "model.json").string();
  nn::save(p, path);
  EXPECT_EQ(nn::load(path), p);
  EXPECT_EQ(nn::from_json(nn::to_json(p)), p);
}

TEST(NnPersistence, DistinctErrors) {
  const nn::NetworkParams p = nn::init(spec_of({3, 4, 2}), 1);
  const fs::path dir = temp_dir();
  EXPECT_THROW(nn::load((dir / "absent.json").string()), IoError);

  nlohmann::json doc = nn::to_json(p);
  doc["format_version"] = 2;
  write_file_atomic((dir / "v2.json").string(), doc.dump());
  EXPECT_THROW(nn::load((dir / "v2.json").string()), VersionError);

  const std::string text = nn::to_json(p).dump();
  write_file_atomic((dir / "trunc.json").string(), text.substr(0, text.size() / 2));
  EXPECT_THROW(nn::load((dir / "trunc.json").string()), CorruptError);

  doc = nn::to_json(p);
  doc["layers"][0]["b"].erase(0);
  write_file_atomic((dir / "shape.json").string(), doc.dump());
  EXPECT_THROW(nn::load((dir / "shape.json").string()), CorruptError);
}

TEST(NnSpec, Validation) {
  EXPECT_THROW(nn::init(spec_of({3}), 1), ShapeError);
  EXPECT_THROW(nn::init(spec_of({3, 0, 2}), 1), ShapeError);
}
