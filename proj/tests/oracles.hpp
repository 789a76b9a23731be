#pragma once

// Brute-force reference implementations used by the unit and acceptance
// tests. They only read the track's vertex list and half width; none of them
// calls into the query or raycast code they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "demodrive/nn.hpp"
#include "demodrive/track.hpp"

namespace oracle {

using demodrive::Vec2;

inline double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

// Distance to the closed centerline, scanning every segment.
inline double centerline_distance(const std::vector<Vec2>& pts, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    best = std::min(best, segment_distance(p, pts[i], pts[(i + 1) % pts.size()]));
  }
  return best;
}

inline bool in_lane(const std::vector<Vec2>& pts, double w, Vec2 p) { return centerline_distance(pts, p) <= w; }

// Lane boundary sampled every `spacing` meters: both offsets of every segment
// plus the round caps at every vertex, keeping only points that no other part
// of the lane covers.
class EdgeSamples {
public:
  EdgeSamples(const demodrive::Track& track, double spacing = 1e-3)
      : pts_(track.centerline()), w_(track.lane_half_width()) {
    const std::size_t n = pts_.size();
    std::vector<Vec2> raw;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 a = pts_[i], b = pts_[(i + 1) % n];
      const double len = std::hypot(b.x - a.x, b.y - a.y);
      const Vec2 u{(b.x - a.x) / len, (b.y - a.y) / len};
      const Vec2 nrm{-u.y, u.x};
      const int k = std::max(1, static_cast<int>(std::ceil(len / spacing)));
      for (int j = 0; j <= k; ++j) {
        const double t = len * j / k;
        for (double s : {-1.0, 1.0}) raw.push_back({a.x + u.x * t + s * w_ * nrm.x, a.y + u.y * t + s * w_ * nrm.y});
      }
      const int m = std::max(8, static_cast<int>(std::ceil(2.0 * std::numbers::pi * w_ / spacing)));
      for (int j = 0; j < m; ++j) {
        const double ang = 2.0 * std::numbers::pi * j / m;
        raw.push_back({a.x + w_ * std::cos(ang), a.y + w_ * std::sin(ang)});
      }
    }
    for (const Vec2& q : raw) {
      if (centerline_distance(pts_, q) >= w_ - 1e-9) samples_.push_back(q);
    }
  }

  // Signed distance to the nearest boundary sample: positive inside the lane.
  double signed_distance(Vec2 p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& q : samples_) best = std::min(best, std::hypot(p.x - q.x, p.y - q.y));
    return in_lane(pts_, w_, p) ? best : -best;
  }

  std::size_t size() const { return samples_.size(); }

private:
  std::vector<Vec2> pts_;
  double w_;
  std::vector<Vec2> samples_;
};

// Marches along the ray until the in-lane status flips. Far from the boundary
// it advances by the distance to it (the status cannot change within that
// distance); within `step` of it, it walks in fixed `step` increments.
inline double march_ray(const demodrive::Track& track, Vec2 origin, double angle, double max_range,
                        double step = 1e-4) {
  const auto& pts = track.centerline();
  const double w = track.lane_half_width();
  const Vec2 dir{std::cos(angle), std::sin(angle)};
  const bool start_inside = in_lane(pts, w, origin);
  double t = 0.0;
  while (t < max_range) {
    const Vec2 p{origin.x + dir.x * t, origin.y + dir.y * t};
    const double d = centerline_distance(pts, p);
    if ((d <= w) != start_inside) return t;
    const double gap = std::abs(d - w);
    t += gap > step ? gap - 0.5 * step : step;
  }
  return max_range;
}

// Unicycle x' = v cos h, y' = v sin h, h' = w integrated with classic RK4.
struct UnicycleState {
  double x, y, h;
};

inline UnicycleState rk4_unicycle(UnicycleState s, double v, double w, double duration, double h_step) {
  auto f = [&](const UnicycleState& q) { return UnicycleState{v * std::cos(q.h), v * std::sin(q.h), w}; };
  const long n = std::lround(duration / h_step);
  for (long i = 0; i < n; ++i) {
    const UnicycleState k1 = f(s);
    const UnicycleState k2 = f({s.x + 0.5 * h_step * k1.x, s.y + 0.5 * h_step * k1.y, s.h + 0.5 * h_step * k1.h});
    const UnicycleState k3 = f({s.x + 0.5 * h_step * k2.x, s.y + 0.5 * h_step * k2.y, s.h + 0.5 * h_step * k2.h});
    const UnicycleState k4 = f({s.x + h_step * k3.x, s.y + h_step * k3.y, s.h + h_step * k3.h});
    s.x += h_step / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    s.y += h_step / 6.0 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
    s.h += h_step / 6.0 * (k1.h + 2 * k2.h + 2 * k3.h + k4.h);
  }
  return s;
}

// Central difference of a scalar function of one coordinate.
inline double central_difference(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// |a - b| / max(|a|, |b|, floor): relative error that stays meaningful near zero.
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Max relative error between backward() and central differences of
// sum(forward(x) .* g) over every weight, bias and input entry.
inline double nn_gradient_error(const demodrive::nn::NetworkParams& net, const Eigen::MatrixXd& x,
                                const Eigen::MatrixXd& g, double h = 1e-6, double floor = 1e-4) {
  namespace nn = demodrive::nn;
  nn::Tape tape;
  nn::forward(net, x, &tape);
  const nn::ParamGrads grads = nn::backward(net, tape, g);
  auto objective = [&](const nn::NetworkParams& p, const Eigen::MatrixXd& in) {
    return (nn::forward(p, in).array() * g.array()).sum();
  };
  double worst = 0.0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (Eigen::Index i = 0; i < net.layers[l].w.size(); ++i) {
      nn::NetworkParams p = net;
      const double base = p.layers[l].w.data()[i];
      const double fd = central_difference(
          [&](double v) {
            p.layers[l].w.data()[i] = v;
            return objective(p, x);
          },
          base, h);
      worst = std::max(worst, relative_error(grads.layers[l].w.data()[i], fd, floor));
    }
    for (Eigen::Index i = 0; i < net.layers[l].b.size(); ++i) {
      nn::NetworkParams p = net;
      const double base = p.layers[l].b[i];
      const double fd = central_difference(
          [&](double v) {
            p.layers[l].b[i] = v;
            return objective(p, x);
          },
          base, h);
      worst = std::max(worst, relative_error(grads.layers[l].b[i], fd, floor));
    }
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::MatrixXd in = x;
    const double fd = central_difference(
        [&](double v) {
          in.data()[i] = v;
          return objective(net, in);
        },
        x.data()[i], h);
    worst = std::max(worst, relative_error(grads.input.data()[i], fd, floor));
  }
  return worst;
}

// A random MLP shape: 1-3 hidden layers of width 1-8, random output activation.
inline demodrive::nn::MlpSpec random_spec(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> depth(1, 3), width(1, 8), act(0, 1);
  demodrive::nn::MlpSpec spec;
  spec.layer_sizes.push_back(width(rng));
  const int d = depth(rng);
  for (int i = 0; i < d; ++i) spec.layer_sizes.push_back(width(rng));
  spec.layer_sizes.push_back(width(rng));
  spec.hidden_activation = demodrive::nn::Activation::Tanh;
  spec.output_activation = act(rng) ? demodrive::nn::Activation::Tanh : demodrive::nn::Activation::Identity;
  return spec;
}

}  // namespace oracle
