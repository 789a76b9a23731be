#include "demodrive/track.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "demodrive/errors.hpp"
#include "demodrive/io.hpp"

namespace demodrive {
namespace {

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto on_segment = [](Vec2 p, Vec2 q, Vec2 r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
           r.y <= std::max(p.y, q.y);
  };
  return (d1 == 0 && on_segment(a, b, c)) || (d2 == 0 && on_segment(a, b, d)) ||
         (d3 == 0 && on_segment(c, d, a)) || (d4 == 0 && on_segment(c, d, b));
}

struct Interval {
  double lo;
  double hi;
};

// Parameter interval of the ray origin + t * dir inside a disc.
bool disc_interval(Vec2 origin, Vec2 dir, Vec2 center, double radius, Interval& out) {
  const Vec2 oc = origin - center;
  const double b = dot(dir, oc);
  const double c = dot(oc, oc) - radius * radius;
  const double disc = b * b - c;
  if (disc < 0.0) return false;
  const double s = std::sqrt(disc);
  out = {-b - s, -b + s};
  return true;
}

// Parameter interval inside the rectangle swept by segment a-b with half width w.
bool slab_interval(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b, double w, Interval& out) {
  const Vec2 ab = b - a;
  const double len = norm(ab);
  if (len == 0.0) return false;
  const Vec2 e = ab * (1.0 / len);
  const Vec2 n{-e.y, e.x};
  const Vec2 rel = origin - a;
  const double u0 = dot(rel, e);
  const double v0 = dot(rel, n);
  const double du = dot(dir, e);
  const double dv = dot(dir, n);
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  auto clip = [&](double p0, double dp, double mn, double mx) {
    if (dp == 0.0) return p0 >= mn && p0 <= mx;
    double t0 = (mn - p0) / dp;
    double t1 = (mx - p0) / dp;
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
    return lo <= hi;
  };
  if (!clip(u0, du, 0.0, len)) return false;
  if (!clip(v0, dv, -w, w)) return false;
  out = {lo, hi};
  return true;
}

}  // namespace

Track::Track(std::vector<Vec2> centerline, double lane_half_width, Vec2 bounds)
    : points_(std::move(centerline)), half_width_(lane_half_width), bounds_(bounds) {
  const std::size_t n = points_.size();
  if (n < 4) throw ValidationError("track centerline needs at least 4 vertices");
  if (!(half_width_ > 0.0) || !std::isfinite(half_width_)) {
    throw ValidationError("lane_half_width must be positive");
  }
  if (!(bounds_.x > 0.0) || !(bounds_.y > 0.0)) throw ValidationError("bounds must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = points_[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ValidationError("non-finite centerline point");
    const double margin = std::min({p.x, p.y, bounds_.x - p.x, bounds_.y - p.y});
    if (margin < half_width_) {
      throw ValidationError("centerline vertex " + std::to_string(i) + " closer than lane_half_width to bounds");
    }
    if (points_[(i + 1) % n] == p) throw ValidationError("duplicate consecutive centerline vertex");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(points_[i], points_[(i + 1) % n], points_[j], points_[(j + 1) % n])) {
        throw ValidationError("centerline self-intersects");
      }
    }
  }
  cumulative_.resize(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    cumulative_[i + 1] = cumulative_[i] + norm(points_[(i + 1) % n] - points_[i]);
  }
  total_length_ = cumulative_[n];
}

TrackQuery Track::query(Vec2 p) const {
  const std::size_t n = points_.size();
  TrackQuery best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = points_[i];
    const Vec2 ab = points_[(i + 1) % n] - a;
    const double len2 = dot(ab, ab);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    const Vec2 c = a + ab * t;
    const Vec2 diff = p - c;
    const double d2 = dot(diff, diff);
    // Strict comparison: ties keep the smaller arc position.
    if (d2 < best_d2) {
      best_d2 = d2;
      best.nearest_point = c;
      best.arc_position = cumulative_[i] + t * std::sqrt(len2);
      const double side = cross(ab, diff);
      best.lateral_offset = (side >= 0.0 ? 1.0 : -1.0) * std::sqrt(d2);
    }
  }
  best.arc_position = wrap_arc(best.arc_position);
  best.dist_to_edge = half_width_ - std::abs(best.lateral_offset);
  return best;
}

TrackPoint Track::point_at(double s) const {
  s = wrap_arc(s);
  const std::size_t n = points_.size();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t i = static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;
  i = std::min(i, n - 1);
  const Vec2 a = points_[i];
  const Vec2 ab = points_[(i + 1) % n] - a;
  const double len = cumulative_[i + 1] - cumulative_[i];
  const double t = len > 0.0 ? (s - cumulative_[i]) / len : 0.0;
  return {a + ab * t, std::atan2(ab.y, ab.x)};
}

double Track::wrap_arc(double s) const {
  double r = std::fmod(s, total_length_);
  if (r < 0.0) r += total_length_;
  if (r >= total_length_) r = 0.0;
  return r;
}

double Track::progress_delta(double a, double b) const {
  const double half = 0.5 * total_length_;
  double d = std::fmod(b - a, total_length_);
  if (d > half) d -= total_length_;
  if (d <= -half) d += total_length_;
  return d;
}

double Track::edge_crossing_distance(Vec2 origin, Vec2 dir, double max_range) const {
  const std::size_t n = points_.size();
  std::vector<Interval> intervals;
  intervals.reserve(n);
  bool inside = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = points_[i];
    const Vec2 b = points_[(i + 1) % n];
    // Capsule = slab plus the two end discs; the union of their intervals is
    // a single interval because the capsule is convex.
    Interval acc{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    Interval part{};
    bool hit = false;
    if (slab_interval(origin, dir, a, b, half_width_, part)) {
      acc = {std::min(acc.lo, part.lo), std::max(acc.hi, part.hi)};
      hit = true;
    }
    if (disc_interval(origin, dir, a, half_width_, part)) {
      acc = {std::min(acc.lo, part.lo), std::max(acc.hi, part.hi)};
      hit = true;
    }
    if (disc_interval(origin, dir, b, half_width_, part)) {
      acc = {std::min(acc.lo, part.lo), std::max(acc.hi, part.hi)};
      hit = true;
    }
    if (!hit || acc.hi < 0.0) continue;
    if (acc.lo <= 0.0) inside = true;
    intervals.push_back(acc);
  }
  if (inside) {
    std::sort(intervals.begin(), intervals.end(), [](const Interval& l, const Interval& r) { return l.lo < r.lo; });
    double reach = 0.0;
    for (const Interval& iv : intervals) {
      if (iv.lo > reach) break;
      reach = std::max(reach, iv.hi);
      if (reach >= max_range) return max_range;
    }
    return std::min(reach, max_range);
  }
  double first = max_range;
  for (const Interval& iv : intervals) first = std::min(first, iv.lo);
  return first;
}

std::string Track::hash() const { return to_hex(fnv1a64(to_json().dump())); }

nlohmann::json Track::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const Vec2& p : points_) pts.push_back({p.x, p.y});
  return {{"centerline", pts}, {"lane_half_width", half_width_}, {"bounds", {bounds_.x, bounds_.y}}};
}

Track Track::from_json(const nlohmann::json& j) {
  try {
    std::vector<Vec2> pts;
    for (const auto& p : j.at("centerline")) {
      if (p.size() != 2) throw ValidationError("centerline points must be [x, y]");
      pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    const auto& b = j.at("bounds");
    if (b.size() != 2) throw ValidationError("bounds must be [W, H]");
    return Track(std::move(pts), j.at("lane_half_width").get<double>(), {b.at(0).get<double>(), b.at(1).get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed track document: ") + e.what());
  }
}

Track Track::load(const std::string& path) {
  const std::string text = read_file(path);
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw CorruptError("track file " + path + " is not valid JSON");
  return from_json(j);
}

void Track::save(const std::string& path) const { write_file_atomic(path, to_json().dump(2) + "\n"); }

bool Track::operator==(const Track& other) const {
  return points_ == other.points_ && half_width_ == other.half_width_ && bounds_ == other.bounds_;
}

Track default_track() {
  using namespace default_track_params;
  const double r = kCornerRadius;
  const double x0 = kInset;
  const double y0 = kInset;
  const double x1 = kWidth - kInset;
  const double y1 = kHeight - kInset;
  std::vector<Vec2> pts;
  pts.push_back({0.5 * (x0 + x1), y0});
  auto corner = [&](Vec2 center, double start_angle) {
    for (int k = 0; k <= kArcSegments; ++k) {
      const double a = start_angle + (std::numbers::pi / 2.0) * k / kArcSegments;
      pts.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
    }
  };
  // Each corner emits both arc end points; the straights are the segments
  // joining consecutive corners.
  corner({x1 - r, y0 + r}, -std::numbers::pi / 2.0);
  corner({x1 - r, y1 - r}, 0.0);
  corner({x0 + r, y1 - r}, std::numbers::pi / 2.0);
  corner({x0 + r, y0 + r}, std::numbers::pi);
  return Track(std::move(pts), kLaneHalfWidth, {kWidth, kHeight});
}

Track resolve_track(const std::string& spec) {
  if (spec.empty() || spec == "default") return default_track();
  return Track::load(spec);
}

}  // namespace demodrive
