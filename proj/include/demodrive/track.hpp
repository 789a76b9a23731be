#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "demodrive/geometry.hpp"

namespace demodrive {

// Result of projecting a point onto the track centerline.
struct TrackQuery {
  Vec2 nearest_point;
  double arc_position = 0.0;  // [0, total_length)
  double lateral_offset = 0.0;  // signed, left of the local tangent is positive
  double dist_to_edge = 0.0;  // lane_half_width - |lateral_offset|; negative outside the lane
};

// Point and tangent heading at an arc position.
struct TrackPoint {
  Vec2 point;
  double heading = 0.0;
};

// Closed single-lane track: a polyline centerline with a constant half width.
// Immutable once constructed; every constructor path validates.
class Track {
public:
  // Throws ValidationError if the geometry breaks any invariant:
  // >= 4 vertices, no self intersection, positive half width, every vertex at
  // least lane_half_width inside the [0, W] x [0, H] bounds.
  Track(std::vector<Vec2> centerline, double lane_half_width, Vec2 bounds);

  const std::vector<Vec2>& centerline() const noexcept { return points_; }
  double lane_half_width() const noexcept { return half_width_; }
  Vec2 bounds() const noexcept { return bounds_; }
  double total_length() const noexcept { return total_length_; }
  std::size_t segment_count() const noexcept { return points_.size(); }

  // Arc length at the start of segment i (segment i joins vertex i and i+1 mod n).
  double segment_start_arc(std::size_t i) const { return cumulative_[i]; }

  TrackQuery query(Vec2 p) const;

  // Position and tangent heading at arc position s (wrapped into [0, L)).
  TrackPoint point_at(double s) const;

  // Signed shortest wrap-around difference b - a, in (-L/2, L/2].
  double progress_delta(double a, double b) const;

  // Wraps any arc value into [0, L).
  double wrap_arc(double s) const;

  // Distance along the unit ray origin + t * dir to the first crossing of a
  // lane edge, capped at max_range. From inside the lane this is where the ray
  // leaves the lane; from outside it is where the ray enters it.
  double edge_crossing_distance(Vec2 origin, Vec2 dir, double max_range) const;

  // Stable 64-bit fingerprint of the geometry, hex encoded.
  std::string hash() const;

  nlohmann::json to_json() const;
  static Track from_json(const nlohmann::json& j);

  static Track load(const std::string& path);
  void save(const std::string& path) const;

  bool operator==(const Track& other) const;

private:
  std::vector<Vec2> points_;
  std::vector<double> cumulative_;  // size n + 1, cumulative_[n] == total length
  double half_width_;
  Vec2 bounds_;
  double total_length_ = 0.0;
};

// Built-in 9 ft x 6 ft loop: rounded rectangle inset 0.25 m from the bounds,
// corner radius 0.20 m, lane half width 0.10 m. Arc 0 is the middle of the
// bottom straight and the loop runs counter-clockwise.
Track default_track();

// Resolves the `--track` argument: "default" or a JSON file path.
Track resolve_track(const std::string& spec);

namespace default_track_params {
inline constexpr double kWidth = 2.74;
inline constexpr double kHeight = 1.83;
inline constexpr double kInset = 0.25;
inline constexpr double kCornerRadius = 0.20;
inline constexpr double kLaneHalfWidth = 0.10;
inline constexpr int kArcSegments = 32;
}  // namespace default_track_params

}  // namespace demodrive
