#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "demodrive/errors.hpp"
#include "demodrive/track.hpp"
#include "oracles.hpp"

using namespace demodrive;

namespace {

// A point on the bottom straight: arc 0 sits at its midpoint, heading +x.
Vec2 bottom_straight_point(double dx) {
  const Track t = default_track();
  const TrackPoint tp = t.point_at(0.0);
  return {tp.point.x + dx, tp.point.y};
}

}  // namespace

TEST(DefaultTrack, Dimensions) {
  const Track t = default_track();
  EXPECT_DOUBLE_EQ(t.bounds().x, 2.74);
  EXPECT_DOUBLE_EQ(t.bounds().y, 1.83);
  EXPECT_DOUBLE_EQ(t.lane_half_width(), 0.10);
  // Four straights plus four quarter circles of radius 0.2.
  const double straights = 2 * (2.74 - 2 * 0.25 - 0.4) + 2 * (1.83 - 2 * 0.25 - 0.4);
  const double arcs_chord = 4 * 32 * 2 * 0.2 * std::sin(std::numbers::pi / 128.0);
  EXPECT_NEAR(t.total_length(), straights + arcs_chord, 1e-9);
}

TEST(DefaultTrack, Deterministic) {
  EXPECT_EQ(default_track(), default_track());
  EXPECT_EQ(default_track().hash(), default_track().hash());
}

TEST(TrackQueryTest, OnCenterStraight) {
  const Track t = default_track();
  const TrackQuery q = t.query(bottom_straight_point(0.3));
  EXPECT_NEAR(q.lateral_offset, 0.0, 1e-12);
  EXPECT_NEAR(q.dist_to_edge, 0.10, 1e-12);
}

TEST(TrackQueryTest, DisplacedLeft) {
  const Track t = default_track();
  Vec2 p = bottom_straight_point(0.3);
  p.y += 0.03;  // heading +x, so +y is left
  const TrackQuery q = t.query(p);
  EXPECT_NEAR(q.lateral_offset, 0.03, 1e-12);
  EXPECT_NEAR(q.dist_to_edge, 0.07, 1e-12);
}

TEST(TrackQueryTest, CornerMatchesEdgeSampling) {
  const Track t = default_track();
  const oracle::EdgeSamples edges(t);
  // Around the bottom-right corner (arc centre at (2.29, 0.45)).
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(2.1, 2.62), uy(0.12, 0.62);
  for (int i = 0; i < 200; ++i) {
    const Vec2 p{ux(rng), uy(rng)};
    EXPECT_NEAR(t.query(p).dist_to_edge, edges.signed_distance(p), 2e-3) << p.x << "," << p.y;
  }
}

TEST(TrackQueryTest, RandomPointsMatchEdgeSampling) {
  const Track t = default_track();
  const oracle::EdgeSamples edges(t);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ux(0.0, 2.74), uy(0.0, 1.83);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p{ux(rng), uy(rng)};
    worst = std::max(worst, std::abs(t.query(p).dist_to_edge - edges.signed_distance(p)));
  }
  EXPECT_LT(worst, 2e-3);
}

TEST(TrackQueryTest, InsideLaneRangeAndSignConsistency) {
  const Track t = default_track();
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> arc(0.0, t.total_length()), lat(-0.1, 0.1);
  for (int i = 0; i < 2000; ++i) {
    const TrackPoint tp = t.point_at(arc(rng));
    const double l = lat(rng);
    const Vec2 p = tp.point + unit_from_angle(tp.heading + std::numbers::pi / 2) * l;
    const TrackQuery q = t.query(p);
    EXPECT_GE(q.dist_to_edge, -1e-12);
    EXPECT_LE(q.dist_to_edge, 0.10 + 1e-12);
    EXPECT_EQ(std::abs(q.lateral_offset) <= 0.10 + 1e-12, q.dist_to_edge >= -1e-12);
    EXPECT_NEAR(q.dist_to_edge, 0.10 - std::abs(q.lateral_offset), 1e-12);
  }
}

TEST(TrackQueryTest, ContinuousAwayFromMedialAxis) {
  const Track t = default_track();
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> arc(0.0, t.total_length()), lat(-0.09, 0.09), eps(-7e-4, 7e-4);
  for (int i = 0; i < 2000; ++i) {
    const TrackPoint tp = t.point_at(arc(rng));
    const Vec2 p = tp.point + unit_from_angle(tp.heading + std::numbers::pi / 2) * lat(rng);
    const Vec2 e{eps(rng), eps(rng)};
    const double a = t.query(p).dist_to_edge, b = t.query(p + e).dist_to_edge;
    EXPECT_LE(std::abs(a - b), norm(e) + 1e-6);
  }
}

TEST(TrackQueryTest, ArcPositionInRange) {
  const Track t = default_track();
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> ux(-1.0, 4.0), uy(-1.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const TrackQuery q = t.query({ux(rng), uy(rng)});
    EXPECT_GE(q.arc_position, 0.0);
    EXPECT_LT(q.arc_position, t.total_length());
  }
}

TEST(ProgressDelta, Examples) {
  const Track t = default_track();
  const double L = t.total_length();
  EXPECT_NEAR(t.progress_delta(1.0, 1.2), 0.2, 1e-12);
  EXPECT_NEAR(t.progress_delta(L - 0.1, 0.1), 0.2, 1e-12);
  EXPECT_NEAR(t.progress_delta(0.1, L - 0.1), -0.2, 1e-12);
}

TEST(ProgressDelta, AntisymmetricAndBounded) {
  const Track t = default_track();
  const double L = t.total_length();
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(0.0, L);
  for (int i = 0; i < 5000; ++i) {
    const double a = u(rng), b = u(rng);
    const double d = t.progress_delta(a, b);
    EXPECT_GT(d, -L / 2);
    EXPECT_LE(d, L / 2);
    if (std::abs(std::abs(d) - L / 2) > 1e-9) EXPECT_NEAR(d, -t.progress_delta(b, a), 1e-12);
  }
}

TEST(ProgressDelta, RandomWalkClosure) {
  const Track t = default_track();
  std::mt19937_64 rng(17);
  std::normal_distribution<double> step(0.0, 0.05);
  double s = 0.0, unwrapped = 0.0, prev = t.wrap_arc(0.0);
  for (int i = 0; i < 10000; ++i) {
    s += step(rng);
    const double cur = t.wrap_arc(s);
    unwrapped += t.progress_delta(prev, cur);
    prev = cur;
  }
  // Walk back to the start: the summed deltas must equal the net displacement.
  const double back = -s;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const double cur = t.wrap_arc(s + back * (i + 1) / n);
    unwrapped += t.progress_delta(prev, cur);
    prev = cur;
  }
  EXPECT_NEAR(unwrapped, 0.0, 1e-9);
}

TEST(ProgressDelta, FullLapSumsToLength) {
  const Track t = default_track();
  double sum = 0.0, prev = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double cur = t.wrap_arc(t.total_length() * i / 1000.0);
    sum += t.progress_delta(prev, cur);
    prev = cur;
  }
  EXPECT_NEAR(sum, t.total_length(), 1e-9);
}

TEST(TrackValidation, RejectsBadGeometry) {
  const Vec2 bounds{2.0, 2.0};
  const std::vector<Vec2> square{{0.5, 0.5}, {1.5, 0.5}, {1.5, 1.5}, {0.5, 1.5}};
  EXPECT_NO_THROW(Track(square, 0.1, bounds));
  EXPECT_THROW(Track({{0.5, 0.5}, {1.5, 0.5}, {1.5, 1.5}}, 0.1, bounds), ValidationError);
  EXPECT_THROW(Track(square, 0.0, bounds), ValidationError);
  EXPECT_THROW(Track(square, 0.6, bounds), ValidationError);
  const std::vector<Vec2> bowtie{{0.5, 0.5}, {1.5, 1.5}, {1.5, 0.5}, {0.5, 1.5}};
  EXPECT_THROW(Track(bowtie, 0.1, bounds), ValidationError);
  const std::vector<Vec2> dup{{0.5, 0.5}, {1.5, 0.5}, {1.5, 0.5}, {1.5, 1.5}, {0.5, 1.5}};
  EXPECT_THROW(Track(dup, 0.1, bounds), ValidationError);
}

TEST(TrackJson, RoundTripAndFile) {
  const Track t = default_track();
  EXPECT_EQ(Track::from_json(t.to_json()), t);
  const auto dir = std::filesystem::temp_directory_path() / "demodrive_track_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "track.json").string();
  t.save(path);
  const Track loaded = Track::load(path);
  EXPECT_EQ(loaded, t);
  EXPECT_EQ(loaded.hash(), t.hash());
  EXPECT_EQ(resolve_track(path), t);
  EXPECT_EQ(resolve_track("default"), t);
  EXPECT_THROW(resolve_track((dir / "missing.json").string()), IoError);
}

TEST(TrackJson, DocumentShape) {
  const nlohmann::json j = default_track().to_json();
  EXPECT_TRUE(j.contains("centerline"));
  EXPECT_DOUBLE_EQ(j["lane_half_width"].get<double>(), 0.10);
  EXPECT_EQ(j["bounds"].size(), 2u);
  nlohmann::json bad = j;
  bad["centerline"] = nlohmann::json::array({{0.5, 0.5}, {1.0, 0.5}});
  EXPECT_THROW(Track::from_json(bad), ValidationError);
}
