#include <doctest.h>

#include <cmath>
#include <random>

#include "socnav/metrics.hpp"
#include "socnav/report.hpp"
#include "socnav/runner.hpp"

using namespace socnav;

namespace {

std::vector<TrajectorySample> samples_from_points(const std::vector<Vec2>& pts) {
  std::vector<TrajectorySample> out;
  double t = 0.0;
  for (const auto& p : pts) {
    out.push_back({t, {p.x, p.y, 0.0}, 0.0, 0.0});
    t += 0.1;
  }
  return out;
}

std::vector<Vec2> heading_walk(const std::vector<double>& headings, double step) {
  std::vector<Vec2> pts = {{0.0, 0.0}};
  for (double h : headings)
    pts.push_back(pts.back() + Vec2{std::cos(h), std::sin(h)} * step);
  return pts;
}

}  // namespace

TEST_CASE("wrap examples") {
  CHECK(wrap(M_PI / 2) == doctest::Approx(M_PI / 2));
  CHECK(wrap(3.0 * M_PI) == doctest::Approx(M_PI));
  CHECK(wrap(-3.5 * M_PI) == doctest::Approx(0.5 * M_PI));
}

TEST_CASE("curvature: collinear samples give zero") {
  auto s = curvature_smoothness(samples_from_points({{0, 0}, {1, 0}, {2, 0}, {3.5, 0}}));
  REQUIRE(s.has_value());
  CHECK(*s == 0.0);
}

TEST_CASE("curvature: headings 0, pi/2, pi accumulate pi") {
  auto pts = heading_walk({0.0, M_PI / 2, M_PI}, 1.0);
  auto s = curvature_smoothness(samples_from_points(pts));
  REQUIRE(s.has_value());
  CHECK(*s == doctest::Approx(M_PI).epsilon(1e-12));
}

TEST_CASE("curvature: wrap keeps +170 to -170 degrees at 20 degrees") {
  double a = 170.0 * M_PI / 180.0, b = -170.0 * M_PI / 180.0;
  auto s = curvature_smoothness(samples_from_points(heading_walk({a, b}, 1.0)));
  REQUIRE(s.has_value());
  CHECK(*s == doctest::Approx(20.0 * M_PI / 180.0).epsilon(1e-9));
  CHECK(*s < 5.0);  // not the unwrapped 5.934
}

TEST_CASE("curvature: fewer than 3 samples is undefined") {
  CHECK(!curvature_smoothness(samples_from_points({{0, 0}, {1, 0}})).has_value());
  CHECK(!curvature_smoothness({}).has_value());
}

TEST_CASE("curvature: sub-centimeter segments are merged before measuring") {
  // A straight line sampled every 2 mm stays exactly straight after merging.
  std::vector<Vec2> line;
  for (int i = 0; i <= 200; ++i) line.push_back({i * 0.002, 0.0});
  auto s = curvature_smoothness(samples_from_points(line));
  REQUIRE(s.has_value());
  CHECK(*s == 0.0);

  // A 1 mm zigzag riding on 2 mm steps would read ~90 rad unmerged; the
  // merge absorbs almost all of it.
  std::vector<Vec2> jitter;
  for (int i = 0; i <= 200; ++i) jitter.push_back({i * 0.002, (i % 2) * 0.001});
  auto j = curvature_smoothness(samples_from_points(jitter));
  REQUIRE(j.has_value());
  CHECK(*j < 2.0);
}

TEST_CASE("curvature is invariant under rotation and translation") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> coord(-5.0, 5.0), ang(-M_PI, M_PI);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Vec2> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({coord(rng), coord(rng)});
    double rot = ang(rng);
    Vec2 shift{coord(rng), coord(rng)};
    std::vector<Vec2> moved;
    for (const auto& p : pts) {
      moved.push_back({p.x * std::cos(rot) - p.y * std::sin(rot) + shift.x,
                       p.x * std::sin(rot) + p.y * std::cos(rot) + shift.y});
    }
    auto a = curvature_smoothness(samples_from_points(pts));
    auto b = curvature_smoothness(samples_from_points(moved));
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(*a == doctest::Approx(*b).epsilon(1e-9));
    CHECK(*a >= 0.0);
  }
}

TEST_CASE("subject score: follow band forms") {
  MetricsConfig cfg;
  SubjectTrack s;
  s.mode = SubjectScoreMode::FollowBand;
  s.d_min = 1.0;
  s.d_max = 3.0;
  CHECK(subject_tick_score(s, 2.0, cfg) == 100.0);
  CHECK(subject_tick_score(s, 1.0, cfg) == 100.0);
  CHECK(subject_tick_score(s, 3.0, cfg) == 100.0);
  CHECK(subject_tick_score(s, 0.5, cfg) == doctest::Approx(75.0));   // 100 - 50*(0.5/1.0)
  CHECK(subject_tick_score(s, 5.0, cfg) == doctest::Approx(50.0));   // 100 - 25*2
  CHECK(subject_tick_score(s, 100.0, cfg) == 0.0);                   // clamped at zero

  s.distances.assign(40, 2.0);
  auto score = subject_score({s}, cfg);
  REQUIRE(score.has_value());
  CHECK(*score == 100.0);

  s.distances.assign(40, 5.0);
  score = subject_score({s}, cfg);
  REQUIRE(score.has_value());
  CHECK(*score == doctest::Approx(50.0));
}

TEST_CASE("subject score: keep-away form and absence marker") {
  MetricsConfig cfg;
  SubjectTrack s;
  s.mode = SubjectScoreMode::KeepAway;
  CHECK(subject_tick_score(s, 3.0, cfg) == 100.0);
  CHECK(subject_tick_score(s, 0.75, cfg) == doctest::Approx(50.0));
  CHECK(subject_tick_score(s, 0.0, cfg) == 0.0);
  CHECK(!subject_score({}, cfg).has_value());
}

TEST_CASE("subject score stays within [0, 100] on random inputs") {
  MetricsConfig cfg;
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> dist(0.0, 20.0);
  for (int trial = 0; trial < 50; ++trial) {
    SubjectTrack a;
    a.mode = trial % 2 ? SubjectScoreMode::FollowBand : SubjectScoreMode::KeepAway;
    for (int i = 0; i < 30; ++i) a.distances.push_back(dist(rng));
    auto score = subject_score({a}, cfg);
    REQUIRE(score.has_value());
    CHECK(*score >= 0.0);
    CHECK(*score <= 100.0);
  }
}

TEST_CASE("region score: no violations start from 100") {
  MetricsConfig cfg;
  Region forbidden;
  forbidden.id = "zone";
  forbidden.kind = RegionKind::Forbidden;
  forbidden.severity_weight = 60.0;
  RegionOccupancy occ(100);  // never inside
  auto score = region_score(occ, {forbidden}, cfg);
  REQUIRE(score.has_value());
  CHECK(*score == 100.0);
}

TEST_CASE("region score: full-episode violation subtracts the mean severity") {
  MetricsConfig cfg;
  Region forbidden;
  forbidden.id = "zone";
  forbidden.kind = RegionKind::Forbidden;
  forbidden.severity_weight = 50.0;
  RegionOccupancy occ(80, {"zone"});
  auto score = region_score(occ, {forbidden}, cfg);
  REQUIRE(score.has_value());
  CHECK(*score == doctest::Approx(50.0));
}

TEST_CASE("region score: severity beyond the cap floors at zero, never negative") {
  MetricsConfig cfg;
  Region forbidden;
  forbidden.id = "zone";
  forbidden.kind = RegionKind::Forbidden;
  forbidden.severity_weight = 300.0;
  RegionOccupancy occ(50, {"zone"});
  auto score = region_score(occ, {forbidden}, cfg);
  REQUIRE(score.has_value());
  CHECK(*score == 0.0);
}

TEST_CASE("region score: absent when the scenario has no rule regions") {
  MetricsConfig cfg;
  Region neutral;
  neutral.id = "floor";
  neutral.kind = RegionKind::Neutral;
  CHECK(!region_score(RegionOccupancy(10), {neutral}, cfg).has_value());
  CHECK(!region_score(RegionOccupancy(10), {}, cfg).has_value());
}

TEST_CASE("latency stats") {
  std::vector<LatencySample> log;
  for (int i = 0; i < 10; ++i) log.push_back({"fast_step", 5.0});
  log.push_back({"slow_decide", 1.0});
  log.push_back({"slow_decide", 3.0});
  auto stats = latency_stats(log);
  CHECK(stats.at("fast_step").mean == doctest::Approx(5.0));
  CHECK(stats.at("fast_step").count == 10);
  CHECK(stats.at("slow_decide").mean == doctest::Approx(2.0));
  CHECK(stats.at("slow_decide").max == 3.0);
  CHECK(latency_stats({}).empty());
}

TEST_CASE("episode evaluation: goal reached cleanly is a success") {
  EpisodeReport r;
  r.task.goal_reached = true;
  r.task.time_limit = 60.0;
  for (int i = 0; i < 5; ++i) {
    r.trajectory.push_back({i * 0.05, {i * 0.1, 0.0, 0.0}, 0.0, 0.0});
    r.region_occupancy.push_back({});
  }
  MetricValues m = compute_episode_metrics(r, MetricsConfig{});
  CHECK(m.success);
  CHECK(m.failure_reason.empty());
}

TEST_CASE("episode evaluation: forbidden-region tick means semantic violation") {
  EpisodeReport r;
  r.task.goal_reached = true;
  r.task.time_limit = 60.0;
  r.task.forbidden_regions = {"zone"};
  r.scored_regions.push_back({"zone", RegionKind::Forbidden, 60.0});
  for (int i = 0; i < 5; ++i) {
    r.trajectory.push_back({i * 0.05, {i * 0.1, 0.0, 0.0}, 0.0, 0.0});
    r.region_occupancy.push_back(i == 2 ? std::vector<std::string>{"zone"}
                                        : std::vector<std::string>{});
  }
  MetricValues m = compute_episode_metrics(r, MetricsConfig{});
  CHECK(!m.success);
  CHECK(m.failure_reason == "semantic_violation");
}

TEST_CASE("episode evaluation: timeout when the goal was never reached") {
  EpisodeReport r;
  r.task.goal_reached = false;
  r.task.time_limit = 1.0;
  for (int i = 0; i < 30; ++i) {
    r.trajectory.push_back({i * 0.05, {0.0, 0.0, 0.0}, 0.0, 0.0});
    r.region_occupancy.push_back({});
  }
  MetricValues m = compute_episode_metrics(r, MetricsConfig{});
  CHECK(!m.success);
  CHECK(m.failure_reason == "timeout");
}

TEST_CASE("episode evaluation: collisions fail only in strict mode") {
  EpisodeReport r;
  r.task.goal_reached = true;
  r.task.time_limit = 60.0;
  for (int i = 0; i < 5; ++i) {
    r.trajectory.push_back({i * 0.05, {i * 0.1, 0.0, 0.0}, 0.0, 0.0});
    r.region_occupancy.push_back({});
  }
  r.collisions.push_back({0.1, CollisionType::Pedestrian, "p", {0.0, 0.0}});
  MetricsConfig relaxed;
  CHECK(compute_episode_metrics(r, relaxed).success);
  MetricsConfig strict;
  strict.collision_fails_episode = true;
  MetricValues m = compute_episode_metrics(r, strict);
  CHECK(!m.success);
  CHECK(m.failure_reason == "collision");
}

TEST_CASE("episode evaluation: band fraction gates follow tasks") {
  EpisodeReport r;
  r.task.goal_reached = true;
  r.task.time_limit = 60.0;
  r.task.follow = FollowRule{"doc", 1.0, 3.0, 0.8};
  SubjectTrack track;
  track.id = "doc";
  track.mode = SubjectScoreMode::FollowBand;
  track.d_min = 1.0;
  track.d_max = 3.0;
  // Acquired at tick 0, then lost for most of the episode.
  track.distances = {2.0, 2.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0};
  for (size_t i = 0; i < track.distances.size(); ++i) {
    r.trajectory.push_back({i * 0.05, {i * 0.1, 0.0, 0.0}, 0.0, 0.0});
    r.region_occupancy.push_back({});
  }
  r.subjects.push_back(track);
  MetricValues m = compute_episode_metrics(r, MetricsConfig{});
  REQUIRE(m.band_fraction.has_value());
  CHECK(*m.band_fraction == doctest::Approx(0.2));
  CHECK(!m.success);
  CHECK(m.failure_reason == "band_violation");
}

TEST_CASE("metrics config hash tracks coefficient changes") {
  MetricsConfig a, b;
  CHECK(a.hash() == b.hash());
  b.above_band_slope = 30.0;
  CHECK(a.hash() != b.hash());
}
