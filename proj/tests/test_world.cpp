#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "socnav/world.hpp"

using namespace socnav;
using namespace socnav::test;

namespace {

const VelocityLimits kLimits{1.0, 1.5};

// Fine Euler integration of the unicycle, as an independent oracle for the
// exact arc form.
Pose euler_unicycle(Pose p, double v, double omega, double dt, int substeps) {
  double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) {
    p.x += v * h * std::cos(p.theta);
    p.y += v * h * std::sin(p.theta);
    p.theta += omega * h;
  }
  p.theta = wrap_angle(p.theta);
  return p;
}

}  // namespace

TEST_CASE("zero command leaves the pose unchanged") {
  World w(basic_scenario(open_map()));
  Pose before = w.robot().pose;
  auto events = w.step(0.0, 0.0, kLimits, 0.1);
  CHECK(events.empty());
  CHECK(w.robot().pose.x == before.x);
  CHECK(w.robot().pose.y == before.y);
  CHECK(w.robot().pose.theta == before.theta);
}

TEST_CASE("straight-line integration matches the closed form") {
  World w(basic_scenario(open_map(), {0.0, 0.0, 0.0}));
  w.step(1.0, 0.0, kLimits, 0.1);
  CHECK(w.robot().pose.x == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(w.robot().pose.y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(w.robot().pose.theta == doctest::Approx(0.0));
}

TEST_CASE("arc integration matches a fine Euler oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> vel(-1.0, 1.0), rot(-1.5, 1.5), ang(-M_PI, M_PI);
  for (int i = 0; i < 50; ++i) {
    Pose start{5.0, 5.0, ang(rng)};
    double v = vel(rng), omega = rot(rng);
    World w(basic_scenario(open_map(), start));
    w.step(v, omega, kLimits, 0.1);
    Pose oracle = euler_unicycle(start, v, omega, 0.1, 20000);
    CHECK(w.robot().pose.x == doctest::Approx(oracle.x).epsilon(1e-6));
    CHECK(w.robot().pose.y == doctest::Approx(oracle.y).epsilon(1e-6));
    CHECK(w.robot().pose.theta == doctest::Approx(oracle.theta).epsilon(1e-6));
  }
}

TEST_CASE("commands are clamped to the limits, not rejected") {
  World w(basic_scenario(open_map(), {0.0, 0.0, 0.0}));
  w.step(5.0, -9.0, kLimits, 0.1);
  CHECK(w.robot().v == doctest::Approx(1.0));
  CHECK(w.robot().omega == doctest::Approx(-1.5));
}

TEST_CASE("theta stays wrapped after many steps") {
  World w(basic_scenario(open_map()));
  for (int i = 0; i < 500; ++i) {
    w.step(0.2, 1.5, kLimits, 0.05);
    CHECK(w.robot().pose.theta > -M_PI);
    CHECK(w.robot().pose.theta <= M_PI);
  }
}

TEST_CASE("determinism: identical commands give bitwise-identical trajectories") {
  auto run = [] {
    ScenarioSpec spec = basic_scenario(bordered_map());
    spec.pedestrians.push_back(straight_walker("p1", {8.0, 8.0}, {2.0, 2.0}, 20.0));
    World w(std::move(spec));
    std::vector<double> log;
    for (int i = 0; i < 200; ++i) {
      w.step(0.4, 0.1 * std::sin(i * 0.05), kLimits, 0.05);
      log.push_back(w.robot().pose.x);
      log.push_back(w.robot().pose.y);
      log.push_back(w.robot().pose.theta);
    }
    return log;
  };
  CHECK(run() == run());
}

TEST_CASE("pedestrian interpolation hits waypoints exactly and clamps ends") {
  Pedestrian p = straight_walker("p", {1.0, 2.0}, {5.0, 2.0}, 8.0);
  p.trajectory.push_back({10.0, {5.0, 4.0}});
  CHECK(p.position_at(0.0).x == doctest::Approx(1.0));
  CHECK(p.position_at(8.0).x == doctest::Approx(5.0));
  CHECK(p.position_at(10.0).y == doctest::Approx(4.0));
  // Clamped outside the annotated range.
  CHECK(p.position_at(-3.0).x == doctest::Approx(1.0));
  CHECK(p.position_at(50.0).y == doctest::Approx(4.0));
  // Between timestamps the position lies on the connecting segment.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ts(0.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    double t = ts(rng);
    Vec2 pos = p.position_at(t);
    if (t <= 8.0) {
      CHECK(pos.y == doctest::Approx(2.0));
      CHECK(pos.x == doctest::Approx(1.0 + 4.0 * t / 8.0));
    } else {
      CHECK(pos.x == doctest::Approx(5.0));
      CHECK(pos.y == doctest::Approx(2.0 + 2.0 * (t - 8.0) / 2.0));
    }
  }
}

TEST_CASE("collision fires iff center distance < sum of radii") {
  // Pedestrian standing still at x = 6; robot drives towards it.
  ScenarioSpec spec = basic_scenario(open_map(), {5.0, 5.0, 0.0});
  spec.pedestrians.push_back(straight_walker("p", {6.0, 5.0}, {6.0, 5.0}, 1.0));
  World w(std::move(spec));

  bool collided = false;
  double first_contact_gap = 0.0;
  for (int i = 0; i < 100 && !collided; ++i) {
    auto events = w.step(0.5, 0.0, kLimits, 0.05);
    double gap = (w.pedestrian_position("p") - w.robot().pose.position()).norm();
    if (!events.empty()) {
      collided = true;
      first_contact_gap = gap;
      CHECK(events[0].type == CollisionType::Pedestrian);
      CHECK(events[0].other_id == "p");
    } else {
      CHECK(gap >= 0.25 + 0.3);  // no event while discs are separated
    }
  }
  CHECK(collided);
  CHECK(first_contact_gap < 0.25 + 0.3);
}

TEST_CASE("collision events fire on contact onset only") {
  ScenarioSpec spec = basic_scenario(open_map(), {5.0, 5.0, 0.0});
  spec.pedestrians.push_back(straight_walker("p", {5.3, 5.0}, {5.3, 5.0}, 1.0));
  World w(std::move(spec));
  auto first = w.step(0.0, 0.0, kLimits, 0.05);
  CHECK(first.size() == 1);  // overlapping from the start
  auto second = w.step(0.0, 0.0, kLimits, 0.05);
  CHECK(second.empty());  // still overlapping, no new event
}

TEST_CASE("lidar in an empty map returns max range everywhere") {
  World w(basic_scenario(open_map(200, 0.1), {10.0, 10.0, 0.0}));
  LidarConfig cfg{.beam_count = 90, .angle_min = -M_PI, .angle_max = M_PI, .max_range = 5.0};
  LidarScan scan = w.sense_lidar(cfg);
  for (double r : scan.ranges) CHECK(r == doctest::Approx(5.0));
}

TEST_CASE("lidar range to an axis-aligned wall") {
  // Wall column at x = 7.0..7.1; beam 0 looks along +x from (5, 5).
  OccupancyGrid map = open_map(100, 0.1);
  for (int r = 0; r < 100; ++r) map.set_occupied(r, 70, true);
  World w(basic_scenario(std::move(map), {5.0, 5.0, 0.0}));
  LidarConfig cfg{.beam_count = 1, .angle_min = 0.0, .angle_max = 0.0, .max_range = 8.0};
  LidarScan scan = w.sense_lidar(cfg);
  CHECK(scan.ranges[0] == doctest::Approx(2.0).epsilon(0.05 / 2.0));
}

TEST_CASE("lidar range to a pedestrian disc matches ray-circle intersection") {
  ScenarioSpec spec = basic_scenario(open_map(200, 0.1), {5.0, 5.0, 0.0});
  spec.pedestrians.push_back(straight_walker("p", {8.0, 5.0}, {8.0, 5.0}, 1.0));
  World w(std::move(spec));
  LidarConfig cfg{.beam_count = 1, .angle_min = 0.0, .angle_max = 0.0, .max_range = 8.0};
  LidarScan scan = w.sense_lidar(cfg);
  CHECK(scan.ranges[0] == doctest::Approx(3.0 - 0.3).epsilon(1e-9));
}

TEST_CASE("lidar ranges never exceed max range") {
  ScenarioSpec spec = basic_scenario(bordered_map(), {5.0, 5.0, 0.4});
  spec.pedestrians.push_back(straight_walker("p", {6.0, 6.0}, {4.0, 4.0}, 10.0));
  World w(std::move(spec));
  LidarConfig cfg{.beam_count = 180, .angle_min = -M_PI, .angle_max = M_PI, .max_range = 3.0};
  for (int i = 0; i < 20; ++i) {
    w.step(0.3, 0.2, kLimits, 0.05);
    for (double r : w.sense_lidar(cfg).ranges) {
      CHECK(r >= 0.0);
      CHECK(r <= 3.0 + 1e-12);
    }
  }
}

TEST_CASE("detections: pedestrian behind the robot is outside a pi fov") {
  ScenarioSpec spec = basic_scenario(open_map(), {5.0, 5.0, 0.0});
  spec.pedestrians.push_back(straight_walker("p", {2.0, 5.0}, {2.0, 5.0}, 1.0));
  World w(std::move(spec));
  auto dets = w.detect_entities({.fov = M_PI, .range = 10.0});
  CHECK(dets.empty());
}

TEST_CASE("detections: entity ahead in open space is reported with its label") {
  ScenarioSpec spec = basic_scenario(open_map(200, 0.1), {5.0, 5.0, 0.0});
  spec.pedestrians.push_back(straight_walker("doc1", {9.0, 5.0}, {9.0, 5.0}, 1.0, "doctor"));
  World w(std::move(spec));
  auto dets = w.detect_entities({.fov = M_PI, .range = 10.0});
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].class_label == "doctor");
  CHECK(dets[0].distance == doctest::Approx(4.0));
  CHECK(dets[0].kind == DetectionKind::Pedestrian);
}

TEST_CASE("detections: wall occlusion excludes hidden pedestrians") {
  OccupancyGrid map = open_map(100, 0.1);
  for (int r = 40; r < 60; ++r) map.set_occupied(r, 60, true);  // wall x=6.0..6.1, y=4..6
  ScenarioSpec spec = basic_scenario(std::move(map), {5.0, 5.0, 0.0});
  spec.pedestrians.push_back(straight_walker("hidden", {7.0, 5.0}, {7.0, 5.0}, 1.0));
  spec.pedestrians.push_back(straight_walker("visible", {5.0, 7.0}, {5.0, 7.0}, 1.0));
  World w(std::move(spec));
  auto dets = w.detect_entities({.fov = 2.0 * M_PI, .range = 10.0});
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].entity_id == "visible");
}

TEST_CASE("detections: fov of 2pi accepts all bearings") {
  ScenarioSpec spec = basic_scenario(open_map(), {5.0, 5.0, 0.0});
  spec.pedestrians.push_back(straight_walker("behind", {2.0, 5.0}, {2.0, 5.0}, 1.0));
  World w(std::move(spec));
  auto dets = w.detect_entities({.fov = 2.0 * M_PI, .range = 10.0});
  CHECK(dets.size() == 1);
}

TEST_CASE("point_in_region on a unit square") {
  Region r;
  r.id = "sq";
  r.polygon = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
  CHECK(point_in_region(r, {0.5, 0.5}));
  CHECK(!point_in_region(r, {2.0, 2.0}));
  // Boundary points count as inside.
  CHECK(point_in_region(r, {0.0, 0.5}));
  CHECK(point_in_region(r, {1.0, 1.0}));
}

TEST_CASE("point_in_region on a concave L-shape matches a brute-force oracle") {
  // L-shape: the notch is the top-right quadrant of the bounding box.
  Region r;
  r.id = "L";
  r.polygon = {{0.0, 0.0}, {2.0, 0.0}, {2.0, 1.0}, {1.0, 1.0}, {1.0, 2.0}, {0.0, 2.0}};
  CHECK(!point_in_region(r, {1.5, 1.5}));  // point in the notch
  CHECK(point_in_region(r, {0.5, 1.5}));
  CHECK(point_in_region(r, {1.5, 0.5}));

  // Brute-force winding-number oracle over a fine grid (interior points only,
  // away from edges where conventions may differ).
  auto winding_inside = [&](Vec2 p) {
    double total = 0.0;
    const auto& poly = r.polygon;
    for (size_t i = 0; i < poly.size(); ++i) {
      Vec2 a = poly[i] - p, b = poly[(i + 1) % poly.size()] - p;
      total += std::atan2(a.x * b.y - a.y * b.x, a.dot(b));
    }
    return std::abs(total) > M_PI;
  };
  for (double x = 0.05; x < 2.0; x += 0.1) {
    for (double y = 0.05; y < 2.0; y += 0.1) {
      CHECK(point_in_region(r, {x, y}) == winding_inside({x, y}));
    }
  }
}
