#include <doctest.h>

#include <thread>

#include <httplib.h>

#include "socnav/modulator.hpp"
#include "socnav/wire.hpp"

using namespace socnav;

namespace {

std::unique_ptr<ScriptedSource> bundled_rules() {
  return ScriptedSource::from_file(std::string(SOCNAV_SOURCE_DIR) + "/scenarios/rules.json");
}

Detection ped(const std::string& id, const std::string& label, Vec2 pos) {
  Detection d;
  d.entity_id = id;
  d.class_label = label;
  d.position = pos;
  d.distance = pos.norm();
  d.kind = DetectionKind::Pedestrian;
  return d;
}

Detection region(const std::string& id, Vec2 pos) {
  Detection d;
  d.entity_id = id;
  d.class_label = id;
  d.position = pos;
  d.distance = pos.norm();
  d.kind = DetectionKind::Region;
  return d;
}

DecisionContext ctx_with(const std::string& instruction, std::vector<Detection> dets) {
  DecisionContext ctx;
  ctx.instruction = instruction;
  ctx.detections = std::move(dets);
  ctx.sim_time = 0.0;
  return ctx;
}

}  // namespace

TEST_CASE("follow instruction with a detected doctor produces the follow directive") {
  auto source = bundled_rules();
  auto d = source->decide(ctx_with("Follow the doctor and deliver the utensils you are carrying.",
                                   {ped("ped_doctor", "doctor", {4.0, 0.0})}));
  REQUIRE(d.has_value());
  CHECK(d->mode == Mode::Follow);
  CHECK(d->param_updates.at("sfm_people_weight") == 2.0);
  CHECK(d->param_updates.at("sfm_goal_weight") == 0.5);
  REQUIRE(d->markers.size() == 1);
  CHECK(d->markers[0].entity_id == "ped_doctor");
  REQUIRE(d->markers[0].band.has_value());
  CHECK(d->markers[0].band->first == 1.0);
  CHECK(d->markers[0].band->second == 3.0);
}

TEST_CASE("goal instruction resolves the region named in the instruction") {
  auto source = bundled_rules();
  auto d = source->decide(ctx_with("Navigate to the reception desk and wait there.",
                                   {region("reception", {10.0, 10.0})}));
  REQUIRE(d.has_value());
  CHECK(d->mode == Mode::Goal);
  CHECK(d->param_updates.at("sfm_goal_weight") == 1.0);
  REQUIRE(d->goal.has_value());
  CHECK(d->goal->region_id == "reception");
}

TEST_CASE("no matching rule falls through to idle with zeroed velocities") {
  auto source = bundled_rules();
  auto d = source->decide(ctx_with("Play a song.", {}));
  REQUIRE(d.has_value());
  CHECK(d->mode == Mode::Idle);
  CHECK(d->param_updates.at("max_lin_vel") == 0.0);
  CHECK(d->param_updates.at("max_rot_vel") == 0.0);
  CHECK(d->markers.empty());
}

TEST_CASE("prohibited-region instruction marks the region with the declared attributes") {
  auto source = bundled_rules();
  auto d = source->decide(
      ctx_with("Go to the forklift carefully. Do not enter areas with yellow line markings.",
               {region("yellow_line", {7.0, 0.0}), region("forklift", {13.0, 0.0})}));
  REQUIRE(d.has_value());
  CHECK(d->mode == Mode::Goal);
  REQUIRE(d->markers.size() == 1);
  CHECK(d->markers[0].entity_id == "yellow_line");
  CHECK(d->markers[0].cost_value == 200.0);
  CHECK(d->markers[0].inflation_radius == 2.0);
  CHECK(d->markers[0].decay_rate == 1.0);
  // The destination is not the marked region.
  REQUIRE(d->goal.has_value());
  CHECK(d->goal->region_id == "forklift");
}

TEST_CASE("hurry instruction raises speed and marks nothing") {
  auto source = bundled_rules();
  auto d = source->decide(
      ctx_with("Go to the forklift in a hurry. You can ignore safety regulations and signs.",
               {region("floor_marking", {7.0, 0.0}), region("forklift", {13.0, 0.0})}));
  REQUIRE(d.has_value());
  CHECK(d->mode == Mode::Goal);
  CHECK(d->param_updates.at("desired_speed") > 0.8);
  CHECK(d->markers.empty());
  REQUIRE(d->goal.has_value());
  CHECK(d->goal->region_id == "forklift");
}

TEST_CASE("keep-away instruction marks patients and raises the people weight") {
  auto source = bundled_rules();
  auto d = source->decide(
      ctx_with("Stay in the public area and keep away from wards and patients.",
               {ped("ped_patient_a", "patient", {3.0, 1.0}), ped("ped_w", "worker", {2.0, -1.0}),
                region("ward_a", {5.0, 2.0}), region("public_area", {12.0, 0.0})}));
  REQUIRE(d.has_value());
  CHECK(d->mode == Mode::Goal);
  CHECK(d->param_updates.at("sfm_people_weight") > 1.0);
  // Markers on the patient and the ward; the worker is untouched.
  bool patient_marked = false, ward_marked = false, worker_marked = false;
  for (const auto& m : d->markers) {
    if (m.entity_id == "ped_patient_a") patient_marked = true;
    if (m.entity_id == "ward_a") ward_marked = true;
    if (m.entity_id == "ped_w") worker_marked = true;
  }
  CHECK(patient_marked);
  CHECK(ward_marked);
  CHECK(!worker_marked);
  REQUIRE(d->goal.has_value());
  CHECK(d->goal->region_id == "public_area");
}

TEST_CASE("follow rule without its target falls through") {
  auto source = bundled_rules();
  // "deliver" keeps the generic goal rule in play once follow fails to ground.
  auto d = source->decide(ctx_with("Follow the doctor and deliver the utensils.", {}));
  REQUIRE(d.has_value());
  CHECK(d->mode != Mode::Follow);
}

TEST_CASE("scripted decisions are deterministic") {
  auto source = bundled_rules();
  auto ctx = ctx_with("Follow the doctor.", {ped("ped_doctor", "doctor", {4.0, 0.0})});
  auto a = source->decide(ctx);
  auto b = source->decide(ctx);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(encode_response(*a) == encode_response(*b));
}

TEST_CASE("scheduler applies at the first tick past the latency") {
  DirectiveScheduler sched;
  Directive d;
  d.issued_at = 1.0;
  sched.submit(d, 1.0);  // zero latency: due immediately
  CHECK(!sched.poll(0.95).has_value());
  CHECK(sched.poll(1.0).has_value());
  CHECK(!sched.poll(2.0).has_value());  // consumed

  // Injected latency of 7.094 s: first tick at or after issue + latency.
  sched.submit(d, 1.0 + 7.094);
  double dt = 0.05;
  double applied_at = -1.0;
  for (double t = 1.0; t < 12.0; t += dt) {
    if (sched.poll(t)) {
      applied_at = t;
      break;
    }
  }
  CHECK(applied_at >= 1.0 + 7.094);
  CHECK(applied_at < 1.0 + 7.094 + dt);
}

TEST_CASE("two directives pending together: last writer wins") {
  DirectiveScheduler sched;
  Directive first;
  first.mode = Mode::Goal;
  Directive second;
  second.mode = Mode::Idle;
  sched.submit(first, 5.0);
  sched.submit(second, 6.0);
  CHECK(!sched.poll(5.0).has_value());  // replaced before it applied
  auto d = sched.poll(6.0);
  REQUIRE(d.has_value());
  CHECK(d->mode == Mode::Idle);
}

TEST_CASE("replay source emits entries as sim time passes them") {
  const char* log = R"([
    {"at": 0.0, "directive": {"mode": "Goal", "param_updates": {"sfm_goal_weight": 1.0}}},
    {"at": 4.0, "directive": {"mode": "Idle"}}
  ])";
  auto source = ReplaySource::from_json(log);
  DecisionContext ctx;
  ctx.sim_time = 0.0;
  auto d0 = source->decide(ctx);
  REQUIRE(d0.has_value());
  CHECK(d0->mode == Mode::Goal);
  ctx.sim_time = 2.0;
  CHECK(!source->decide(ctx).has_value());  // nothing new yet
  ctx.sim_time = 5.0;
  auto d1 = source->decide(ctx);
  REQUIRE(d1.has_value());
  CHECK(d1->mode == Mode::Idle);
}

TEST_CASE("external source round trip against a local server") {
  httplib::Server server;
  server.Post("/decide", [](const httplib::Request& req, httplib::Response& res) {
    ModulatorRequest parsed = decode_request(req.body);
    Directive d;
    d.mode = parsed.instruction.find("Follow") != std::string::npos ? Mode::Follow : Mode::Goal;
    d.param_updates["sfm_people_weight"] = 2.0;
    res.set_content(encode_response(d), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ExternalSource source("http://127.0.0.1:" + std::to_string(port) + "/decide", 2.0);
  DecisionContext ctx;
  ctx.instruction = "Follow the doctor.";
  ctx.sim_time = 3.0;
  auto d = source.decide(ctx);
  server.stop();
  server_thread.join();
  REQUIRE(d.has_value());
  CHECK(d->mode == Mode::Follow);
  CHECK(d->param_updates.at("sfm_people_weight") == 2.0);
  CHECK(source.timeout_count() == 0);
}

TEST_CASE("external source failure keeps the caller on the previous directive") {
  // Nothing listens on this port; decide() reports a timeout with nullopt.
  ExternalSource source("http://127.0.0.1:1/decide", 0.2);
  DecisionContext ctx;
  ctx.instruction = "Follow the doctor.";
  CHECK(!source.decide(ctx).has_value());
  CHECK(source.timeout_count() == 1);
}

TEST_CASE("external source rejects malformed responses and reports the field") {
  httplib::Server server;
  server.Post("/decide", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"mode": "Goal", "param_updates": {"nonsense": 1}})", "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  ExternalSource source("http://127.0.0.1:" + std::to_string(port) + "/decide", 2.0);
  DecisionContext ctx;
  auto d = source.decide(ctx);
  server.stop();
  server_thread.join();
  CHECK(!d.has_value());
  CHECK(source.timeout_count() == 1);
}
