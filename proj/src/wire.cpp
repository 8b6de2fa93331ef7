#include "socnav/wire.hpp"

#include <json.hpp>

#include "socnav/sfm.hpp"

namespace socnav {

using nlohmann::json;

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::Follow: return "Follow";
    case Mode::Goal: return "Goal";
    case Mode::Explore: return "Explore";
    case Mode::Idle: return "Idle";
  }
  return "Idle";
}

std::optional<Mode> mode_from_name(const std::string& s) {
  if (s == "Follow") return Mode::Follow;
  if (s == "Goal") return Mode::Goal;
  if (s == "Explore") return Mode::Explore;
  if (s == "Idle") return Mode::Idle;
  return std::nullopt;
}

std::string encode_request(const ModulatorRequest& req) {
  json j;
  j["instruction"] = req.instruction;
  j["robot"] = {{"x", req.robot.pose.x},
                {"y", req.robot.pose.y},
                {"theta", req.robot.pose.theta},
                {"v", req.robot.v},
                {"omega", req.robot.omega}};
  j["detections"] = json::array();
  for (const auto& d : req.detections) {
    j["detections"].push_back({{"id", d.entity_id},
                               {"class_label", d.class_label},
                               {"x", d.position.x},
                               {"y", d.position.y},
                               {"distance", d.distance}});
  }
  j["sim_time"] = req.sim_time;
  return j.dump();
}

ModulatorRequest decode_request(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw WireError(std::string("request is not valid json: ") + e.what());
  }
  try {
    ModulatorRequest req;
    req.instruction = j.at("instruction").get<std::string>();
    const json& r = j.at("robot");
    req.robot.pose.x = r.at("x").get<double>();
    req.robot.pose.y = r.at("y").get<double>();
    req.robot.pose.theta = r.at("theta").get<double>();
    req.robot.v = r.at("v").get<double>();
    req.robot.omega = r.at("omega").get<double>();
    for (const auto& d : j.value("detections", json::array())) {
      Detection det;
      det.entity_id = d.at("id").get<std::string>();
      det.class_label = d.at("class_label").get<std::string>();
      det.position = {d.at("x").get<double>(), d.at("y").get<double>()};
      det.distance = d.at("distance").get<double>();
      req.detections.push_back(std::move(det));
    }
    req.sim_time = j.at("sim_time").get<double>();
    return req;
  } catch (const json::exception& e) {
    throw WireError(std::string("request schema error: ") + e.what());
  }
}

std::string encode_response(const Directive& d) {
  json j;
  j["mode"] = mode_name(d.mode);
  if (!d.param_updates.empty()) {
    json params = json::object();
    for (const auto& [k, v] : d.param_updates) params[k] = v;
    j["param_updates"] = params;
  }
  if (!d.markers.empty()) {
    json markers = json::array();
    for (const auto& m : d.markers) {
      json jm = {{"entity_id", m.entity_id},
                 {"class_label", m.class_label},
                 {"cost_value", m.cost_value},
                 {"inflation_radius", m.inflation_radius},
                 {"decay_rate", m.decay_rate}};
      if (m.band) {
        jm["d_min"] = m.band->first;
        jm["d_max"] = m.band->second;
      }
      markers.push_back(std::move(jm));
    }
    j["markers"] = markers;
  }
  if (d.goal) {
    if (d.goal->region_id) {
      j["goal"] = {{"region_id", *d.goal->region_id}};
    } else if (d.goal->point) {
      j["goal"] = {{"x", d.goal->point->x}, {"y", d.goal->point->y}};
    }
  }
  return j.dump();
}

Directive decode_response(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw WireError(std::string("response is not valid json: ") + e.what());
  }

  Directive d;
  if (!j.contains("mode") || !j["mode"].is_string())
    throw WireError("response field 'mode' is missing or not a string");
  auto mode = mode_from_name(j["mode"].get<std::string>());
  if (!mode) throw WireError("response field 'mode' has unknown value: " + j["mode"].dump());
  d.mode = *mode;

  if (j.contains("param_updates")) {
    if (!j["param_updates"].is_object())
      throw WireError("response field 'param_updates' must be an object");
    for (const auto& [key, value] : j["param_updates"].items()) {
      if (!is_param_key(key))
        throw WireError("response field 'param_updates." + key + "' is not a known parameter");
      if (!value.is_number())
        throw WireError("response field 'param_updates." + key + "' must be a number");
      d.param_updates[key] = value.get<double>();
    }
  }

  if (j.contains("markers")) {
    if (!j["markers"].is_array()) throw WireError("response field 'markers' must be an array");
    size_t i = 0;
    for (const auto& jm : j["markers"]) {
      std::string path = "markers[" + std::to_string(i++) + "]";
      auto number_at = [&](const char* field) {
        if (!jm.contains(field) || !jm[field].is_number())
          throw WireError("response field '" + path + "." + field +
                          "' is missing or not a number");
        return jm[field].get<double>();
      };
      SocialEntityAttr m;
      if (!jm.contains("entity_id") || !jm["entity_id"].is_string())
        throw WireError("response field '" + path + ".entity_id' is missing or not a string");
      m.entity_id = jm["entity_id"].get<std::string>();
      m.class_label = jm.value("class_label", "");
      m.cost_value = number_at("cost_value");
      m.inflation_radius = number_at("inflation_radius");
      m.decay_rate = number_at("decay_rate");
      if (jm.contains("d_min") != jm.contains("d_max"))
        throw WireError("response field '" + path + "' must carry d_min and d_max together");
      if (jm.contains("d_min")) {
        double lo = number_at("d_min"), hi = number_at("d_max");
        if (!(lo > 0.0 && lo < hi))
          throw WireError("response field '" + path + "' band requires 0 < d_min < d_max");
        m.band = {lo, hi};
      }
      if (m.cost_value < 0.0 || m.cost_value > 254.0)
        throw WireError("response field '" + path + ".cost_value' out of [0, 254]");
      if (m.inflation_radius <= 0.0)
        throw WireError("response field '" + path + ".inflation_radius' must be positive");
      if (m.decay_rate < 0.0)
        throw WireError("response field '" + path + ".decay_rate' must be >= 0");
      d.markers.push_back(std::move(m));
    }
  }

  if (j.contains("goal")) {
    const json& g = j["goal"];
    if (!g.is_object()) throw WireError("response field 'goal' must be an object");
    DirectiveGoal goal;
    if (g.contains("region_id")) {
      if (!g["region_id"].is_string())
        throw WireError("response field 'goal.region_id' must be a string");
      goal.region_id = g["region_id"].get<std::string>();
    } else if (g.contains("x") && g.contains("y")) {
      if (!g["x"].is_number() || !g["y"].is_number())
        throw WireError("response field 'goal.x/y' must be numbers");
      goal.point = Vec2{g["x"].get<double>(), g["y"].get<double>()};
    } else {
      throw WireError("response field 'goal' must carry region_id or x/y");
    }
    d.goal = goal;
  }
  return d;
}

}  // namespace socnav
