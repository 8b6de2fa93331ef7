#include "socnav/modulator.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "socnav/wire.hpp"

namespace socnav {

using nlohmann::json;

namespace {

std::string normalize(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '_') out.push_back(' ');
    else out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct MarkerTemplate {
  enum class On { Target, ClassMatch, MentionedRegions };
  On on = On::ClassMatch;
  std::string class_substr;  // for ClassMatch
  // MentionedRegions: when set, a region is marked only if its name appears
  // in an instruction sentence that also contains one of these keywords.
  // Keeps "go to the dock" apart from "do not enter the dock".
  std::vector<std::string> scope_keywords;
  double cost_value = 100.0;
  double inflation_radius = 2.0;
  double decay_rate = 1.0;
  std::optional<std::pair<double, double>> band;
};

std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == '.' || c == '!' || c == '?' || c == ';') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct Rule {
  std::string name;
  std::vector<std::string> keywords_all;
  std::vector<std::string> keywords_any;
  Mode mode = Mode::Goal;
  std::map<std::string, double> param_updates;
  bool target_from_instruction = false;
  bool target_required = false;
  std::vector<MarkerTemplate> markers;
  bool goal_from_instruction = false;
  std::optional<std::string> goal_region;
  std::optional<Vec2> goal_point;
};

}  // namespace

struct ScriptedSource::Impl {
  std::vector<Rule> rules;
};

ScriptedSource::ScriptedSource() : impl_(std::make_unique<Impl>()) {}
ScriptedSource::~ScriptedSource() = default;

std::unique_ptr<ScriptedSource> ScriptedSource::from_file(const std::string& path) {
  return from_json(read_file(path));
}

std::unique_ptr<ScriptedSource> ScriptedSource::from_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("rule table parse error: ") + e.what());
  }

  auto src = std::unique_ptr<ScriptedSource>(new ScriptedSource());
  try {
    for (const auto& jr : doc.at("rules")) {
      Rule rule;
      rule.name = jr.value("name", "rule");
      for (const auto& k : jr.value("keywords_all", std::vector<std::string>{}))
        rule.keywords_all.push_back(normalize(k));
      for (const auto& k : jr.value("keywords_any", std::vector<std::string>{}))
        rule.keywords_any.push_back(normalize(k));
      auto mode = mode_from_name(jr.value("mode", "Goal"));
      if (!mode) throw std::runtime_error("rule '" + rule.name + "' has an unknown mode");
      rule.mode = *mode;
      if (jr.contains("param_updates"))
        for (const auto& [k, v] : jr.at("param_updates").items())
          rule.param_updates[k] = v.get<double>();
      rule.target_from_instruction = jr.value("target_from_instruction", false);
      rule.target_required = jr.value("target_required", rule.target_from_instruction);
      for (const auto& jm : jr.value("markers", json::array())) {
        MarkerTemplate m;
        std::string on = jm.value("on", "");
        if (on == "target") {
          m.on = MarkerTemplate::On::Target;
        } else if (on.rfind("class:", 0) == 0) {
          m.on = MarkerTemplate::On::ClassMatch;
          m.class_substr = normalize(on.substr(6));
        } else if (on == "mentioned_regions") {
          m.on = MarkerTemplate::On::MentionedRegions;
          for (const auto& k : jm.value("scope_keywords", std::vector<std::string>{}))
            m.scope_keywords.push_back(normalize(k));
        } else {
          throw std::runtime_error("rule '" + rule.name + "' marker has unknown 'on': " + on);
        }
        m.cost_value = jm.value("cost_value", 100.0);
        m.inflation_radius = jm.value("inflation_radius", 2.0);
        m.decay_rate = jm.value("decay_rate", 1.0);
        if (jm.contains("band")) {
          m.band = {jm["band"].at("d_min").get<double>(), jm["band"].at("d_max").get<double>()};
        }
        rule.markers.push_back(std::move(m));
      }
      rule.goal_from_instruction = jr.value("goal_from_instruction", false);
      if (jr.contains("goal_region")) rule.goal_region = jr["goal_region"].get<std::string>();
      if (jr.contains("goal_point")) {
        const auto& gp = jr["goal_point"];
        rule.goal_point = Vec2{gp.at(0).get<double>(), gp.at(1).get<double>()};
      }
      src->impl_->rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("rule table schema error: ") + e.what());
  }
  return src;
}

std::optional<Directive> ScriptedSource::decide(const DecisionContext& ctx) {
  const std::string instruction = normalize(ctx.instruction);

  for (const auto& rule : impl_->rules) {
    bool all_hit = std::all_of(rule.keywords_all.begin(), rule.keywords_all.end(),
                               [&](const std::string& k) { return contains(instruction, k); });
    if (!all_hit) continue;
    if (!rule.keywords_any.empty()) {
      bool any_hit = std::any_of(rule.keywords_any.begin(), rule.keywords_any.end(),
                                 [&](const std::string& k) { return contains(instruction, k); });
      if (!any_hit) continue;
    }

    // Resolve the instruction-named target among pedestrian detections.
    const Detection* target = nullptr;
    if (rule.target_from_instruction) {
      for (const auto& d : ctx.detections) {
        if (d.kind != DetectionKind::Pedestrian) continue;
        if (contains(instruction, normalize(d.class_label))) {
          target = &d;
          break;
        }
      }
      if (!target && rule.target_required) continue;  // fall through to later rules
    }

    Directive directive;
    directive.mode = rule.mode;
    directive.param_updates = rule.param_updates;
    directive.issued_at = ctx.sim_time;

    std::vector<std::string> marked_ids;
    for (const auto& mt : rule.markers) {
      auto emit = [&](const Detection& d) {
        SocialEntityAttr m;
        m.entity_id = d.entity_id;
        m.class_label = d.class_label;
        m.cost_value = mt.cost_value;
        m.inflation_radius = mt.inflation_radius;
        m.decay_rate = mt.decay_rate;
        m.band = mt.band;
        m.position = d.position;
        directive.markers.push_back(std::move(m));
        marked_ids.push_back(d.entity_id);
      };
      switch (mt.on) {
        case MarkerTemplate::On::Target:
          if (target) emit(*target);
          break;
        case MarkerTemplate::On::ClassMatch:
          for (const auto& d : ctx.detections)
            if (contains(normalize(d.class_label), mt.class_substr)) emit(d);
          break;
        case MarkerTemplate::On::MentionedRegions: {
          std::vector<std::string> scopes;
          if (mt.scope_keywords.empty()) {
            scopes.push_back(instruction);
          } else {
            for (const auto& sentence : split_sentences(instruction)) {
              for (const auto& k : mt.scope_keywords) {
                if (contains(sentence, k)) {
                  scopes.push_back(sentence);
                  break;
                }
              }
            }
          }
          for (const auto& d : ctx.detections) {
            if (d.kind != DetectionKind::Region) continue;
            std::string label = normalize(d.class_label);
            for (const auto& scope : scopes) {
              if (contains(scope, label)) {
                emit(d);
                break;
              }
            }
          }
          break;
        }
      }
    }

    if (rule.goal_region) {
      directive.goal = DirectiveGoal{.region_id = *rule.goal_region, .point = std::nullopt};
    } else if (rule.goal_point) {
      directive.goal = DirectiveGoal{.region_id = std::nullopt, .point = *rule.goal_point};
    } else if (rule.goal_from_instruction) {
      for (const auto& d : ctx.detections) {
        if (d.kind != DetectionKind::Region) continue;
        if (!contains(instruction, normalize(d.class_label))) continue;
        // Regions the rule just marked are rule targets, not destinations.
        if (std::find(marked_ids.begin(), marked_ids.end(), d.entity_id) != marked_ids.end())
          continue;
        directive.goal = DirectiveGoal{.region_id = d.entity_id, .point = std::nullopt};
        break;
      }
    }
    return directive;
  }

  // No matching rule: stand still until the next decision cycle.
  Directive idle;
  idle.mode = Mode::Idle;
  idle.param_updates = {{"max_lin_vel", 0.0}, {"max_rot_vel", 0.0}};
  idle.issued_at = ctx.sim_time;
  return idle;
}

std::unique_ptr<ReplaySource> ReplaySource::from_file(const std::string& path) {
  return from_json(read_file(path));
}

std::unique_ptr<ReplaySource> ReplaySource::from_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("directive log parse error: ") + e.what());
  }
  auto src = std::make_unique<ReplaySource>();
  const json& arr = doc.is_array() ? doc : doc.at("directives");
  for (const auto& je : arr) {
    Entry e;
    e.at = je.at("at").get<double>();
    e.directive = decode_response(je.at("directive").dump());
    e.directive.issued_at = e.at;
    src->entries_.push_back(std::move(e));
  }
  std::stable_sort(src->entries_.begin(), src->entries_.end(),
                   [](const Entry& a, const Entry& b) { return a.at < b.at; });
  return src;
}

std::optional<Directive> ReplaySource::decide(const DecisionContext& ctx) {
  std::optional<Directive> out;
  while (next_ < entries_.size() && entries_[next_].at <= ctx.sim_time + 1e-9) {
    out = entries_[next_].directive;  // newest eligible entry wins
    ++next_;
  }
  return out;
}

ExternalSource::ExternalSource(std::string url, double timeout_seconds)
    : url_(std::move(url)), timeout_seconds_(timeout_seconds) {
  if (url_.empty()) {
    const char* env = std::getenv("MODULATOR_URL");
    if (env) url_ = env;
  }
  if (url_.empty())
    throw std::runtime_error("external modulator requires a url (set MODULATOR_URL)");
}

std::optional<Directive> ExternalSource::decide(const DecisionContext& ctx) {
  // Split http://host:port/path.
  std::string rest = url_;
  const std::string scheme = "http://";
  if (rest.rfind(scheme, 0) == 0) rest = rest.substr(scheme.size());
  std::string path = "/decide";
  auto slash = rest.find('/');
  if (slash != std::string::npos) {
    path = rest.substr(slash);
    rest = rest.substr(0, slash);
  }

  httplib::Client client(rest);
  auto to_timeout = [&](double s) {
    return std::chrono::milliseconds(static_cast<long>(s * 1000.0));
  };
  client.set_connection_timeout(to_timeout(timeout_seconds_));
  client.set_read_timeout(to_timeout(timeout_seconds_));
  client.set_write_timeout(to_timeout(timeout_seconds_));

  ModulatorRequest req;
  req.instruction = ctx.instruction;
  req.robot = ctx.robot;
  req.detections = ctx.detections;
  req.sim_time = ctx.sim_time;

  auto res = client.Post(path, encode_request(req), "application/json");
  if (!res || res->status != 200) {
    ++timeouts_;
    std::cerr << "[modulator] external source timeout/failure (" << url_ << ")\n";
    return std::nullopt;
  }
  try {
    Directive d = decode_response(res->body);
    d.issued_at = ctx.sim_time;
    return d;
  } catch (const WireError& e) {
    ++timeouts_;
    std::cerr << "[modulator] external response rejected: " << e.what() << "\n";
    return std::nullopt;
  }
}

std::unique_ptr<DirectiveSource> make_source(const ModulatorConfig& config) {
  switch (config.source) {
    case ModulatorSourceKind::Scripted:
      return ScriptedSource::from_file(config.rules_path);
    case ModulatorSourceKind::Replay:
      return ReplaySource::from_file(config.replay_log_path);
    case ModulatorSourceKind::External:
      return std::make_unique<ExternalSource>(config.external_url);
  }
  throw std::logic_error("unknown modulator source kind");
}

}  // namespace socnav
