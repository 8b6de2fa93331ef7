#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "socnav/directive.hpp"
#include "socnav/world.hpp"

namespace socnav {

struct DecisionContext {
  std::string instruction;
  std::vector<Detection> detections;
  RobotState robot;
  double sim_time = 0.0;
  const std::vector<Directive>* history = nullptr;  // applied directives so far
};

// Slow-loop contract: maps (instruction, observations) to a Directive.
// Implementations are side-effect-free with respect to world state.
// Returning nullopt (external timeout) retains the previous directive.
class DirectiveSource {
 public:
  virtual ~DirectiveSource() = default;
  virtual std::optional<Directive> decide(const DecisionContext& ctx) = 0;
};

// Deterministic rule engine over a data-driven rule table. First matching
// rule wins; matching is case-insensitive keyword containment over the
// instruction plus required-detection predicates. Falls through to an Idle
// directive that zeroes the velocity limits.
class ScriptedSource : public DirectiveSource {
 public:
  // Loads a rule table document; throws std::runtime_error on bad rules.
  static std::unique_ptr<ScriptedSource> from_file(const std::string& path);
  static std::unique_ptr<ScriptedSource> from_json(const std::string& json_text);

  std::optional<Directive> decide(const DecisionContext& ctx) override;

  ~ScriptedSource() override;

 private:
  ScriptedSource();
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Replays a directive log: entries become visible once sim_time passes their
// recorded issue time; the newest eligible entry wins.
class ReplaySource : public DirectiveSource {
 public:
  static std::unique_ptr<ReplaySource> from_file(const std::string& path);
  static std::unique_ptr<ReplaySource> from_json(const std::string& json_text);

  std::optional<Directive> decide(const DecisionContext& ctx) override;

 private:
  struct Entry {
    double at;
    Directive directive;
  };
  std::vector<Entry> entries_;
  size_t next_ = 0;
};

// Bridges to an external reasoning service over a single request/response
// POST. On timeout or transport failure, decide() returns nullopt and the
// caller keeps the last applied directive.
class ExternalSource : public DirectiveSource {
 public:
  // url like http://host:port/path; empty uses the MODULATOR_URL env var.
  explicit ExternalSource(std::string url, double timeout_seconds = 2.0);

  std::optional<Directive> decide(const DecisionContext& ctx) override;

  int timeout_count() const { return timeouts_; }

 private:
  std::string url_;
  double timeout_seconds_;
  int timeouts_ = 0;
};

// Holds at most one pending directive (last writer wins) and releases it at
// the first tick whose sim time reaches the scheduled application time.
class DirectiveScheduler {
 public:
  void submit(Directive directive, double apply_at) {
    pending_ = std::move(directive);
    apply_at_ = apply_at;
  }

  bool has_pending() const { return pending_.has_value(); }

  // Called at tick boundaries; consumes and returns the directive once due.
  std::optional<Directive> poll(double sim_time) {
    if (!pending_ || sim_time < apply_at_) return std::nullopt;
    std::optional<Directive> out = std::move(pending_);
    pending_.reset();
    return out;
  }

 private:
  std::optional<Directive> pending_;
  double apply_at_ = 0.0;
};

std::unique_ptr<DirectiveSource> make_source(const ModulatorConfig& config);

}  // namespace socnav
