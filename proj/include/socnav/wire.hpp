#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "socnav/directive.hpp"
#include "socnav/world.hpp"

namespace socnav {

// Schema violation in a wire document; the message carries the field path.
struct WireError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModulatorRequest {
  std::string instruction;
  RobotState robot;
  std::vector<Detection> detections;
  double sim_time = 0.0;
};

// Request document sent to an external reasoning service.
std::string encode_request(const ModulatorRequest& req);
ModulatorRequest decode_request(const std::string& text);

// Response document: mode, param_updates, markers (id-addressed; the fast
// system grounds their positions), optional goal.
std::string encode_response(const Directive& directive);
Directive decode_response(const std::string& text);

}  // namespace socnav
