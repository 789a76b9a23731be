#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "demodrive/ddpg.hpp"
#include "demodrive/deploy.hpp"
#include "demodrive/imitation.hpp"
#include "demodrive/reward.hpp"
#include "demodrive/sim.hpp"

namespace demodrive {

// Everything a CLI run can be configured with. Sections mirror the JSON file:
// {"track": "default", "sim": {...}, "reward": {...}, "bc": {...},
//  "ddpg": {...}, "gains": {...}, "out_dir": "./results"}
struct GlobalConfig {
  std::string track = "default";
  SimConfig sim;
  RewardParams reward;
  BcConfig bc;
  DdpgConfig ddpg;
  DriveGains gains;
  std::string out_dir = "./results";

  // Throws ArgumentError on any invalid section.
  void validate() const;
  bool operator==(const GlobalConfig&) const = default;
};

void to_json(nlohmann::json& j, const GlobalConfig& c);
// Missing keys keep their defaults; unknown keys throw ValidationError.
void from_json(const nlohmann::json& j, GlobalConfig& c);

// Parses and validates a config file. Throws IoError, ParseError or ValidationError.
GlobalConfig load_config(const std::string& path);

// `explicit_path` when given, otherwise $DEMODRIVE_CONFIG, otherwise defaults.
GlobalConfig resolve_config(const std::optional<std::string>& explicit_path);

}  // namespace demodrive
