#include "demodrive/config.hpp"

#include <cstdlib>

#include "demodrive/errors.hpp"
#include "demodrive/io.hpp"
#include "demodrive/json_util.hpp"

namespace demodrive {

void GlobalConfig::validate() const {
  if (track.empty()) throw ArgumentError("track must name a file or 'default'");
  if (out_dir.empty()) throw ArgumentError("out_dir must not be empty");
  sim.validate();
  reward.validate();
  bc.validate();
  ddpg.validate();
  gains.validate();
}

void to_json(nlohmann::json& j, const GlobalConfig& c) {
  j = {{"track", c.track}, {"sim", c.sim},     {"reward", c.reward},    {"bc", c.bc},
       {"ddpg", c.ddpg},   {"gains", c.gains}, {"out_dir", c.out_dir}};
}

void from_json(const nlohmann::json& j, GlobalConfig& c) {
  json_util::reject_unknown_keys(j, {"track", "sim", "reward", "bc", "ddpg", "gains", "out_dir"}, "config");
  json_util::read_opt(j, "track", c.track);
  json_util::read_opt(j, "out_dir", c.out_dir);
  if (j.contains("sim")) from_json(j.at("sim"), c.sim);
  if (j.contains("reward")) from_json(j.at("reward"), c.reward);
  if (j.contains("bc")) from_json(j.at("bc"), c.bc);
  if (j.contains("ddpg")) from_json(j.at("ddpg"), c.ddpg);
  if (j.contains("gains")) from_json(j.at("gains"), c.gains);
}

GlobalConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(1, path + ": " + e.what());
  }
  GlobalConfig c;
  from_json(doc, c);
  c.validate();
  return c;
}

GlobalConfig resolve_config(const std::optional<std::string>& explicit_path) {
  if (explicit_path) return load_config(*explicit_path);
  if (const char* env = std::getenv("DEMODRIVE_CONFIG"); env && *env) return load_config(env);
  return {};
}

}  // namespace demodrive
