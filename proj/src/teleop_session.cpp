#include "demodrive/teleop_session.hpp"

#include <cmath>
#include <filesystem>

#include "demodrive/errors.hpp"

namespace demodrive {

namespace {

std::string error_text(const std::string& code) { return nlohmann::json{{"type", "error"}, {"code", code}}.dump(); }

}  // namespace

Vec2 green_dot(const Pose& pose, const Action& command, double distance) {
  const Action a = command.clamped();
  const Vec2 p = pose.position();
  if (a.speed <= 1e-9 || std::abs(a.steer) <= 1e-9) return p + unit_from_angle(pose.heading) * distance;
  const double radius = a.speed / a.steer;  // signed, left turns positive
  const double sweep = distance / radius;
  return {p.x + radius * (std::sin(pose.heading + sweep) - std::sin(pose.heading)),
          p.y - radius * (std::cos(pose.heading + sweep) - std::cos(pose.heading))};
}

TeleopSession::TeleopSession(Track track, SimConfig sim, RewardParams reward, std::string out_path)
    : env_(std::move(track), sim, reward), out_path_(std::move(out_path)) {
  env_.reset();
}

void TeleopSession::connect(ClientId id) { clients_.insert(id); }

std::vector<Outgoing> TeleopSession::disconnect(ClientId id) {
  clients_.erase(id);
  std::vector<Outgoing> out;
  if (driver_ == id) {
    out = stop_recording();
    driver_.reset();
    command_ = {};
  }
  return out;
}

std::vector<Outgoing> TeleopSession::handle_message(ClientId id, std::string_view text) {
  nlohmann::json msg;
  try {
    msg = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    return {{id, error_text("malformed_message")}};
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) return {{id, error_text("malformed_message")}};
  const std::string type = msg["type"];

  if (type == "hello") {
    const auto role_it = msg.find("role");
    const std::string role = role_it != msg.end() && role_it->is_string() ? role_it->get<std::string>() : "";
    if (role == "viewer") return {{id, nlohmann::json{{"type", "role"}, {"granted", true}}.dump()}};
    if (role != "driver") return {{id, error_text("invalid_message")}};
    if (driver_ && *driver_ != id) {
      return {{id, nlohmann::json{{"type", "role"}, {"granted", false}}.dump()}, {id, error_text("driver_taken")}};
    }
    driver_ = id;
    return {{id, nlohmann::json{{"type", "role"}, {"granted", true}}.dump()}};
  }
  if (type == "action") {
    if (driver_ != id) return {{id, error_text("not_driver")}};
    const auto speed = msg.find("speed");
    const auto steer = msg.find("steer");
    if (speed == msg.end() || steer == msg.end() || !speed->is_number() || !steer->is_number()) {
      return {{id, error_text("invalid_message")}};
    }
    const Action a{speed->get<double>(), steer->get<double>()};
    if (!std::isfinite(a.speed) || !std::isfinite(a.steer)) return {{id, error_text("invalid_message")}};
    command_ = a.clamped();
    return {};
  }
  if (type == "record") {
    if (driver_ != id) return {{id, error_text("not_driver")}};
    const auto on = msg.find("on");
    if (on == msg.end() || !on->is_boolean()) return {{id, error_text("invalid_message")}};
    if (on->get<bool>()) {
      std::optional<std::size_t> limit;
      if (const auto l = msg.find("limit"); l != msg.end()) {
        if (!l->is_number_unsigned() || l->get<std::size_t>() == 0) return {{id, error_text("invalid_message")}};
        limit = l->get<std::size_t>();
      }
      if (!recording_) {
        recording_.emplace(
            make_meta(env_.track(), "human", {{"sim", env_.config()}, {"reward", env_.reward_params()}}));
        record_limit_ = limit;
      }
      return {};
    }
    return stop_recording();
  }
  return {{id, error_text("unknown_message")}};
}

nlohmann::json TeleopSession::state_frame() const {
  const Pose& p = env_.pose();
  const Observation obs = env_.observation();
  const Vec2 dot = green_dot(p, command_);
  return {{"type", "state"},
          {"t", sim_time()},
          {"pose", {p.x, p.y, p.heading}},
          {"speed", env_.speed()},
          {"rays", obs.rays},
          {"reward", last_reward_},
          {"green_dot", {dot.x, dot.y}},
          {"recording", recording_.has_value()}};
}

std::vector<Outgoing> TeleopSession::tick() {
  std::vector<Outgoing> out{{std::nullopt, state_frame().dump()}};
  if (!env_.running()) env_.reposition(env_.pose(), env_.speed());  // episode budget does not apply here

  const Pose pose = env_.pose();
  const Observation obs = env_.observation();
  const Action a = driver_ ? command_ : Action{};
  const StepResult r = env_.step(a);
  last_reward_ = r.reward;
  if (recording_) recording_->append({obs, a, r.reward, pose, sim_time()});
  ++ticks_;
  if (recording_ && record_limit_ && recording_->size() >= *record_limit_) {
    for (auto& m : stop_recording()) out.push_back(std::move(m));
  }

  if (r.off_track) {
    // The operator's car is put back on the centerline at rest, as a human would.
    const TrackQuery q = env_.track().query(r.pose.position());
    const TrackPoint tp = env_.track().point_at(q.arc_position);
    env_.reposition({tp.point.x, tp.point.y, tp.heading}, 0.0);
  }
  return out;
}

std::vector<Outgoing> TeleopSession::flush() { return stop_recording(); }

std::string TeleopSession::session_path() const {
  if (saved_.empty()) return out_path_;
  // Later sessions get a numeric suffix so earlier recordings are kept.
  const std::filesystem::path base(out_path_);
  std::string name = base.filename().string();
  const std::string suffix = ".demos.jsonl";
  std::string stem = name, ext;
  if (name.size() > suffix.size() && name.ends_with(suffix)) {
    stem = name.substr(0, name.size() - suffix.size());
    ext = suffix;
  } else {
    stem = base.stem().string();
    ext = base.extension().string();
  }
  return (base.parent_path() / (stem + "-" + std::to_string(saved_.size() + 1) + ext)).string();
}

std::vector<Outgoing> TeleopSession::stop_recording() {
  if (!recording_) return {};
  const std::string path = session_path();
  const std::size_t count = recording_->size();
  save(*recording_, path);
  recording_.reset();
  record_limit_.reset();
  saved_.push_back(path);
  return {{std::nullopt, nlohmann::json{{"type", "session_saved"}, {"path", path}, {"count", count}}.dump()}};
}

}  // namespace demodrive
