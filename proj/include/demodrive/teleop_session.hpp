#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "demodrive/demo_store.hpp"
#include "demodrive/sim.hpp"

namespace demodrive {

using ClientId = std::uint64_t;

struct Outgoing {
  std::optional<ClientId> to;  // nullopt: every connected client
  std::string text;
};

// Point `distance` meters along the circular arc the vehicle would follow
// under `command` from `pose`. A standing or straight command looks straight ahead.
Vec2 green_dot(const Pose& pose, const Action& command, double distance = 0.15);

// Protocol state of one teleoperation server: the authoritative simulation,
// the driver slot, the held command and the recording. Not thread-safe; the
// server serializes every call.
class TeleopSession {
public:
  TeleopSession(Track track, SimConfig sim, RewardParams reward, std::string out_path);

  void connect(ClientId id);
  // Frees the driver slot; an open recording is saved first.
  std::vector<Outgoing> disconnect(ClientId id);
  // Client messages:
  //   {"type":"hello","role":"driver"|"viewer"}
  //   {"type":"action","speed":m/s,"steer":rad/s}         driver only, held until replaced
  //   {"type":"record","on":true[,"limit":n]} / "on":false  driver only; limit auto-stops after n samples
  // Malformed or unknown messages produce an error reply and nothing else.
  std::vector<Outgoing> handle_message(ClientId id, std::string_view text);

  // One fixed-rate step: broadcast the current state, record it when
  // recording, then advance the sim one dt with the held command.
  std::vector<Outgoing> tick();

  // Saves an open recording (used at shutdown).
  std::vector<Outgoing> flush();

  std::optional<ClientId> driver() const noexcept { return driver_; }
  bool recording() const noexcept { return recording_.has_value(); }
  std::size_t recorded_count() const noexcept { return recording_ ? recording_->size() : 0; }
  const Action& command() const noexcept { return command_; }
  const Environment& env() const noexcept { return env_; }
  double sim_time() const noexcept { return static_cast<double>(ticks_) * env_.config().dt; }
  const std::vector<std::string>& saved_paths() const noexcept { return saved_; }

  nlohmann::json state_frame() const;

private:
  std::vector<Outgoing> stop_recording();
  std::string session_path() const;

  Environment env_;
  std::string out_path_;
  std::set<ClientId> clients_;
  std::optional<ClientId> driver_;
  Action command_;
  std::optional<DemoSet> recording_;
  std::optional<std::size_t> record_limit_;  // stop after this many samples
  std::vector<std::string> saved_;
  double last_reward_ = 0.0;
  long ticks_ = 0;
};

}  // namespace demodrive
