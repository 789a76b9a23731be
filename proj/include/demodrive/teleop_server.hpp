#pragma once

#include <memory>
#include <string>

#include "demodrive/teleop_session.hpp"

namespace demodrive {

struct TeleopServerOptions {
  std::string address = "0.0.0.0";
  unsigned short port = 8090;  // 0 picks a free port
  double tick_hz = 20.0;       // wall-clock pacing only; each tick advances the sim by exactly dt
};

// WebSocket teleoperation server. One thread runs the accept loop, every
// connection and the fixed-rate tick, so session calls never overlap.
// Plain HTTP `GET /track` returns the track JSON for the client to draw.
class TeleopServer {
public:
  // Binds immediately; throws IoError when the address or port is unavailable.
  TeleopServer(std::unique_ptr<TeleopSession> session, TeleopServerOptions options);
  ~TeleopServer();
  TeleopServer(const TeleopServer&) = delete;
  TeleopServer& operator=(const TeleopServer&) = delete;

  unsigned short port() const;

  // Serves until stop(); saves an open recording before returning.
  void run();
  // Safe from any thread.
  void stop();

  // Only for inspection after run() has returned.
  const TeleopSession& session() const;

  struct Impl;  // defined next to the connection types

private:
  std::shared_ptr<Impl> impl_;
};

}  // namespace demodrive
