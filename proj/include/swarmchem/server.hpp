#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "swarmchem/interactive.hpp"
#include "swarmchem/protocol.hpp"

namespace swarmchem::lab {

struct ServerOptions {
  double frames_per_second = 20.0;
  std::uint64_t steps_per_frame = 1;
  iec::TileConfig tiles;
};

class Outbox;
class SessionRunner;
struct Connection;

/// Serves the session protocol (see protocol.hpp) over TCP.
///
/// Each session runs its own simulation loop thread; each connection has a
/// reader thread and a writer thread fed by a queue. Sessions die with the
/// connection that created them.
class SessionServer {
 public:
  explicit SessionServer(ServerOptions options = {});
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  /// Binds "host:port" (port 0 picks a free one) and starts accepting.
  void start(const std::string& bind_address);
  /// Actual bound port.
  std::uint16_t port() const { return port_; }
  /// Stops every session and connection. Idempotent.
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();

 private:
  void accept_loop();
  void read_loop(const std::shared_ptr<Connection>& conn);
  void dispatch(const std::shared_ptr<Connection>& conn, const nlohmann::json& cmd);
  void drop_sessions_of(const Connection* conn);

  ServerOptions options_;
  Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;

  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<SessionRunner>> sessions_;
  std::vector<std::shared_ptr<Connection>> connections_;
  std::uint64_t session_counter_ = 0;
  std::mutex stop_mutex_;
  bool stopped_ = false;
  std::condition_variable stop_cv_;
};

}  // namespace swarmchem::lab
