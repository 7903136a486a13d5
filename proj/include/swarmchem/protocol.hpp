#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace swarmchem::lab {

/// Session protocol, version 1.
///
/// Transport: TCP. Every record is `<decimal byte length>\n<JSON object>`,
/// in both directions. Every object carries "v": 1 and a "seq" number that
/// strictly increases per sender on a connection.
///
/// Client commands ("cmd"):
///   create_session {mode: "NIEC"|"HIEC", tile_count?, seed?}
///   mutate {session, tile}          mix {session, a, b}
///   replicate {session, tile}       kill {session, tile}
///   random {session}                niec_select {session, tiles: [id, ...]}
///   pause {session}                 resume {session}
///   set_speed {session, steps_per_frame?, fps?}
///   get_log {session}               close_session {session}
///
/// Server messages ("type"):
///   session_state {session, mode, seed, step, paused, tile_config,
///                  tiles: [{id, recipe, particles}]}
///   tile_frames   {session, step, tiles: [{id, xy: [x0, y0, x1, y1, ...],
///                  colors: [rgb0, rgb1, ...]}]}
///   operator_ack  {session, op, in_reply_to, tiles: [new ids]}
///   operator_log  {session, in_reply_to, records: [record, ...]}
///   error         {in_reply_to?, session?, message}
///
/// Commands are applied by the session loop between simulation steps, in
/// arrival order. A malformed command yields an error and nothing else.
inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxRecordBytes = 64u << 20;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string encode_record(const nlohmann::json& message);

/// Incremental decoder for the length-delimited stream.
class RecordDecoder {
 public:
  void feed(std::string_view bytes) { buffer_.append(bytes); }
  /// Next complete payload, if any. Throws ProtocolError on a bad length header.
  std::optional<std::string> next();

 private:
  std::string buffer_;
};

/// Owning socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(o.release()) {}
  Socket& operator=(Socket&& o) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release();
  void close();

  /// Throws ProtocolError if the peer is gone.
  void send_all(std::string_view bytes) const;

 private:
  int fd_ = -1;
};

/// Splits "host:port". Throws ProtocolError when malformed.
std::pair<std::string, std::uint16_t> parse_bind_address(const std::string& address);

Socket connect_tcp(const std::string& host, std::uint16_t port);

/// Blocking client used by tools and tests.
class ProtocolClient {
 public:
  ProtocolClient(const std::string& host, std::uint16_t port);

  /// Adds "v" and "seq" and sends. Returns the seq used.
  std::uint64_t send(nlohmann::json command);
  /// Next message, or nullopt on timeout or disconnect.
  std::optional<nlohmann::json> receive(std::chrono::milliseconds timeout);
  /// Receives until `pred` accepts a message; skipped messages are dropped.
  std::optional<nlohmann::json> wait_for(const std::function<bool(const nlohmann::json&)>& pred,
                                         std::chrono::milliseconds timeout);

 private:
  Socket socket_;
  RecordDecoder decoder_;
  std::uint64_t seq_ = 0;
};

}  // namespace swarmchem::lab
