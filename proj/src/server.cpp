#include "swarmchem/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>

#include "swarmchem/metrics.hpp"

namespace swarmchem::lab {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

// --- outbox ---------------------------------------------------------------------

class Outbox {
 public:
  explicit Outbox(int fd) : fd_(fd), writer_([this] { write_loop(); }) {}
  ~Outbox() { close(); }

  /// Stamps v and seq under the queue lock, so seq order is write order.
  void post(json msg) {
    std::lock_guard lock(mutex_);
    if (closed_) return;
    msg["v"] = kProtocolVersion;
    msg["seq"] = ++seq_;
    queue_.push_back(encode_record(msg));
    cv_.notify_one();
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
      cv_.notify_one();
    }
    if (writer_.joinable()) writer_.join();
  }

 private:
  void write_loop() {
    std::unique_lock lock(mutex_);
    while (true) {
      cv_.wait(lock, [&] { return closed_ || !queue_.empty(); });
      if (queue_.empty()) return;
      std::string record = std::move(queue_.front());
      queue_.pop_front();
      lock.unlock();
      bool ok = true;
      std::size_t sent = 0;
      while (ok && sent < record.size()) {
        const auto n = ::send(fd_, record.data() + sent, record.size() - sent, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) ok = false;
        else sent += static_cast<std::size_t>(n);
      }
      lock.lock();
      if (!ok) {
        closed_ = true;
        queue_.clear();
        return;
      }
    }
  }

  int fd_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::string> queue_;
  std::uint64_t seq_ = 0;
  bool closed_ = false;
  std::thread writer_;
};

struct Connection {
  Socket socket;
  std::mutex socket_mutex;
  std::shared_ptr<Outbox> out;
  std::thread reader;
};

// --- session loop -----------------------------------------------------------------

namespace {

json error_message(const std::string& message, const json& cmd, const std::string& session = {}) {
  json msg{{"type", "error"}, {"message", message}};
  if (cmd.is_object() && cmd.contains("seq")) msg["in_reply_to"] = cmd["seq"];
  if (!session.empty()) msg["session"] = session;
  return msg;
}

}  // namespace

struct PendingCommand {
  json cmd;
  std::shared_ptr<Outbox> reply_to;
};

class SessionRunner {
 public:
  SessionRunner(std::string id, iec::Session session, std::shared_ptr<Outbox> owner,
                const Connection* owner_conn, const ServerOptions& options, json create_cmd)
      : id_(std::move(id)),
        session_(std::move(session)),
        owner_(std::move(owner)),
        owner_conn_(owner_conn),
        fps_(options.frames_per_second),
        steps_per_frame_(options.steps_per_frame) {
    json state = state_message();
    if (create_cmd.contains("seq")) state["in_reply_to"] = create_cmd["seq"];
    owner_->post(std::move(state));
    thread_ = std::thread([this] { loop(); });
  }

  ~SessionRunner() { stop(); }

  void enqueue(PendingCommand c) {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(c));
    cv_.notify_one();
  }

  void stop() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
      cv_.notify_one();
    }
    if (thread_.joinable()) thread_.join();
  }

  const Connection* owner_conn() const { return owner_conn_; }

 private:
  std::chrono::nanoseconds frame_interval() const {
    return std::chrono::nanoseconds(static_cast<std::int64_t>(1e9 / fps_));
  }

  void loop() {
    auto next_frame = Clock::now() + frame_interval();
    while (true) {
      std::deque<PendingCommand> batch;
      {
        std::unique_lock lock(mutex_);
        cv_.wait_until(lock, next_frame, [&] { return stop_ || !queue_.empty(); });
        if (stop_) return;
        batch.swap(queue_);
      }
      for (const auto& c : batch) apply(c);
      const auto now = Clock::now();
      if (now >= next_frame) {
        if (!paused_) {
          session_.advance(steps_per_frame_);
          owner_->post(frame_message());
        }
        next_frame += frame_interval();
        if (next_frame < now) next_frame = now + frame_interval();
      }
    }
  }

  void apply(const PendingCommand& pc) {
    const json& cmd = pc.cmd;
    const auto& reply = pc.reply_to;
    try {
      const std::string op = cmd.at("cmd").get<std::string>();
      std::vector<iec::TileId> created;
      bool state_changed = true;
      if (op == "mutate") {
        created.push_back(session_.mutate(cmd.at("tile").get<iec::TileId>()));
      } else if (op == "mix") {
        created.push_back(
            session_.mix(cmd.at("a").get<iec::TileId>(), cmd.at("b").get<iec::TileId>()));
      } else if (op == "replicate") {
        created.push_back(session_.replicate(cmd.at("tile").get<iec::TileId>()));
      } else if (op == "kill") {
        session_.kill(cmd.at("tile").get<iec::TileId>());
      } else if (op == "random") {
        created.push_back(session_.add_random());
      } else if (op == "niec_select") {
        const auto ids = cmd.at("tiles").get<std::vector<iec::TileId>>();
        created = session_.niec_select(ids);
      } else if (op == "pause") {
        paused_ = true;
      } else if (op == "resume") {
        paused_ = false;
      } else if (op == "set_speed") {
        if (cmd.contains("steps_per_frame")) {
          const auto s = cmd.at("steps_per_frame").get<std::uint64_t>();
          if (s == 0 || s > 10'000) throw iec::SessionError("steps_per_frame must be 1..10000");
          steps_per_frame_ = s;
        }
        if (cmd.contains("fps")) {
          const double f = cmd.at("fps").get<double>();
          if (!(f > 0.0 && f <= 240.0)) throw iec::SessionError("fps must be in (0, 240]");
          fps_ = f;
        }
        state_changed = false;
      } else if (op == "get_log") {
        json records = json::array();
        for (const auto& r : session_.history()) records.push_back(json::parse(iec::to_log_line(r)));
        reply->post({{"type", "operator_log"},
                     {"session", id_},
                     {"in_reply_to", cmd.at("seq")},
                     {"records", std::move(records)}});
        return;
      } else {
        throw iec::SessionError("unknown command '" + op + "'");
      }
      json ack{{"type", "operator_ack"}, {"session", id_}, {"op", op}, {"tiles", created}};
      if (cmd.contains("seq")) ack["in_reply_to"] = cmd["seq"];
      reply->post(std::move(ack));
      if (state_changed) owner_->post(state_message());
    } catch (const iec::SessionError& e) {
      reply->post(error_message(e.what(), cmd, id_));
    } catch (const json::exception& e) {
      reply->post(error_message(std::string("malformed command: ") + e.what(), cmd, id_));
    }
  }

  json state_message() const {
    json tiles = json::array();
    for (const auto& t : session_.tiles()) {
      tiles.push_back({{"id", t.id},
                       {"recipe", serialize_recipe(t.recipe)},
                       {"particles", t.world.particles.size()}});
    }
    const auto& tc = session_.config();
    return {{"type", "session_state"},
            {"session", id_},
            {"mode", std::string(iec::to_string(session_.mode()))},
            {"seed", session_.seed()},
            {"step", session_.step()},
            {"paused", paused_},
            {"tile_config",
             {{"side", tc.side}, {"population", tc.population}, {"tile_count", tc.generation_size}}},
            {"tiles", std::move(tiles)}};
  }

  json frame_message() const {
    json tiles = json::array();
    for (const auto& t : session_.tiles()) {
      std::vector<double> xy;
      std::vector<std::uint32_t> colors;
      xy.reserve(t.world.particles.size() * 2);
      colors.reserve(t.world.particles.size());
      for (const auto& p : t.world.particles) {
        xy.push_back(std::round(p.pos.x * 10.0) / 10.0);
        xy.push_back(std::round(p.pos.y * 10.0) / 10.0);
        colors.push_back(metrics::type_color(p.params).packed());
      }
      tiles.push_back({{"id", t.id}, {"xy", std::move(xy)}, {"colors", std::move(colors)}});
    }
    return {{"type", "tile_frames"},
            {"session", id_},
            {"step", session_.step()},
            {"tiles", std::move(tiles)}};
  }

  std::string id_;
  iec::Session session_;
  std::shared_ptr<Outbox> owner_;
  const Connection* owner_conn_;
  double fps_;
  std::uint64_t steps_per_frame_;
  bool paused_ = false;

  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<PendingCommand> queue_;
  bool stop_ = false;
  std::thread thread_;
};

// --- server -----------------------------------------------------------------------

SessionServer::SessionServer(ServerOptions options) : options_(options) {}

SessionServer::~SessionServer() { stop(); }

void SessionServer::start(const std::string& bind_address) {
  const auto [host, port] = parse_bind_address(bind_address);
  Socket s(::socket(AF_INET, SOCK_STREAM, 0));
  if (!s.valid()) throw ProtocolError("cannot create socket");
  const int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  const std::string ip = host == "localhost" ? "127.0.0.1" : host;
  if (::inet_pton(AF_INET, ip.c_str(), &addr.sin_addr) != 1) {
    throw ProtocolError("bind host must be an IPv4 address, got '" + host + "'");
  }
  if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    throw ProtocolError("cannot bind " + bind_address + ": " + std::strerror(errno));
  }
  if (::listen(s.fd(), 16) != 0) throw ProtocolError("listen failed");
  socklen_t len = sizeof addr;
  ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  listener_ = std::move(s);
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void SessionServer::accept_loop() {
  while (!stopping_) {
    pollfd pfd{listener_.fd(), POLLIN, 0};
    const int rc = ::poll(&pfd, 1, 100);
    if (rc <= 0) continue;
    const int fd = ::accept(listener_.fd(), nullptr, nullptr);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    auto conn = std::make_shared<Connection>();
    conn->socket = Socket(fd);
    conn->out = std::make_shared<Outbox>(fd);
    std::lock_guard lock(mutex_);
    if (stopping_) {
      conn->out->close();
      continue;
    }
    connections_.push_back(conn);
    conn->reader = std::thread([this, conn] { read_loop(conn); });
  }
}

void SessionServer::read_loop(const std::shared_ptr<Connection>& conn) {
  RecordDecoder decoder;
  const int fd = conn->socket.fd();
  char buf[65536];
  bool open = true;
  while (open) {
    const auto n = ::recv(fd, buf, sizeof buf, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    decoder.feed({buf, static_cast<std::size_t>(n)});
    try {
      while (auto payload = decoder.next()) {
        json cmd;
        try {
          cmd = json::parse(*payload);
        } catch (const json::parse_error& e) {
          conn->out->post(error_message(std::string("unparseable record: ") + e.what(), json()));
          continue;
        }
        dispatch(conn, cmd);
      }
    } catch (const ProtocolError& e) {
      // Framing is lost; the stream cannot be resynchronised.
      conn->out->post(error_message(e.what(), json()));
      open = false;
    }
  }
  drop_sessions_of(conn.get());
  conn->out->close();
  std::lock_guard lock(conn->socket_mutex);
  ::shutdown(conn->socket.fd(), SHUT_RDWR);
  conn->socket.close();
}

void SessionServer::dispatch(const std::shared_ptr<Connection>& conn, const json& cmd) {
  if (!cmd.is_object() || !cmd.contains("cmd") || !cmd["cmd"].is_string()) {
    conn->out->post(error_message("record is not a command object", cmd));
    return;
  }
  if (!cmd.contains("v") || cmd["v"] != kProtocolVersion) {
    conn->out->post(error_message("unsupported protocol version", cmd));
    return;
  }
  const std::string op = cmd["cmd"].get<std::string>();

  if (op == "create_session") {
    try {
      const auto mode = iec::mode_from_string(cmd.at("mode").get<std::string>());
      iec::TileConfig tiles = options_.tiles;
      if (cmd.contains("tile_count")) tiles.generation_size = cmd["tile_count"].get<std::size_t>();
      if (tiles.generation_size > 64) throw iec::SessionError("tile_count must be <= 64");
      std::lock_guard lock(mutex_);
      const std::uint64_t n = ++session_counter_;
      const std::uint64_t seed = cmd.contains("seed") ? cmd["seed"].get<std::uint64_t>() : mix_seed(n);
      const std::string id = "s" + std::to_string(n);
      sessions_[id] = std::make_shared<SessionRunner>(id, iec::Session(mode, seed, tiles), conn->out,
                                                      conn.get(), options_, cmd);
    } catch (const iec::SessionError& e) {
      conn->out->post(error_message(e.what(), cmd));
    } catch (const json::exception& e) {
      conn->out->post(error_message(std::string("malformed command: ") + e.what(), cmd));
    }
    return;
  }

  if (!cmd.contains("session") || !cmd["session"].is_string()) {
    conn->out->post(error_message("command needs a session", cmd));
    return;
  }
  const std::string sid = cmd["session"].get<std::string>();
  std::shared_ptr<SessionRunner> runner;
  {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(sid);
    if (it != sessions_.end()) {
      runner = it->second;
      if (op == "close_session") sessions_.erase(it);
    }
  }
  if (!runner) {
    conn->out->post(error_message("unknown session '" + sid + "'", cmd, sid));
    return;
  }
  if (op == "close_session") {
    runner->stop();
    json ack{{"type", "operator_ack"}, {"session", sid}, {"op", op}, {"tiles", json::array()}};
    if (cmd.contains("seq")) ack["in_reply_to"] = cmd["seq"];
    conn->out->post(std::move(ack));
    return;
  }
  runner->enqueue({cmd, conn->out});
}

void SessionServer::drop_sessions_of(const Connection* conn) {
  std::vector<std::shared_ptr<SessionRunner>> dropped;
  {
    std::lock_guard lock(mutex_);
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (it->second->owner_conn() == conn) {
        dropped.push_back(it->second);
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& r : dropped) r->stop();
}

void SessionServer::stop() {
  {
    std::lock_guard lock(stop_mutex_);
    if (stopped_) return;
    stopped_ = true;
  }
  stopping_ = true;
  if (accept_thread_.joinable()) accept_thread_.join();
  listener_.close();

  std::map<std::string, std::shared_ptr<SessionRunner>> sessions;
  std::vector<std::shared_ptr<Connection>> connections;
  {
    std::lock_guard lock(mutex_);
    sessions.swap(sessions_);
    connections = connections_;
  }
  for (auto& [id, runner] : sessions) runner->stop();
  for (auto& c : connections) {
    std::lock_guard lock(c->socket_mutex);
    if (c->socket.valid()) ::shutdown(c->socket.fd(), SHUT_RDWR);
  }
  for (auto& c : connections) {
    if (c->reader.joinable()) c->reader.join();
  }
  {
    std::lock_guard lock(stop_mutex_);
    stop_cv_.notify_all();
  }
}

void SessionServer::wait() {
  std::unique_lock lock(stop_mutex_);
  stop_cv_.wait(lock, [&] { return stopped_; });
}

}  // namespace swarmchem::lab
