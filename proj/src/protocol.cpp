#include "swarmchem/protocol.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace swarmchem::lab {

std::string encode_record(const nlohmann::json& message) {
  const std::string payload = message.dump();
  return std::to_string(payload.size()) + "\n" + payload;
}

std::optional<std::string> RecordDecoder::next() {
  const auto newline = buffer_.find('\n');
  if (newline == std::string::npos) {
    if (buffer_.size() > 20) throw ProtocolError("record length header too long");
    return std::nullopt;
  }
  std::size_t length = 0;
  const auto [ptr, ec] = std::from_chars(buffer_.data(), buffer_.data() + newline, length);
  if (ec != std::errc{} || ptr != buffer_.data() + newline || newline == 0) {
    throw ProtocolError("malformed record length header");
  }
  if (length > kMaxRecordBytes) throw ProtocolError("record too large");
  if (buffer_.size() < newline + 1 + length) return std::nullopt;
  std::string payload = buffer_.substr(newline + 1, length);
  buffer_.erase(0, newline + 1 + length);
  return payload;
}

Socket& Socket::operator=(Socket&& o) noexcept {
  if (this != &o) {
    close();
    fd_ = o.release();
  }
  return *this;
}

Socket::~Socket() { close(); }

int Socket::release() {
  const int fd = fd_;
  fd_ = -1;
  return fd;
}

void Socket::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Socket::send_all(std::string_view bytes) const {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const auto n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("send failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::pair<std::string, std::uint16_t> parse_bind_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon + 1 >= address.size()) {
    throw ProtocolError("address must be host:port, got '" + address + "'");
  }
  unsigned port = 0;
  const char* first = address.data() + colon + 1;
  const char* last = address.data() + address.size();
  const auto [ptr, ec] = std::from_chars(first, last, port);
  if (ec != std::errc{} || ptr != last || port > 65535) {
    throw ProtocolError("bad port in '" + address + "'");
  }
  std::string host = address.substr(0, colon);
  if (host.empty()) host = "0.0.0.0";
  return {host, static_cast<std::uint16_t>(port)};
}

Socket connect_tcp(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
    throw ProtocolError("cannot resolve " + host);
  }
  Socket s(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
  const int rc = s.valid() ? ::connect(s.fd(), res->ai_addr, res->ai_addrlen) : -1;
  ::freeaddrinfo(res);
  if (rc != 0) throw ProtocolError("cannot connect to " + host + ":" + std::to_string(port));
  const int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return s;
}

ProtocolClient::ProtocolClient(const std::string& host, std::uint16_t port)
    : socket_(connect_tcp(host, port)) {}

std::uint64_t ProtocolClient::send(nlohmann::json command) {
  command["v"] = kProtocolVersion;
  command["seq"] = ++seq_;
  socket_.send_all(encode_record(command));
  return seq_;
}

std::optional<nlohmann::json> ProtocolClient::receive(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    if (auto payload = decoder_.next()) return nlohmann::json::parse(*payload);
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd pfd{socket_.fd(), POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) return std::nullopt;
    char buf[65536];
    const auto n = ::recv(socket_.fd(), buf, sizeof buf, 0);
    if (n <= 0) return std::nullopt;
    decoder_.feed({buf, static_cast<std::size_t>(n)});
  }
}

std::optional<nlohmann::json> ProtocolClient::wait_for(
    const std::function<bool(const nlohmann::json&)>& pred, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    auto msg = receive(left);
    if (!msg) return std::nullopt;
    if (pred(*msg)) return msg;
  }
}

}  // namespace swarmchem::lab
