#include "fabricbench/socket.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>
#include <thread>

#include "fabricbench/errors.hpp"

namespace fabricbench {

namespace {

struct Throttle {
  std::mutex mutex;
  double bytes_per_second = 0;
  std::chrono::steady_clock::time_point next_free = std::chrono::steady_clock::now();
};

Throttle& throttle_state() {
  static Throttle t;
  return t;
}

// Sleeps long enough that cumulative sends stay under the configured rate.
void throttle_acquire(std::size_t bytes) {
  Throttle& t = throttle_state();
  std::chrono::steady_clock::time_point wake;
  {
    std::lock_guard<std::mutex> lock(t.mutex);
    if (t.bytes_per_second <= 0) return;
    const auto now = std::chrono::steady_clock::now();
    if (t.next_free < now) t.next_free = now;
    wake = t.next_free;
    t.next_free += std::chrono::nanoseconds(
        static_cast<std::int64_t>(1e9 * static_cast<double>(bytes) / t.bytes_per_second));
  }
  std::this_thread::sleep_until(wake);
}

sockaddr_in parse_address(const std::string& address) {
  const std::size_t colon = address.rfind(':');
  if (colon == std::string::npos) {
    throw ValidationError("address '" + address + "' must be host:port");
  }
  const std::string host = address.substr(0, colon);
  const std::string port_text = address.substr(colon + 1);
  int port = 0;
  try {
    port = std::stoi(port_text);
  } catch (const std::exception&) {
    throw ValidationError("bad port in address '" + address + "'");
  }
  if (port < 0 || port > 65535) throw ValidationError("port out of range in '" + address + "'");

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (host.empty() || host == "*" || host == "0.0.0.0") {
    addr.sin_addr.s_addr = INADDR_ANY;
  } else if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw ValidationError("cannot parse IPv4 host '" + host + "'");
  }
  return addr;
}

std::string address_to_string(const sockaddr_in& addr) {
  char buf[INET_ADDRSTRLEN] = {0};
  inet_ntop(AF_INET, &addr.sin_addr, buf, sizeof(buf));
  return std::string(buf) + ":" + std::to_string(ntohs(addr.sin_port));
}

}  // namespace

void set_send_throttle(double bytes_per_second) {
  Throttle& t = throttle_state();
  std::lock_guard<std::mutex> lock(t.mutex);
  t.bytes_per_second = bytes_per_second;
  t.next_free = std::chrono::steady_clock::now();
}

double send_throttle() {
  Throttle& t = throttle_state();
  std::lock_guard<std::mutex> lock(t.mutex);
  return t.bytes_per_second;
}

Socket::~Socket() { close(); }

Socket::Socket(Socket&& other) noexcept
    : fd_(other.fd_), bytes_sent_(other.bytes_sent_), bytes_received_(other.bytes_received_) {
  other.fd_ = -1;
}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    bytes_sent_ = other.bytes_sent_;
    bytes_received_ = other.bytes_received_;
    other.fd_ = -1;
  }
  return *this;
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

Socket Socket::connect_to(const std::string& address, double timeout_s) {
  const sockaddr_in addr = parse_address(address);
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw ConnectionError("socket(): " + std::string(std::strerror(errno)));
  Socket sock(fd);

  timeval tv{};
  tv.tv_sec = static_cast<long>(timeout_s);
  tv.tv_usec = static_cast<long>((timeout_s - tv.tv_sec) * 1e6);
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));

  if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw ConnectionError("connect to " + address + ": " + std::string(std::strerror(errno)));
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return sock;
}

void Socket::send_all(const void* data, std::size_t len) {
  const char* p = static_cast<const char*>(data);
  const double throttled = send_throttle();
  // Chunked only when throttled; the bucket meters each slice.
  const std::size_t chunk = throttled > 0 ? 64 * 1024 : len;
  std::size_t off = 0;
  while (off < len) {
    const std::size_t want = std::min(chunk, len - off);
    if (throttled > 0) throttle_acquire(want);
    std::size_t sent_in_chunk = 0;
    while (sent_in_chunk < want) {
      const ssize_t rc = ::send(fd_, p + off + sent_in_chunk, want - sent_in_chunk, MSG_NOSIGNAL);
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw ConnectionError("send: " + std::string(std::strerror(errno)));
      }
      if (rc == 0) throw ConnectionError("send: connection closed");
      sent_in_chunk += static_cast<std::size_t>(rc);
    }
    off += want;
    bytes_sent_ += want;
  }
}

void Socket::recv_all(void* data, std::size_t len) {
  char* p = static_cast<char*>(data);
  std::size_t got = 0;
  while (got < len) {
    const ssize_t rc = ::recv(fd_, p + got, len - got, 0);
    if (rc < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) throw ConnectionError("recv: timed out");
      throw ConnectionError("recv: " + std::string(std::strerror(errno)));
    }
    if (rc == 0) {
      throw ConnectionError("short read: peer closed after " + std::to_string(got) + "/" +
                            std::to_string(len) + " bytes");
    }
    got += static_cast<std::size_t>(rc);
    bytes_received_ += static_cast<std::size_t>(rc);
  }
}

void Socket::send_message(MsgType type, std::uint64_t seq, const std::string& payload) {
  send_message(type, seq, payload.data(), payload.size());
}

void Socket::send_message(MsgType type, std::uint64_t seq, const void* payload, std::size_t len) {
  const auto header = encode_header(type, seq, static_cast<std::uint32_t>(len));
  send_all(header.data(), header.size());
  if (len > 0) send_all(payload, len);
}

WireMessage Socket::recv_message() {
  unsigned char header[kWireHeaderSize];
  recv_all(header, sizeof(header));
  const WireHeader h = decode_header(header);
  WireMessage msg;
  msg.type = h.type;
  msg.seq = h.seq;
  msg.payload.resize(h.payload_len);
  if (h.payload_len > 0) recv_all(msg.payload.data(), h.payload_len);
  return msg;
}

void Socket::set_recv_timeout(double seconds) {
  timeval tv{};
  if (seconds > 0) {
    tv.tv_sec = static_cast<long>(seconds);
    tv.tv_usec = static_cast<long>((seconds - tv.tv_sec) * 1e6);
  }
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

std::string Socket::peer_address() const {
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  if (::getpeername(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) return "?";
  return address_to_string(addr);
}

Listener::Listener(const std::string& address) {
  const sockaddr_in addr = parse_address(address);
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw ConnectionError("socket(): " + std::string(std::strerror(errno)));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    fd_ = -1;
    throw ConnectionError("bind " + address + ": " + err);
  }
  if (::listen(fd_, 64) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    fd_ = -1;
    throw ConnectionError("listen " + address + ": " + err);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  if (bound.sin_addr.s_addr == INADDR_ANY) bound.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  local_address_ = address_to_string(bound);
}

Listener::~Listener() { close(); }

Listener::Listener(Listener&& other) noexcept
    : fd_(other.fd_), local_address_(std::move(other.local_address_)) {
  other.fd_ = -1;
}

Listener& Listener::operator=(Listener&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    local_address_ = std::move(other.local_address_);
    other.fd_ = -1;
  }
  return *this;
}

std::optional<Socket> Listener::accept() {
  while (true) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return Socket(fd);
    }
    if (errno == EINTR) continue;
    return std::nullopt;  // listener closed or fatal error
  }
}

std::optional<Socket> Listener::accept_with_timeout(double timeout_s) {
  pollfd pfd{};
  pfd.fd = fd_;
  pfd.events = POLLIN;
  const int rc = ::poll(&pfd, 1, static_cast<int>(timeout_s * 1000));
  if (rc <= 0) return std::nullopt;
  return accept();
}

void Listener::close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

}  // namespace fabricbench
