#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fabricbench/wire.hpp"

namespace fabricbench {

// Thin RAII wrapper over a stream socket with framed send/recv and byte
// counters. Addresses are "host:port" (IPv4); port 0 binds an ephemeral port.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept;
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  static Socket connect_to(const std::string& address, double timeout_s = 10.0);

  bool valid() const { return fd_ >= 0; }
  void close();

  // Blocks until the full buffer is written; throws ConnectionError on
  // failure. Honors the process-wide send throttle when one is installed.
  void send_all(const void* data, std::size_t len);
  // Reads exactly len bytes; ConnectionError on EOF/timeout ("short read").
  void recv_all(void* data, std::size_t len);

  void send_message(MsgType type, std::uint64_t seq, const std::string& payload);
  void send_message(MsgType type, std::uint64_t seq, const void* payload, std::size_t len);
  WireMessage recv_message();

  // Receive timeout for subsequent reads; 0 disables.
  void set_recv_timeout(double seconds);

  std::uint64_t bytes_sent() const { return bytes_sent_; }
  std::uint64_t bytes_received() const { return bytes_received_; }

  std::string peer_address() const;

 private:
  int fd_ = -1;
  std::uint64_t bytes_sent_ = 0;
  std::uint64_t bytes_received_ = 0;
};

class Listener {
 public:
  Listener() = default;
  explicit Listener(const std::string& address);
  ~Listener();
  Listener(Listener&& other) noexcept;
  Listener& operator=(Listener&& other) noexcept;
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;

  bool valid() const { return fd_ >= 0; }
  // The actual bound address (resolves ephemeral ports).
  std::string local_address() const { return local_address_; }
  // Returns nullopt when the listener is closed from another thread.
  std::optional<Socket> accept();
  // Waits up to timeout_s for an inbound connection; nullopt on timeout/close.
  std::optional<Socket> accept_with_timeout(double timeout_s);
  void close();

 private:
  int fd_ = -1;
  std::string local_address_;
};

// Process-wide data-plane send throttle (bytes/s); 0 disables. Installed from
// the FABRICBENCH_SEND_THROTTLE_MBPS environment variable by the agent so
// contention tests can cap loopback bandwidth externally.
void set_send_throttle(double bytes_per_second);
double send_throttle();

}  // namespace fabricbench
