#pragma once

// Snapshot/command protocol: each frame is a 4-byte big-endian length
// followed by that many bytes of UTF-8 JSON {"type": ..., "payload": ...}.
//
// Client -> server types: pause, resume, reset_world, load_source
// ({"text": ...}), snapshot (request an immediate snapshot).
// Server -> client types: snapshot, ack ({"command", "ok", "error"?,
// "outcome"?}).

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "lrp/trace.hpp"

namespace lrp::wire {

inline constexpr std::size_t kMaxFrame = 16u << 20;

std::string encode_frame(const Json& message);
Json make_message(std::string_view type, Json payload);

/// Incremental decoder over a byte stream.
class FrameDecoder {
 public:
  void feed(std::string_view bytes);
  /// Next complete frame. Throws std::runtime_error on an oversized frame or
  /// invalid JSON; the offending frame is consumed.
  std::optional<Json> next();
  std::size_t buffered() const noexcept { return buffer_.size(); }

 private:
  std::string buffer_;
};

/// TCP server on 127.0.0.1. Incoming frames are handed to `on_message` from
/// the server thread; send() may be called from any thread and goes to every
/// connected client.
class Server {
 public:
  using Handler = std::function<void(const Json& message)>;

  /// port 0 picks a free port. Throws std::runtime_error if binding fails.
  Server(std::uint16_t port, Handler on_message);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  std::size_t client_count() const;
  void send(const Json& message);
  void stop();

 private:
  void loop();
  void drop_client(int fd);

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  Handler on_message_;
  mutable std::mutex mutex_;
  struct Client {
    int fd;
    FrameDecoder decoder;
  };
  std::vector<Client> clients_;
  std::atomic<bool> stopping_{false};
  std::thread thread_;
};

/// Blocking client used by tests and tools.
class Client {
 public:
  Client(const std::string& host, std::uint16_t port);
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  void send(const Json& message);
  /// Waits up to timeout_ms for a frame.
  std::optional<Json> receive(int timeout_ms);

 private:
  int fd_ = -1;
  FrameDecoder decoder_;
};

}  // namespace lrp::wire
