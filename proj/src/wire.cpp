#include "lrp/wire.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>

namespace lrp::wire {

namespace {

std::runtime_error sys_error(const std::string& what) {
  return std::runtime_error(what + ": " + std::strerror(errno));
}

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

std::string encode_frame(const Json& message) {
  const std::string body = message.dump();
  if (body.size() > kMaxFrame) throw std::runtime_error("frame too large");
  const auto n = static_cast<std::uint32_t>(body.size());
  std::string out;
  out.reserve(4 + body.size());
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  out += body;
  return out;
}

Json make_message(std::string_view type, Json payload) {
  Json j;
  j["type"] = type;
  j["payload"] = std::move(payload);
  return j;
}

void FrameDecoder::feed(std::string_view bytes) { buffer_.append(bytes); }

std::optional<Json> FrameDecoder::next() {
  if (buffer_.size() < 4) return std::nullopt;
  const auto* p = reinterpret_cast<const unsigned char*>(buffer_.data());
  const std::size_t n = (std::size_t{p[0]} << 24) | (std::size_t{p[1]} << 16) | (std::size_t{p[2]} << 8) | p[3];
  if (n > kMaxFrame) {
    buffer_.clear();
    throw std::runtime_error("frame length " + std::to_string(n) + " exceeds limit");
  }
  if (buffer_.size() < 4 + n) return std::nullopt;
  std::string body = buffer_.substr(4, n);
  buffer_.erase(0, 4 + n);
  try {
    return Json::parse(body);
  } catch (const Json::exception& e) {
    throw std::runtime_error(std::string("malformed frame: ") + e.what());
  }
}

Server::Server(std::uint16_t port, Handler on_message) : on_message_(std::move(on_message)) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw sys_error("socket");
  const int yes = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 4) < 0) {
    const auto err = sys_error("bind 127.0.0.1:" + std::to_string(port));
    ::close(listen_fd_);
    throw err;
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  thread_ = std::thread([this] { loop(); });
}

Server::~Server() { stop(); }

void Server::stop() {
  if (stopping_.exchange(true)) return;
  if (thread_.joinable()) thread_.join();
  std::lock_guard lock(mutex_);
  for (auto& c : clients_) ::close(c.fd);
  clients_.clear();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = -1;
}

std::size_t Server::client_count() const {
  std::lock_guard lock(mutex_);
  return clients_.size();
}

void Server::send(const Json& message) {
  const std::string frame = encode_frame(message);
  std::lock_guard lock(mutex_);
  std::vector<int> failed;
  for (const auto& c : clients_) {
    if (!write_all(c.fd, frame)) failed.push_back(c.fd);
  }
  for (int fd : failed) drop_client(fd);
}

void Server::drop_client(int fd) {
  const auto it = std::find_if(clients_.begin(), clients_.end(), [fd](const Client& c) { return c.fd == fd; });
  if (it == clients_.end()) return;
  ::close(it->fd);
  clients_.erase(it);
}

void Server::loop() {
  while (!stopping_) {
    std::vector<pollfd> fds{{listen_fd_, POLLIN, 0}};
    {
      std::lock_guard lock(mutex_);
      for (const auto& c : clients_) fds.push_back({c.fd, POLLIN, 0});
    }
    if (::poll(fds.data(), fds.size(), 50) <= 0) continue;

    if (fds[0].revents & POLLIN) {
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd >= 0) {
        std::lock_guard lock(mutex_);
        clients_.push_back(Client{fd, {}});
      }
    }
    for (std::size_t i = 1; i < fds.size(); ++i) {
      if (fds[i].revents == 0) continue;
      char buf[65536];
      const ssize_t n = ::recv(fds[i].fd, buf, sizeof buf, 0);
      std::vector<Json> messages;
      {
        std::lock_guard lock(mutex_);
        const auto it = std::find_if(clients_.begin(), clients_.end(),
                                     [fd = fds[i].fd](const Client& c) { return c.fd == fd; });
        if (it == clients_.end()) continue;
        if (n <= 0) {
          drop_client(fds[i].fd);
          continue;
        }
        it->decoder.feed(std::string_view(buf, static_cast<std::size_t>(n)));
        try {
          while (auto m = it->decoder.next()) messages.push_back(std::move(*m));
        } catch (const std::exception&) {
          drop_client(fds[i].fd);
        }
      }
      for (const auto& m : messages) on_message_(m);
    }
  }
}

Client::Client(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw sys_error("socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw std::runtime_error("bad address " + host);
  }
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    const auto err = sys_error("connect " + host + ":" + std::to_string(port));
    ::close(fd_);
    throw err;
  }
}

Client::~Client() {
  if (fd_ >= 0) ::close(fd_);
}

void Client::send(const Json& message) {
  if (!write_all(fd_, encode_frame(message))) throw sys_error("send");
}

std::optional<Json> Client::receive(int timeout_ms) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  while (true) {
    if (auto m = decoder_.next()) return m;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, static_cast<int>(left.count())) <= 0) continue;
    char buf[65536];
    const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
    if (n <= 0) return std::nullopt;
    decoder_.feed(std::string_view(buf, static_cast<std::size_t>(n)));
  }
}

}  // namespace lrp::wire
