/*
 * Copyright 2026 The locpsi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "locpsi/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <set>
#include <thread>

#include "locpsi/encoding.hpp"
#include "locpsi/errors.hpp"

namespace locpsi::net {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw IoError(what + ": " + std::strerror(errno));
}

void write_all(int fd, const std::uint8_t* data, std::size_t len) {
  std::size_t done = 0;
  while (done < len) {
    ssize_t n = ::send(fd, data + done, len - done, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("send failed");
    }
    done += static_cast<std::size_t>(n);
  }
}

// Returns false on clean EOF at the first byte.
bool read_all(int fd, std::uint8_t* data, std::size_t len) {
  std::size_t done = 0;
  while (done < len) {
    ssize_t n = ::recv(fd, data + done, len - done, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("recv failed");
    }
    if (n == 0) {
      if (done == 0) return false;
      throw IoError("connection closed mid-frame");
    }
    done += static_cast<std::size_t>(n);
  }
  return true;
}

struct HostPort {
  std::string host;
  std::uint16_t port;
};

HostPort parse_host_port(const std::string& s) {
  std::size_t colon = s.rfind(':');
  if (colon == std::string::npos)
    throw FormatError("address must be host:port, got '" + s + "'");
  std::string host = s.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(s.substr(colon + 1));
  } catch (...) {
    throw FormatError("invalid port in '" + s + "'");
  }
  if (port < 0 || port > 0xffff) throw FormatError("port out of range");
  if (host.empty()) host = "127.0.0.1";
  return {host, static_cast<std::uint16_t>(port)};
}

sockaddr_in make_addr(const HostPort& hp) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(hp.port);
  if (inet_pton(AF_INET, hp.host.c_str(), &addr.sin_addr) != 1)
    throw FormatError("invalid IPv4 address '" + hp.host + "'");
  return addr;
}

}  // namespace

void write_frame(int fd, std::span<const std::uint8_t> payload) {
  if (payload.size() > wire::kMaxFrameBytes) throw IoError("frame too large");
  std::vector<std::uint8_t> header;
  put_u32_be(header, static_cast<std::uint32_t>(payload.size()));
  write_all(fd, header.data(), header.size());
  write_all(fd, payload.data(), payload.size());
}

std::vector<std::uint8_t> read_frame(int fd, std::size_t max_len) {
  std::uint8_t header[4];
  if (!read_all(fd, header, sizeof header))
    throw IoError("connection closed");
  std::uint32_t len = read_u32_be(header);
  if (len > max_len) throw IoError("incoming frame exceeds limit");
  std::vector<std::uint8_t> payload(len);
  if (len > 0 && !read_all(fd, payload.data(), len))
    throw IoError("connection closed");
  return payload;
}

Connection::Connection(Connection&& other) noexcept : fd_(other.fd_) {
  other.fd_ = -1;
}

Connection& Connection::operator=(Connection&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

Connection::~Connection() {
  if (fd_ >= 0) ::close(fd_);
}

Connection Connection::dial(const std::string& host_port) {
  sockaddr_in addr = make_addr(parse_host_port(host_port));
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw_errno("socket failed");
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    int saved = errno;
    ::close(fd);
    errno = saved;
    throw_errno("connect to " + host_port + " failed");
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return Connection(fd);
}

void Connection::send(const wire::Message& msg) {
  auto bytes = wire::serialize(msg);
  write_frame(fd_, bytes);
}

wire::Message Connection::receive() {
  return wire::parse(read_frame(fd_));
}

wire::Message Connection::round_trip(const wire::Message& request) {
  send(request);
  return receive();
}

struct Server::Impl {
  std::string bind_spec;
  FrameHandler handler;
  int listen_fd = -1;
  std::string bound_host;
  std::uint16_t bound_port = 0;
  std::thread accept_thread;
  std::atomic<bool> stopping{false};
  std::mutex conn_mutex;
  std::set<int> conn_fds;
  std::vector<std::thread> conn_threads;

  void serve_connection(int fd) {
    for (;;) {
      std::vector<std::uint8_t> request;
      try {
        request = read_frame(fd);
      } catch (const IoError&) {
        break;  // peer closed or shut down
      }
      std::vector<std::uint8_t> reply;
      try {
        reply = handler(request);
      } catch (...) {
        reply = wire::serialize(
            wire::make_error(wire::kErrInternal, "internal error"));
      }
      try {
        write_frame(fd, reply);
      } catch (const IoError&) {
        break;
      }
    }
    {
      std::lock_guard lock(conn_mutex);
      conn_fds.erase(fd);
    }
    ::close(fd);
  }

  void accept_loop() {
    for (;;) {
      int fd = ::accept(listen_fd, nullptr, nullptr);
      if (fd < 0) {
        if (errno == EINTR) continue;
        break;  // listener closed by stop()
      }
      if (stopping) {
        ::close(fd);
        continue;
      }
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      std::lock_guard lock(conn_mutex);
      conn_fds.insert(fd);
      conn_threads.emplace_back([this, fd] { serve_connection(fd); });
    }
  }
};

Server::Server(const std::string& bind_host_port, FrameHandler handler)
    : impl_(std::make_unique<Impl>()) {
  impl_->bind_spec = bind_host_port;
  impl_->handler = std::move(handler);
}

Server::~Server() { stop(); }

void Server::start() {
  HostPort hp = parse_host_port(impl_->bind_spec);
  sockaddr_in addr = make_addr(hp);
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw_errno("socket failed");
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    int saved = errno;
    ::close(fd);
    errno = saved;
    throw_errno("bind to " + impl_->bind_spec + " failed");
  }
  if (::listen(fd, 64) != 0) {
    int saved = errno;
    ::close(fd);
    errno = saved;
    throw_errno("listen failed");
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len) != 0)
    throw_errno("getsockname failed");
  char host[INET_ADDRSTRLEN] = {};
  inet_ntop(AF_INET, &bound.sin_addr, host, sizeof host);
  impl_->bound_host = host;
  impl_->bound_port = ntohs(bound.sin_port);
  impl_->listen_fd = fd;
  impl_->accept_thread = std::thread([impl = impl_.get()] { impl->accept_loop(); });
}

void Server::stop() {
  if (!impl_ || impl_->listen_fd < 0) return;
  impl_->stopping = true;
  ::shutdown(impl_->listen_fd, SHUT_RDWR);
  ::close(impl_->listen_fd);
  impl_->listen_fd = -1;
  if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
  {
    std::lock_guard lock(impl_->conn_mutex);
    for (int fd : impl_->conn_fds) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : impl_->conn_threads)
    if (t.joinable()) t.join();
  impl_->conn_threads.clear();
}

std::uint16_t Server::port() const { return impl_->bound_port; }

std::string Server::address() const {
  return impl_->bound_host + ":" + std::to_string(impl_->bound_port);
}

}  // namespace locpsi::net
