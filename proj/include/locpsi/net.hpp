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

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "locpsi/wire.hpp"

namespace locpsi::net {

// Length-prefixed frame primitives over a stream socket.
void write_frame(int fd, std::span<const std::uint8_t> payload);
std::vector<std::uint8_t> read_frame(int fd,
                                     std::size_t max_len = wire::kMaxFrameBytes);

// Client side of one connection. Move-only RAII around the socket.
class Connection {
 public:
  explicit Connection(int fd) : fd_(fd) {}
  Connection(Connection&& other) noexcept;
  Connection& operator=(Connection&& other) noexcept;
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;
  ~Connection();

  static Connection dial(const std::string& host_port);

  wire::Message round_trip(const wire::Message& request);
  void send(const wire::Message& msg);
  wire::Message receive();

 private:
  int fd_ = -1;
};

// Accepts connections and answers one frame with one frame. The handler may
// be called from many threads at once.
class Server {
 public:
  using FrameHandler =
      std::function<std::vector<std::uint8_t>(std::span<const std::uint8_t>)>;

  Server(const std::string& bind_host_port, FrameHandler handler);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void start();
  void stop();
  std::uint16_t port() const;
  std::string address() const;  // host:port actually bound

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace locpsi::net
