// Copyright 2026 The Polisim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace polisim::fabric {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 5680;

  std::string ToString() const;
};

// "host:port"; throws Error(kInvalidArgument).
Endpoint ParseEndpoint(std::string_view text);

// Owning TCP socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() { Close(); }

  Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void Close();
  // Wakes any thread blocked in Recv on this socket.
  void Shutdown();

  // Throws Error(kConnectionLost) on failure.
  void SendAll(std::string_view bytes);

  // Returns 0 on orderly shutdown; throws Error(kConnectionLost) on error.
  std::size_t Recv(std::span<char> buffer);

  // Waits until readable; false on timeout.
  bool WaitReadable(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
};

// Throws Error(kConnectionLost) when the connection is refused.
Socket ConnectTcp(const Endpoint& endpoint);

// Binds and listens; port 0 picks a free port. Throws Error(kIo).
Socket ListenTcp(const Endpoint& endpoint);
std::uint16_t LocalPort(const Socket& socket);

}  // namespace polisim::fabric
