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
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "polisim/fabric/frame.hpp"
#include "polisim/fabric/socket.hpp"
#include "polisim/json.hpp"

namespace polisim::fabric {

// Jittered exponential backoff: attempt k waits a uniform draw from
// [d/2, d] with d = min(cap, base * 2^k).
class Backoff {
 public:
  Backoff(std::chrono::milliseconds base, std::chrono::milliseconds cap);

  std::chrono::milliseconds Next();
  void Reset() { attempt_ = 0; }

 private:
  std::chrono::milliseconds base_;
  std::chrono::milliseconds cap_;
  int attempt_ = 0;
  std::mt19937_64 jitter_;
};

struct ConnectOptions {
  // Give up once this much time has passed without a successful connect.
  std::chrono::milliseconds retry_window{std::chrono::seconds(60)};
  std::chrono::milliseconds backoff_base{200};
  std::chrono::milliseconds backoff_cap{std::chrono::seconds(10)};
};

struct Delivery {
  std::uint64_t delivery_id = 0;
  std::string channel;
  Json payload;
};

// One broker connection. Not thread-safe: drive each Client from one thread
// at a time. Any transport failure throws Error(kConnectionLost); call
// Reconnect() to resume, which re-subscribes to every channel. Deliveries
// not acked before the loss are redelivered by the broker.
class Client {
 public:
  // Retries with backoff for options.retry_window, then throws
  // Error(kConnectionLost).
  static Client Connect(const Endpoint& endpoint, const ConnectOptions& options = {});

  Client(Client&&) = default;
  Client& operator=(Client&&) = default;

  void Publish(const std::string& channel, const Json& payload);
  void Subscribe(const std::string& channel);
  void Ack(std::uint64_t delivery_id);

  // Blocks until a delivery arrives.
  Delivery Next();
  // std::nullopt on timeout.
  std::optional<Delivery> Next(std::chrono::milliseconds timeout);

  // Round trip to the broker; everything the broker sent earlier has been
  // read when this returns. Throws Error(kTimeout).
  void Ping(std::chrono::milliseconds timeout = std::chrono::seconds(10));

  // `error` messages received so far (for example, a stale ack).
  std::vector<std::string> TakeErrors();

  void Reconnect();
  void Close() { socket_.Close(); }

  const Endpoint& endpoint() const { return endpoint_; }

 private:
  Client(Endpoint endpoint, ConnectOptions options, Socket socket)
      : endpoint_(std::move(endpoint)), options_(options), socket_(std::move(socket)) {}

  void Send(const Message& message);
  // Reads whatever arrives before `deadline` (nullopt: block for one read).
  // Returns after processing at least one frame or when the deadline passes.
  void Pump(std::optional<std::chrono::steady_clock::time_point> deadline);

  Endpoint endpoint_;
  ConnectOptions options_;
  Socket socket_;
  FrameDecoder decoder_;
  std::deque<Delivery> inbox_;
  std::vector<std::string> errors_;
  std::vector<std::string> subscriptions_;
  std::uint64_t pongs_ = 0;
};

}  // namespace polisim::fabric
