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

#include "polisim/fabric/client.hpp"

#include <algorithm>
#include <array>
#include <thread>

#include <fmt/format.h>

#include "polisim/error.hpp"
#include "polisim/log.hpp"

namespace polisim::fabric {

using Clock = std::chrono::steady_clock;

Backoff::Backoff(std::chrono::milliseconds base, std::chrono::milliseconds cap)
    : base_(base), cap_(cap), jitter_(std::random_device{}()) {}

std::chrono::milliseconds Backoff::Next() {
  const auto ceiling = std::min<std::int64_t>(
      cap_.count(), base_.count() << std::min(attempt_, 20));
  ++attempt_;
  std::uniform_int_distribution<std::int64_t> draw(ceiling / 2, ceiling);
  return std::chrono::milliseconds(draw(jitter_));
}

namespace {

Socket ConnectWithRetry(const Endpoint& endpoint, const ConnectOptions& options) {
  Backoff backoff(options.backoff_base, options.backoff_cap);
  const auto give_up = Clock::now() + options.retry_window;
  while (true) {
    try {
      return ConnectTcp(endpoint);
    } catch (const Error& e) {
      const auto wait = backoff.Next();
      if (Clock::now() + wait > give_up) {
        throw Error(ErrorCode::kConnectionLost,
                    fmt::format("broker {} unreachable: {}", endpoint.ToString(), e.what()));
      }
      Logger()->info("broker {} unreachable, retrying in {} ms", endpoint.ToString(),
                     wait.count());
      std::this_thread::sleep_for(wait);
    }
  }
}

}  // namespace

Client Client::Connect(const Endpoint& endpoint, const ConnectOptions& options) {
  return Client(endpoint, options, ConnectWithRetry(endpoint, options));
}

void Client::Reconnect() {
  socket_ = ConnectWithRetry(endpoint_, options_);
  decoder_ = FrameDecoder();
  // Deliveries from the dead connection can no longer be acked.
  inbox_.clear();
  for (const std::string& channel : subscriptions_) Send(Message::Subscribe(channel));
}

void Client::Send(const Message& message) {
  if (!socket_.valid()) throw Error(ErrorCode::kConnectionLost, "client is closed");
  socket_.SendAll(EncodeFrame(message));
}

void Client::Publish(const std::string& channel, const Json& payload) {
  Send(Message::Publish(channel, payload));
}

void Client::Subscribe(const std::string& channel) {
  Send(Message::Subscribe(channel));
  if (std::find(subscriptions_.begin(), subscriptions_.end(), channel) == subscriptions_.end()) {
    subscriptions_.push_back(channel);
  }
}

void Client::Ack(std::uint64_t delivery_id) { Send(Message::Ack(delivery_id)); }

void Client::Pump(std::optional<Clock::time_point> deadline) {
  if (!socket_.valid()) throw Error(ErrorCode::kConnectionLost, "client is closed");
  if (deadline) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - Clock::now());
    if (!socket_.WaitReadable(std::max(left, std::chrono::milliseconds(0)))) return;
  }
  std::array<char, 64 * 1024> buffer{};
  const std::size_t n = socket_.Recv(buffer);
  if (n == 0) {
    socket_.Close();
    throw Error(ErrorCode::kConnectionLost, "broker closed the connection");
  }
  decoder_.Feed(std::span<const char>(buffer.data(), n));
  while (auto message = decoder_.Next()) {
    switch (message->type) {
      case MessageType::kDeliver:
        inbox_.push_back({message->delivery_id, message->channel, std::move(message->payload)});
        break;
      case MessageType::kPong:
        ++pongs_;
        break;
      case MessageType::kError:
        Logger()->warn("broker error: {}", message->reason);
        errors_.push_back(message->reason);
        break;
      default:
        Logger()->warn("ignoring unexpected '{}' from broker", MessageTypeName(message->type));
        break;
    }
  }
}

Delivery Client::Next() {
  while (inbox_.empty()) Pump(std::nullopt);
  Delivery d = std::move(inbox_.front());
  inbox_.pop_front();
  return d;
}

std::optional<Delivery> Client::Next(std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  while (inbox_.empty()) {
    if (Clock::now() >= deadline) return std::nullopt;
    Pump(deadline);
  }
  Delivery d = std::move(inbox_.front());
  inbox_.pop_front();
  return d;
}

void Client::Ping(std::chrono::milliseconds timeout) {
  const std::uint64_t want = pongs_ + 1;
  Send(Message::Ping());
  const auto deadline = Clock::now() + timeout;
  while (pongs_ < want) {
    if (Clock::now() >= deadline) throw Error(ErrorCode::kTimeout, "no pong from broker");
    Pump(deadline);
  }
}

std::vector<std::string> Client::TakeErrors() {
  std::vector<std::string> out;
  out.swap(errors_);
  return out;
}

}  // namespace polisim::fabric
