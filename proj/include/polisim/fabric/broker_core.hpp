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

// Work-queue semantics without any I/O. The networked broker owns one
// BrokerCore behind a mutex and forwards every inbound message, disconnect
// and timer tick to it; the returned Outbound list is what to send.
//
// Per channel:
//   - publishes queue FIFO in `pending` until a subscriber is idle;
//   - a subscriber is idle while it holds fewer than kPrefetch unacked
//     deliveries on that channel;
//   - idle subscribers are served round-robin;
//   - a delivery moves the payload to `in_flight` with a visibility deadline;
//   - ack removes it for good; disconnect or deadline expiry puts it back at
//     the head of `pending`, and the next delivery gets a fresh id.
// Delivery ids are unique and strictly increasing for the core's lifetime.

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "polisim/fabric/message.hpp"

namespace polisim::fabric {

using ConsumerId = std::uint64_t;
using SteadyTime = std::chrono::steady_clock::time_point;

inline constexpr std::size_t kPrefetch = 1;

struct Outbound {
  ConsumerId to = 0;
  Message message;
};

enum class BrokerEventKind {
  kConnect,
  kDisconnect,
  kSubscribe,
  kPublish,
  kDeliver,
  kAck,
  kRequeue,  // in-flight payload returned to pending (disconnect or expiry)
  kError,
};

std::string_view BrokerEventName(BrokerEventKind kind);

struct BrokerEvent {
  std::uint64_t seq = 0;
  BrokerEventKind kind = BrokerEventKind::kConnect;
  ConsumerId consumer = 0;
  std::string channel;
  std::uint64_t delivery_id = 0;
  // For publish/deliver/ack of scenario tasks and results, the payload's
  // scenario_id when it has one; lets tests correlate without payloads.
  std::string scenario_id;
  std::string detail;
};

Json ToJson(const BrokerEvent& event);

class BrokerCore {
 public:
  using EventSink = std::function<void(const BrokerEvent&)>;

  explicit BrokerCore(std::chrono::milliseconds visibility_timeout,
                      EventSink sink = nullptr)
      : visibility_timeout_(visibility_timeout), sink_(std::move(sink)) {}

  void Connect(ConsumerId consumer);

  // subscribe, publish, ack and ping. Other types from a client are
  // protocol errors and yield an error Outbound; the caller decides whether
  // to drop the connection (see IsFatal).
  std::vector<Outbound> Handle(ConsumerId from, const Message& message, SteadyTime now);

  std::vector<Outbound> Disconnect(ConsumerId consumer, SteadyTime now);

  std::vector<Outbound> ExpireDeadlines(SteadyTime now);

  std::optional<SteadyTime> NextDeadline() const;

  // True for messages a client must never send (deliver, pong, error).
  static bool IsFatal(const Message& message);

  std::size_t pending(const std::string& channel) const;
  std::size_t in_flight(const std::string& channel) const;
  std::uint64_t last_delivery_id() const { return next_delivery_id_ - 1; }

 private:
  struct InFlight {
    Json payload;
    ConsumerId consumer = 0;
    SteadyTime deadline;
  };

  struct ChannelState {
    std::deque<Json> pending;
    std::map<std::uint64_t, InFlight> in_flight;
    std::vector<ConsumerId> subscribers;  // subscription order
    std::size_t cursor = 0;               // round-robin position
    std::map<ConsumerId, std::size_t> unacked;
  };

  void Dispatch(const std::string& name, ChannelState& channel, SteadyTime now,
                std::vector<Outbound>& out);
  void Requeue(ChannelState& channel, const std::string& name, std::uint64_t id,
               const char* why);
  void Emit(BrokerEventKind kind, ConsumerId consumer, const std::string& channel,
            std::uint64_t delivery_id, const Json* payload, std::string detail = {});

  std::chrono::milliseconds visibility_timeout_;
  EventSink sink_;
  std::map<std::string, ChannelState> channels_;
  std::set<ConsumerId> connected_;
  std::uint64_t next_delivery_id_ = 1;
  std::uint64_t next_seq_ = 1;
};

}  // namespace polisim::fabric
