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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "polisim/json.hpp"

namespace polisim::fabric {

enum class MessageType { kSubscribe, kPublish, kDeliver, kAck, kPing, kPong, kError };

std::string_view MessageTypeName(MessageType type);
std::optional<MessageType> ParseMessageType(std::string_view name);

// One protocol message. Which fields are meaningful depends on type:
//
//   subscribe  channel
//   publish    channel, payload
//   deliver    channel, delivery_id, payload
//   ack        delivery_id
//   ping, pong (none)
//   error      reason
struct Message {
  MessageType type = MessageType::kPing;
  std::string channel;
  std::uint64_t delivery_id = 0;
  Json payload;
  std::string reason;

  static Message Subscribe(std::string channel);
  static Message Publish(std::string channel, Json payload);
  static Message Deliver(std::string channel, std::uint64_t delivery_id, Json payload);
  static Message Ack(std::uint64_t delivery_id);
  static Message Ping();
  static Message Pong();
  static Message Failure(std::string reason);

  friend bool operator==(const Message&, const Message&) = default;
};

// Only the fields the type requires are emitted.
Json ToJson(const Message& message);

// Throws Error(kProtocol) when `type` is missing or unknown or a required
// field is absent or mistyped. Unknown fields are ignored.
Message MessageFromJson(const Json& j);

}  // namespace polisim::fabric
