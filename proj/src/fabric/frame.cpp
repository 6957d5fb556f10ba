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

#include "polisim/fabric/frame.hpp"

#include <array>

#include <fmt/format.h>

#include "polisim/error.hpp"

namespace polisim::fabric {
namespace {

constexpr std::array<std::string_view, 7> kTypeNames = {
    "subscribe", "publish", "deliver", "ack", "ping", "pong", "error"};

[[noreturn]] void Protocol(const std::string& what) { throw Error(ErrorCode::kProtocol, what); }

const Json& Required(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) Protocol(fmt::format("message missing '{}'", key));
  return *it;
}

std::string RequiredString(const Json& j, const char* key) {
  const Json& v = Required(j, key);
  if (!v.is_string()) Protocol(fmt::format("'{}' must be a string", key));
  return v.get<std::string>();
}

std::uint64_t RequiredId(const Json& j) {
  const Json& v = Required(j, "delivery_id");
  if (!v.is_number_unsigned()) Protocol("'delivery_id' must be an unsigned integer");
  return v.get<std::uint64_t>();
}

}  // namespace

std::string_view MessageTypeName(MessageType type) {
  return kTypeNames[static_cast<std::size_t>(type)];
}

std::optional<MessageType> ParseMessageType(std::string_view name) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == name) return static_cast<MessageType>(i);
  }
  return std::nullopt;
}

Message Message::Subscribe(std::string channel) {
  Message m;
  m.type = MessageType::kSubscribe;
  m.channel = std::move(channel);
  return m;
}

Message Message::Publish(std::string channel, Json payload) {
  Message m;
  m.type = MessageType::kPublish;
  m.channel = std::move(channel);
  m.payload = std::move(payload);
  return m;
}

Message Message::Deliver(std::string channel, std::uint64_t delivery_id, Json payload) {
  Message m;
  m.type = MessageType::kDeliver;
  m.channel = std::move(channel);
  m.delivery_id = delivery_id;
  m.payload = std::move(payload);
  return m;
}

Message Message::Ack(std::uint64_t delivery_id) {
  Message m;
  m.type = MessageType::kAck;
  m.delivery_id = delivery_id;
  return m;
}

Message Message::Ping() { return Message{}; }

Message Message::Pong() {
  Message m;
  m.type = MessageType::kPong;
  return m;
}

Message Message::Failure(std::string reason) {
  Message m;
  m.type = MessageType::kError;
  m.reason = std::move(reason);
  return m;
}

Json ToJson(const Message& m) {
  Json j;
  j["type"] = MessageTypeName(m.type);
  switch (m.type) {
    case MessageType::kSubscribe:
      j["channel"] = m.channel;
      break;
    case MessageType::kPublish:
      j["channel"] = m.channel;
      j["payload"] = m.payload;
      break;
    case MessageType::kDeliver:
      j["channel"] = m.channel;
      j["delivery_id"] = m.delivery_id;
      j["payload"] = m.payload;
      break;
    case MessageType::kAck:
      j["delivery_id"] = m.delivery_id;
      break;
    case MessageType::kError:
      j["reason"] = m.reason;
      break;
    case MessageType::kPing:
    case MessageType::kPong:
      break;
  }
  return j;
}

Message MessageFromJson(const Json& j) {
  if (!j.is_object()) Protocol("frame body is not a JSON object");
  const std::string type_name = RequiredString(j, "type");
  const auto type = ParseMessageType(type_name);
  if (!type) Protocol(fmt::format("unknown message type '{}'", type_name));

  Message m;
  m.type = *type;
  switch (m.type) {
    case MessageType::kSubscribe:
      m.channel = RequiredString(j, "channel");
      break;
    case MessageType::kPublish:
      m.channel = RequiredString(j, "channel");
      m.payload = Required(j, "payload");
      break;
    case MessageType::kDeliver:
      m.channel = RequiredString(j, "channel");
      m.delivery_id = RequiredId(j);
      m.payload = Required(j, "payload");
      break;
    case MessageType::kAck:
      m.delivery_id = RequiredId(j);
      break;
    case MessageType::kError:
      m.reason = RequiredString(j, "reason");
      break;
    case MessageType::kPing:
    case MessageType::kPong:
      break;
  }
  return m;
}

std::string EncodeFrame(const Message& message) {
  const std::string body = Dump(ToJson(message));
  if (body.size() > kMaxFrameBytes) {
    Protocol(fmt::format("frame body of {} bytes exceeds {}", body.size(), kMaxFrameBytes));
  }
  const auto n = static_cast<std::uint32_t>(body.size());
  std::string frame;
  frame.reserve(kFrameHeaderBytes + body.size());
  frame += static_cast<char>((n >> 24) & 0xff);
  frame += static_cast<char>((n >> 16) & 0xff);
  frame += static_cast<char>((n >> 8) & 0xff);
  frame += static_cast<char>(n & 0xff);
  frame += body;
  return frame;
}

void FrameDecoder::Feed(std::span<const char> bytes) {
  // Compact once the consumed prefix dominates the buffer.
  if (offset_ > 0 && offset_ * 2 >= buffer_.size()) {
    buffer_.erase(0, offset_);
    offset_ = 0;
  }
  buffer_.append(bytes.data(), bytes.size());
}

std::optional<Message> FrameDecoder::Next() {
  if (buffered() < kFrameHeaderBytes) return std::nullopt;
  const auto* p = reinterpret_cast<const unsigned char*>(buffer_.data() + offset_);
  const std::uint32_t length = (static_cast<std::uint32_t>(p[0]) << 24) |
                               (static_cast<std::uint32_t>(p[1]) << 16) |
                               (static_cast<std::uint32_t>(p[2]) << 8) |
                               static_cast<std::uint32_t>(p[3]);
  if (length > kMaxFrameBytes) {
    Protocol(fmt::format("frame length {} exceeds {}", length, kMaxFrameBytes));
  }
  if (buffered() < kFrameHeaderBytes + length) return std::nullopt;

  const std::string_view body(buffer_.data() + offset_ + kFrameHeaderBytes, length);
  offset_ += kFrameHeaderBytes + length;
  Json j = Json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) Protocol("frame body is not valid JSON");
  return MessageFromJson(j);
}

}  // namespace polisim::fabric
