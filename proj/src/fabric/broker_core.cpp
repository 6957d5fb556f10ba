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

#include "polisim/fabric/broker_core.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace polisim::fabric {

std::string_view BrokerEventName(BrokerEventKind kind) {
  switch (kind) {
    case BrokerEventKind::kConnect: return "connect";
    case BrokerEventKind::kDisconnect: return "disconnect";
    case BrokerEventKind::kSubscribe: return "subscribe";
    case BrokerEventKind::kPublish: return "publish";
    case BrokerEventKind::kDeliver: return "deliver";
    case BrokerEventKind::kAck: return "ack";
    case BrokerEventKind::kRequeue: return "requeue";
    case BrokerEventKind::kError: return "error";
  }
  return "unknown";
}

Json ToJson(const BrokerEvent& e) {
  Json j;
  j["seq"] = e.seq;
  j["event"] = BrokerEventName(e.kind);
  j["consumer"] = e.consumer;
  if (!e.channel.empty()) j["channel"] = e.channel;
  if (e.delivery_id != 0) j["delivery_id"] = e.delivery_id;
  if (!e.scenario_id.empty()) j["scenario_id"] = e.scenario_id;
  if (!e.detail.empty()) j["detail"] = e.detail;
  return j;
}

void BrokerCore::Emit(BrokerEventKind kind, ConsumerId consumer, const std::string& channel,
                      std::uint64_t delivery_id, const Json* payload, std::string detail) {
  if (!sink_) return;
  BrokerEvent e;
  e.seq = next_seq_++;
  e.kind = kind;
  e.consumer = consumer;
  e.channel = channel;
  e.delivery_id = delivery_id;
  if (payload && payload->is_object()) {
    auto it = payload->find("scenario_id");
    if (it != payload->end() && it->is_string()) e.scenario_id = it->get<std::string>();
  }
  e.detail = std::move(detail);
  sink_(e);
}

void BrokerCore::Connect(ConsumerId consumer) {
  connected_.insert(consumer);
  Emit(BrokerEventKind::kConnect, consumer, {}, 0, nullptr);
}

bool BrokerCore::IsFatal(const Message& message) {
  return message.type == MessageType::kDeliver || message.type == MessageType::kPong ||
         message.type == MessageType::kError;
}

std::vector<Outbound> BrokerCore::Handle(ConsumerId from, const Message& message,
                                         SteadyTime now) {
  std::vector<Outbound> out;
  switch (message.type) {
    case MessageType::kSubscribe: {
      ChannelState& channel = channels_[message.channel];
      if (std::find(channel.subscribers.begin(), channel.subscribers.end(), from) ==
          channel.subscribers.end()) {
        channel.subscribers.push_back(from);
        channel.unacked.emplace(from, 0);
      }
      Emit(BrokerEventKind::kSubscribe, from, message.channel, 0, nullptr);
      Dispatch(message.channel, channel, now, out);
      break;
    }
    case MessageType::kPublish: {
      ChannelState& channel = channels_[message.channel];
      channel.pending.push_back(message.payload);
      Emit(BrokerEventKind::kPublish, from, message.channel, 0, &message.payload);
      Dispatch(message.channel, channel, now, out);
      break;
    }
    case MessageType::kAck: {
      for (auto& [name, channel] : channels_) {
        auto it = channel.in_flight.find(message.delivery_id);
        if (it == channel.in_flight.end()) continue;
        if (it->second.consumer != from) {
          const std::string reason =
              fmt::format("delivery {} belongs to another consumer", message.delivery_id);
          Emit(BrokerEventKind::kError, from, name, message.delivery_id, nullptr, reason);
          out.push_back({from, Message::Failure(reason)});
          return out;
        }
        Emit(BrokerEventKind::kAck, from, name, message.delivery_id, &it->second.payload);
        channel.in_flight.erase(it);
        --channel.unacked[from];
        Dispatch(name, channel, now, out);
        return out;
      }
      const std::string reason =
          fmt::format("unknown or stale delivery id {}", message.delivery_id);
      Emit(BrokerEventKind::kError, from, {}, message.delivery_id, nullptr, reason);
      out.push_back({from, Message::Failure(reason)});
      break;
    }
    case MessageType::kPing:
      out.push_back({from, Message::Pong()});
      break;
    case MessageType::kDeliver:
    case MessageType::kPong:
    case MessageType::kError: {
      const std::string reason =
          fmt::format("clients may not send '{}'", MessageTypeName(message.type));
      Emit(BrokerEventKind::kError, from, {}, 0, nullptr, reason);
      out.push_back({from, Message::Failure(reason)});
      break;
    }
  }
  return out;
}

void BrokerCore::Requeue(ChannelState& channel, const std::string& name, std::uint64_t id,
                         const char* why) {
  auto it = channel.in_flight.find(id);
  Emit(BrokerEventKind::kRequeue, it->second.consumer, name, id, &it->second.payload, why);
  --channel.unacked[it->second.consumer];
  channel.pending.push_front(std::move(it->second.payload));
  channel.in_flight.erase(it);
}

std::vector<Outbound> BrokerCore::Disconnect(ConsumerId consumer, SteadyTime now) {
  std::vector<Outbound> out;
  if (connected_.erase(consumer) == 0) return out;
  Emit(BrokerEventKind::kDisconnect, consumer, {}, 0, nullptr);
  for (auto& [name, channel] : channels_) {
    std::erase(channel.subscribers, consumer);
    // Highest id first so the payloads land at the head in delivery order.
    std::vector<std::uint64_t> held;
    for (const auto& [id, flight] : channel.in_flight) {
      if (flight.consumer == consumer) held.push_back(id);
    }
    for (auto it = held.rbegin(); it != held.rend(); ++it) {
      Requeue(channel, name, *it, "consumer disconnected");
    }
    channel.unacked.erase(consumer);
    Dispatch(name, channel, now, out);
  }
  return out;
}

std::vector<Outbound> BrokerCore::ExpireDeadlines(SteadyTime now) {
  std::vector<Outbound> out;
  for (auto& [name, channel] : channels_) {
    std::vector<std::uint64_t> expired;
    for (const auto& [id, flight] : channel.in_flight) {
      if (flight.deadline <= now) expired.push_back(id);
    }
    if (expired.empty()) continue;
    for (auto it = expired.rbegin(); it != expired.rend(); ++it) {
      Requeue(channel, name, *it, "visibility timeout");
    }
    Dispatch(name, channel, now, out);
  }
  return out;
}

std::optional<SteadyTime> BrokerCore::NextDeadline() const {
  std::optional<SteadyTime> earliest;
  for (const auto& [name, channel] : channels_) {
    for (const auto& [id, flight] : channel.in_flight) {
      if (!earliest || flight.deadline < *earliest) earliest = flight.deadline;
    }
  }
  return earliest;
}

void BrokerCore::Dispatch(const std::string& name, ChannelState& channel, SteadyTime now,
                          std::vector<Outbound>& out) {
  while (!channel.pending.empty() && !channel.subscribers.empty()) {
    const std::size_t count = channel.subscribers.size();
    std::optional<ConsumerId> chosen;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t slot = (channel.cursor + i) % count;
      const ConsumerId candidate = channel.subscribers[slot];
      if (channel.unacked[candidate] < kPrefetch) {
        chosen = candidate;
        channel.cursor = (slot + 1) % count;
        break;
      }
    }
    if (!chosen) return;

    const std::uint64_t id = next_delivery_id_++;
    InFlight flight{std::move(channel.pending.front()), *chosen, now + visibility_timeout_};
    channel.pending.pop_front();
    ++channel.unacked[*chosen];
    Emit(BrokerEventKind::kDeliver, *chosen, name, id, &flight.payload);
    out.push_back({*chosen, Message::Deliver(name, id, flight.payload)});
    channel.in_flight.emplace(id, std::move(flight));
  }
}

std::size_t BrokerCore::pending(const std::string& channel) const {
  auto it = channels_.find(channel);
  return it == channels_.end() ? 0 : it->second.pending.size();
}

std::size_t BrokerCore::in_flight(const std::string& channel) const {
  auto it = channels_.find(channel);
  return it == channels_.end() ? 0 : it->second.in_flight.size();
}

}  // namespace polisim::fabric
