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

#include <map>
#include <random>
#include <set>

#include <doctest.h>

#include "polisim/fabric/broker_core.hpp"

namespace polisim::fabric {
namespace {

using namespace std::chrono_literals;

struct Harness {
  SteadyTime now{};
  std::vector<BrokerEvent> events;
  BrokerCore core{30s, [this](const BrokerEvent& e) { events.push_back(e); }};

  std::vector<Outbound> Send(ConsumerId from, const Message& m) { return core.Handle(from, m, now); }
  std::vector<Outbound> Publish(int n) {
    return Send(99, Message::Publish("tasks", Json{{"scenario_id", std::to_string(n)}}));
  }
};

const Outbound& Only(const std::vector<Outbound>& out) {
  REQUIRE(out.size() == 1);
  return out.front();
}

TEST_CASE("ping is answered with pong") {
  Harness h;
  h.core.Connect(1);
  CHECK(Only(h.Send(1, Message::Ping())).message == Message::Pong());
}

TEST_CASE("publishes queue until a subscriber arrives, then flow FIFO with prefetch 1") {
  Harness h;
  h.core.Connect(1);
  h.core.Connect(99);
  CHECK(h.Publish(1).empty());
  CHECK(h.Publish(2).empty());
  CHECK(h.core.pending("tasks") == 2);

  const auto first = Only(h.Send(1, Message::Subscribe("tasks")));
  CHECK(first.to == 1);
  CHECK(first.message.type == MessageType::kDeliver);
  CHECK(first.message.payload["scenario_id"] == "1");
  CHECK(h.core.pending("tasks") == 1);
  CHECK(h.core.in_flight("tasks") == 1);

  // Busy consumer gets nothing more until it acks.
  CHECK(h.Publish(3).empty());
  const auto second = Only(h.Send(1, Message::Ack(first.message.delivery_id)));
  CHECK(second.message.payload["scenario_id"] == "2");
  CHECK(second.message.delivery_id > first.message.delivery_id);
}

TEST_CASE("idle subscribers are served round-robin") {
  Harness h;
  for (ConsumerId c : {1, 2, 3}) {
    h.core.Connect(c);
    h.Send(c, Message::Subscribe("tasks"));
  }
  std::vector<ConsumerId> order;
  for (int i = 0; i < 3; ++i) order.push_back(Only(h.Publish(i)).to);
  CHECK(order == std::vector<ConsumerId>{1, 2, 3});
  CHECK(h.Publish(3).empty());
}

TEST_CASE("disconnect returns in-flight work to the head of the queue with a new id") {
  Harness h;
  h.core.Connect(1);
  h.core.Connect(2);
  h.Send(1, Message::Subscribe("tasks"));
  const auto d1 = Only(h.Publish(1));
  h.Publish(2);
  CHECK(h.core.pending("tasks") == 1);

  CHECK(h.core.Disconnect(1, h.now).empty());
  CHECK(h.core.pending("tasks") == 2);
  CHECK(h.core.in_flight("tasks") == 0);

  const auto redelivered = Only(h.Send(2, Message::Subscribe("tasks")));
  CHECK(redelivered.to == 2);
  CHECK(redelivered.message.payload["scenario_id"] == "1");
  CHECK(redelivered.message.delivery_id != d1.message.delivery_id);

  // The old id is now stale even for its original holder.
  h.core.Connect(3);
  const auto err = Only(h.Send(3, Message::Ack(d1.message.delivery_id)));
  CHECK(err.message.type == MessageType::kError);

  // Repeated disconnects are harmless.
  CHECK(h.core.Disconnect(1, h.now).empty());
}

TEST_CASE("visibility timeout requeues at the head with a fresh id") {
  Harness h;
  h.core.Connect(1);
  h.core.Connect(2);
  h.Send(1, Message::Subscribe("tasks"));
  const auto d1 = Only(h.Publish(1));
  h.Publish(2);
  REQUIRE(h.core.NextDeadline().has_value());
  CHECK(*h.core.NextDeadline() == h.now + 30s);

  h.now += 29s;
  CHECK(h.core.ExpireDeadlines(h.now).empty());
  CHECK(h.core.in_flight("tasks") == 1);

  h.now += 1s;
  const auto again = Only(h.core.ExpireDeadlines(h.now));
  // Consumer 1 is idle again after expiry, so it receives the head: the
  // expired payload, under a new id.
  CHECK(again.to == 1);
  CHECK(again.message.payload["scenario_id"] == "1");
  CHECK(again.message.delivery_id > d1.message.delivery_id);

  // The late ack for the expired delivery is an error, not fatal.
  const auto err = Only(h.Send(1, Message::Ack(d1.message.delivery_id)));
  CHECK(err.message.type == MessageType::kError);
  CHECK_FALSE(BrokerCore::IsFatal(Message::Ack(1)));
  // The connection keeps working.
  const auto next = Only(h.Send(1, Message::Ack(again.message.delivery_id)));
  CHECK(next.message.payload["scenario_id"] == "2");
}

TEST_CASE("acking another consumer's delivery is refused and changes nothing") {
  Harness h;
  h.core.Connect(1);
  h.core.Connect(2);
  h.Send(1, Message::Subscribe("tasks"));
  const auto d = Only(h.Publish(1));
  CHECK(Only(h.Send(2, Message::Ack(d.message.delivery_id))).message.type == MessageType::kError);
  CHECK(h.core.in_flight("tasks") == 1);
  CHECK(h.Send(1, Message::Ack(d.message.delivery_id)).empty());
  CHECK(h.core.in_flight("tasks") == 0);
}

TEST_CASE("client-forbidden message types") {
  CHECK(BrokerCore::IsFatal(Message::Deliver("x", 1, Json::object())));
  CHECK(BrokerCore::IsFatal(Message::Pong()));
  CHECK(BrokerCore::IsFatal(Message::Failure("x")));
  CHECK_FALSE(BrokerCore::IsFatal(Message::Ping()));
  Harness h;
  h.core.Connect(1);
  CHECK(Only(h.Send(1, Message::Pong())).message.type == MessageType::kError);
}

TEST_CASE("channels are independent") {
  Harness h;
  h.core.Connect(1);
  h.Send(1, Message::Subscribe("tasks"));
  h.Send(1, Message::Subscribe("results"));
  const auto t = Only(h.Publish(1));
  const auto r = Only(h.Send(9, Message::Publish("results", Json{{"scenario_id", "r"}})));
  CHECK(t.message.channel == "tasks");
  CHECK(r.message.channel == "results");
  CHECK(t.message.delivery_id != r.message.delivery_id);
}

TEST_CASE("events carry scenario ids and strictly increasing sequence numbers") {
  Harness h;
  h.core.Connect(1);
  h.Send(1, Message::Subscribe("tasks"));
  const auto d = Only(h.Publish(7));
  h.Send(1, Message::Ack(d.message.delivery_id));
  std::vector<std::string> kinds;
  for (std::size_t i = 0; i < h.events.size(); ++i) {
    kinds.emplace_back(BrokerEventName(h.events[i].kind));
    if (i > 0) CHECK(h.events[i].seq > h.events[i - 1].seq);
  }
  CHECK(kinds == std::vector<std::string>{"connect", "subscribe", "publish", "deliver", "ack"});
  CHECK(h.events[3].scenario_id == "7");
  CHECK(h.events[4].delivery_id == d.message.delivery_id);
  const Json j = ToJson(h.events[3]);
  CHECK(j["event"] == "deliver");
  CHECK(j["scenario_id"] == "7");
}

TEST_CASE("property: 100 publishes over 4 consumers are delivered and acked exactly once") {
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Harness h;
    std::mt19937_64 rng(trial);
    for (ConsumerId c = 1; c <= 4; ++c) {
      h.core.Connect(c);
      h.Send(c, Message::Subscribe("tasks"));
    }
    std::map<ConsumerId, std::uint64_t> holding;
    std::multiset<std::string> acked;
    std::set<std::uint64_t> ids;
    auto take = [&](const std::vector<Outbound>& out) {
      for (const Outbound& o : out) {
        REQUIRE(o.message.type == MessageType::kDeliver);
        REQUIRE(holding.count(o.to) == 0);
        REQUIRE(ids.insert(o.message.delivery_id).second);
        holding[o.to] = o.message.delivery_id;
      }
    };
    int published = 0;
    while (published < 100 || !holding.empty() || h.core.pending("tasks") > 0) {
      if (published < 100 && rng() % 2 == 0) {
        take(h.Publish(published++));
      } else if (!holding.empty()) {
        auto it = std::next(holding.begin(), static_cast<long>(rng() % holding.size()));
        const auto [consumer, id] = *it;
        holding.erase(it);
        // Find the payload's id from the deliver event.
        for (const auto& e : h.events) {
          if (e.kind == BrokerEventKind::kDeliver && e.delivery_id == id) acked.insert(e.scenario_id);
        }
        take(h.Send(consumer, Message::Ack(id)));
      }
    }
    CHECK(acked.size() == 100);
    CHECK(std::set<std::string>(acked.begin(), acked.end()).size() == 100);
  }
}

}  // namespace
}  // namespace polisim::fabric
