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

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "polisim/fabric/broker_core.hpp"
#include "polisim/fabric/socket.hpp"

namespace polisim::fabric {

// TCP front end for BrokerCore. One reader thread per connection feeds the
// core under a single mutex, so every state change is totally ordered; a
// timer thread fires visibility deadlines.
class Broker {
 public:
  struct Options {
    Endpoint listen;
    std::chrono::milliseconds visibility_timeout{std::chrono::seconds(60)};
    // When set, every BrokerEvent is appended to this file as a JSON line.
    std::string event_log_path;
    // Keep events in memory for events().
    bool record_events = false;
  };

  explicit Broker(Options options);
  ~Broker();

  Broker(const Broker&) = delete;
  Broker& operator=(const Broker&) = delete;

  // Binds and starts serving. Throws Error(kIo) if the address is taken.
  void Start();
  void Stop();

  std::uint16_t port() const { return port_; }
  Endpoint endpoint() const { return {options_.listen.host, port_}; }

  std::vector<BrokerEvent> events() const;
  std::size_t pending(const std::string& channel) const;
  std::size_t in_flight(const std::string& channel) const;

 private:
  struct Connection {
    ConsumerId id = 0;
    Socket socket;
    std::thread reader;
    std::atomic<bool> finished{false};
  };

  void AcceptLoop();
  void ReadLoop(const std::shared_ptr<Connection>& connection);
  void TimerLoop();
  // Requires mu_.
  void Send(const std::vector<Outbound>& out);
  void SendTo(Connection& connection, const Message& message);
  void Record(const BrokerEvent& event);
  void Reap();

  Options options_;
  std::uint16_t port_ = 0;
  Socket listener_;

  mutable std::mutex mu_;
  std::condition_variable timer_cv_;
  BrokerCore core_;
  std::map<ConsumerId, std::shared_ptr<Connection>> connections_;
  ConsumerId next_consumer_ = 1;
  std::vector<BrokerEvent> events_;
  std::ofstream event_log_;

  std::atomic<bool> stopping_{false};
  bool started_ = false;
  std::thread acceptor_;
  std::thread timer_;
};

}  // namespace polisim::fabric
