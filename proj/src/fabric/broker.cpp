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

#include "polisim/fabric/broker.hpp"

#include <sys/socket.h>
#include <sys/time.h>

#include <array>
#include <cerrno>
#include <cstring>

#include "polisim/error.hpp"
#include "polisim/fabric/frame.hpp"
#include "polisim/log.hpp"

namespace polisim::fabric {

Broker::Broker(Options options)
    : options_(std::move(options)),
      core_(options_.visibility_timeout, [this](const BrokerEvent& e) { Record(e); }) {}

Broker::~Broker() { Stop(); }

void Broker::Record(const BrokerEvent& event) {
  if (options_.record_events) events_.push_back(event);
  if (event_log_.is_open()) {
    event_log_ << Dump(ToJson(event)) << '\n';
    event_log_.flush();
  }
}

void Broker::Start() {
  if (!options_.event_log_path.empty()) {
    event_log_.open(options_.event_log_path, std::ios::app);
    if (!event_log_) {
      throw Error(ErrorCode::kIo, "cannot open event log " + options_.event_log_path);
    }
  }
  listener_ = ListenTcp(options_.listen);
  port_ = LocalPort(listener_);
  started_ = true;
  acceptor_ = std::thread([this] { AcceptLoop(); });
  timer_ = std::thread([this] { TimerLoop(); });
}

void Broker::Stop() {
  if (!started_ || stopping_.exchange(true)) return;
  timer_cv_.notify_all();
  if (acceptor_.joinable()) acceptor_.join();
  if (timer_.joinable()) timer_.join();
  std::map<ConsumerId, std::shared_ptr<Connection>> connections;
  {
    std::lock_guard lock(mu_);
    connections = connections_;
    for (auto& [id, connection] : connections) connection->socket.Shutdown();
  }
  for (auto& [id, connection] : connections) {
    if (connection->reader.joinable()) connection->reader.join();
  }
  std::lock_guard lock(mu_);
  connections_.clear();
  listener_.Close();
}

void Broker::Reap() {
  std::vector<std::shared_ptr<Connection>> finished;
  {
    std::lock_guard lock(mu_);
    for (auto it = connections_.begin(); it != connections_.end();) {
      if (it->second->finished) {
        finished.push_back(it->second);
        it = connections_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& connection : finished) {
    if (connection->reader.joinable()) connection->reader.join();
  }
}

void Broker::AcceptLoop() {
  while (!stopping_) {
    Reap();
    if (!listener_.WaitReadable(std::chrono::milliseconds(100))) continue;
    const int fd = ::accept4(listener_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno != EINTR && errno != EAGAIN && !stopping_) {
        Logger()->warn("accept failed: {}", std::strerror(errno));
      }
      continue;
    }
    timeval send_timeout{10, 0};
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &send_timeout, sizeof send_timeout);

    auto connection = std::make_shared<Connection>();
    connection->socket = Socket(fd);
    std::lock_guard lock(mu_);
    connection->id = next_consumer_++;
    core_.Connect(connection->id);
    connections_.emplace(connection->id, connection);
    connection->reader = std::thread([this, connection] { ReadLoop(connection); });
  }
}

void Broker::SendTo(Connection& connection, const Message& message) {
  try {
    connection.socket.SendAll(EncodeFrame(message));
  } catch (const Error& e) {
    // The reader notices the shutdown and runs the disconnect path.
    Logger()->debug("send to consumer {} failed: {}", connection.id, e.what());
    connection.socket.Shutdown();
  }
}

void Broker::Send(const std::vector<Outbound>& out) {
  for (const Outbound& o : out) {
    auto it = connections_.find(o.to);
    if (it != connections_.end()) SendTo(*it->second, o.message);
  }
  if (!out.empty()) timer_cv_.notify_all();
}

void Broker::ReadLoop(const std::shared_ptr<Connection>& connection) {
  FrameDecoder decoder;
  std::array<char, 64 * 1024> buffer{};
  bool open = true;
  while (open && !stopping_) {
    std::size_t n = 0;
    try {
      n = connection->socket.Recv(buffer);
    } catch (const Error&) {
      break;
    }
    if (n == 0) break;
    decoder.Feed(std::span<const char>(buffer.data(), n));
    try {
      while (auto message = decoder.Next()) {
        std::lock_guard lock(mu_);
        const auto now = std::chrono::steady_clock::now();
        Send(core_.Handle(connection->id, *message, now));
        if (BrokerCore::IsFatal(*message)) {
          open = false;
          break;
        }
      }
    } catch (const Error& e) {
      std::lock_guard lock(mu_);
      Logger()->warn("closing consumer {}: {}", connection->id, e.what());
      SendTo(*connection, Message::Failure(e.what()));
      open = false;
    }
  }
  std::lock_guard lock(mu_);
  Send(core_.Disconnect(connection->id, std::chrono::steady_clock::now()));
  connection->socket.Shutdown();
  connection->finished = true;
}

void Broker::TimerLoop() {
  std::unique_lock lock(mu_);
  while (!stopping_) {
    const auto deadline = core_.NextDeadline();
    if (deadline) {
      timer_cv_.wait_until(lock, *deadline);
    } else {
      timer_cv_.wait_for(lock, std::chrono::milliseconds(500));
    }
    if (stopping_) break;
    Send(core_.ExpireDeadlines(std::chrono::steady_clock::now()));
  }
}

std::vector<BrokerEvent> Broker::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::size_t Broker::pending(const std::string& channel) const {
  std::lock_guard lock(mu_);
  return core_.pending(channel);
}

std::size_t Broker::in_flight(const std::string& channel) const {
  std::lock_guard lock(mu_);
  return core_.in_flight(channel);
}

}  // namespace polisim::fabric
