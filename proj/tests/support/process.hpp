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

// Test helpers: child processes running the polisim binary, scratch
// directories, and a broker launched on an ephemeral port.

#pragma once

#include <sys/types.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "polisim/fabric/socket.hpp"

namespace polisim::testing {

// Path of the CLI under test (set at build time).
std::string PolisimBinary();

// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag);
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string ReadFile(const std::filesystem::path& path);

// A child process with stdout and stderr sent to files. Killed with SIGKILL
// on destruction if still running.
class Child {
 public:
  Child(const std::vector<std::string>& argv, const std::filesystem::path& stdout_path,
        const std::filesystem::path& stderr_path,
        const std::vector<std::string>& extra_env = {},
        const std::optional<std::filesystem::path>& stdin_path = std::nullopt);
  ~Child();
  Child(Child&& other) noexcept;
  Child& operator=(Child&&) = delete;
  Child(const Child&) = delete;

  pid_t pid() const { return pid_; }
  void Signal(int sig) const;
  // Exit status (128 + signal for a signalled child), or nullopt on timeout.
  std::optional<int> Wait(std::chrono::milliseconds timeout);
  bool running();

  const std::filesystem::path& stdout_path() const { return stdout_path_; }
  const std::filesystem::path& stderr_path() const { return stderr_path_; }

 private:
  pid_t pid_ = -1;
  std::optional<int> status_;
  std::filesystem::path stdout_path_;
  std::filesystem::path stderr_path_;
};

// Runs to completion; returns the exit status (or -1 on timeout, after
// killing the child).
int RunToCompletion(const std::vector<std::string>& argv, const std::filesystem::path& stdout_path,
                    const std::filesystem::path& stderr_path,
                    std::chrono::milliseconds timeout = std::chrono::seconds(120),
                    const std::vector<std::string>& extra_env = {},
                    const std::optional<std::filesystem::path>& stdin_path = std::nullopt);

// `polisim broker --listen 127.0.0.1:0` as a child; the port is read from
// its banner.
class BrokerProcess {
 public:
  BrokerProcess(const ScratchDir& dir, const std::string& name,
                const std::vector<std::string>& extra_args = {});

  fabric::Endpoint endpoint() const { return {"127.0.0.1", port_}; }
  std::string address() const { return endpoint().ToString(); }
  Child& child() { return *child_; }

 private:
  std::optional<Child> child_;
  std::uint16_t port_ = 0;
};

// Polls `predicate` every 20 ms until it holds or `timeout` passes.
template <typename Predicate>
bool WaitFor(Predicate predicate, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    if (predicate()) return true;
    ::usleep(20000);
  }
  return predicate();
}

}  // namespace polisim::testing
