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

#include "support/process.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

extern char** environ;

namespace polisim::testing {

std::string PolisimBinary() {
  if (const char* env = std::getenv("POLISIM_TEST_BINARY")) return env;
  return POLISIM_BINARY_PATH;
}

ScratchDir::ScratchDir(const std::string& tag) {
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("polisim-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(rd()));
  std::filesystem::create_directories(path_);
}

ScratchDir::~ScratchDir() {
  std::error_code ec;
  if (!std::getenv("POLISIM_KEEP_SCRATCH")) std::filesystem::remove_all(path_, ec);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Child::Child(const std::vector<std::string>& argv, const std::filesystem::path& stdout_path,
             const std::filesystem::path& stderr_path, const std::vector<std::string>& extra_env,
             const std::optional<std::filesystem::path>& stdin_path)
    : stdout_path_(stdout_path), stderr_path_(stderr_path) {
  std::vector<std::string> env;
  for (char** e = environ; *e; ++e) env.emplace_back(*e);
  env.insert(env.end(), extra_env.begin(), extra_env.end());

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  std::vector<char*> envp;
  for (const auto& e : env) envp.push_back(const_cast<char*>(e.c_str()));
  envp.push_back(nullptr);

  pid_ = ::fork();
  if (pid_ < 0) throw std::runtime_error("fork failed");
  if (pid_ == 0) {
    const int out = ::open(stdout_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    const int err = ::open(stderr_path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    const int in = ::open(stdin_path ? stdin_path->c_str() : "/dev/null", O_RDONLY);
    if (out < 0 || err < 0 || in < 0) ::_exit(126);
    ::dup2(out, 1);
    ::dup2(err, 2);
    ::dup2(in, 0);
    ::execve(args[0], args.data(), envp.data());
    ::_exit(127);
  }
}

Child::Child(Child&& other) noexcept
    : pid_(other.pid_),
      status_(other.status_),
      stdout_path_(std::move(other.stdout_path_)),
      stderr_path_(std::move(other.stderr_path_)) {
  other.pid_ = -1;
}

Child::~Child() {
  if (pid_ > 0 && running()) {
    ::kill(pid_, SIGKILL);
    Wait(std::chrono::seconds(10));
  }
}

void Child::Signal(int sig) const {
  if (pid_ > 0) ::kill(pid_, sig);
}

bool Child::running() {
  if (pid_ <= 0 || status_) return false;
  int status = 0;
  const pid_t r = ::waitpid(pid_, &status, WNOHANG);
  if (r == pid_) {
    status_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    return false;
  }
  return r == 0;
}

std::optional<int> Child::Wait(std::chrono::milliseconds timeout) {
  WaitFor([&] { return !running(); }, timeout);
  return status_;
}

int RunToCompletion(const std::vector<std::string>& argv, const std::filesystem::path& stdout_path,
                    const std::filesystem::path& stderr_path, std::chrono::milliseconds timeout,
                    const std::vector<std::string>& extra_env,
                    const std::optional<std::filesystem::path>& stdin_path) {
  Child child(argv, stdout_path, stderr_path, extra_env, stdin_path);
  const auto status = child.Wait(timeout);
  return status ? *status : -1;
}

BrokerProcess::BrokerProcess(const ScratchDir& dir, const std::string& name,
                             const std::vector<std::string>& extra_args) {
  std::vector<std::string> argv = {PolisimBinary(), "broker", "--listen", "127.0.0.1:0"};
  argv.insert(argv.end(), extra_args.begin(), extra_args.end());
  child_.emplace(argv, dir / (name + ".out"), dir / (name + ".err"));
  const std::string marker = "listening on 127.0.0.1:";
  std::string banner;
  const bool up = WaitFor(
      [&] {
        banner = ReadFile(child_->stdout_path());
        return banner.find('\n') != std::string::npos;
      },
      std::chrono::seconds(10));
  const auto at = banner.find(marker);
  if (!up || at == std::string::npos) {
    throw std::runtime_error("broker did not start: " + ReadFile(child_->stderr_path()));
  }
  port_ = static_cast<std::uint16_t>(std::stoi(banner.substr(at + marker.size())));
}

}  // namespace polisim::testing
