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

#include <cmath>
#include <iterator>
#include <random>

#include "polisim/fabric/message.hpp"

namespace polisim::fabric {
namespace {

// Mix of ASCII, JSON escapes, control characters and multi-byte UTF-8.
const char* const kPieces[] = {"a", "Z", "0", " ", "\"", "\\", "/", "\n", "\t", "\x01", "\x1f",
                               "\xc3\xa9", "\xe6\xbc\xa2", "\xf0\x9f\xa6\x9f", "tasks", "{}"};

std::string RandomString(std::mt19937_64& rng, int max_pieces) {
  std::string s;
  const int n = static_cast<int>(rng() % (max_pieces + 1));
  for (int i = 0; i < n; ++i) s += kPieces[rng() % std::size(kPieces)];
  return s;
}

double RandomDouble(std::mt19937_64& rng) {
  switch (rng() % 4) {
    case 0:
      return std::uniform_real_distribution<double>(-1, 1)(rng);
    case 1:
      return std::ldexp(std::uniform_real_distribution<double>(1, 2)(rng),
                        static_cast<int>(rng() % 200) - 100);
    case 2:
      return static_cast<double>(static_cast<std::int64_t>(rng() % 2000) - 1000);
    default:
      return -std::uniform_real_distribution<double>(0, 1e12)(rng);
  }
}

Json RandomJson(std::mt19937_64& rng, int depth) {
  const int kind = static_cast<int>(rng() % (depth > 0 ? 8 : 6));
  switch (kind) {
    case 0:
      return nullptr;
    case 1:
      return rng() % 2 == 0;
    case 2:
      return static_cast<std::int64_t>(rng());
    case 3:
      return rng();
    case 4:
      return RandomDouble(rng);
    case 5:
      return RandomString(rng, 12);
    case 6: {
      Json a = Json::array();
      const int n = static_cast<int>(rng() % 5);
      for (int i = 0; i < n; ++i) a.push_back(RandomJson(rng, depth - 1));
      return a;
    }
    default: {
      Json o = Json::object();
      const int n = static_cast<int>(rng() % 5);
      for (int i = 0; i < n; ++i) o[RandomString(rng, 4)] = RandomJson(rng, depth - 1);
      return o;
    }
  }
}

}  // namespace

// Also used by the acceptance suite for the frame round-trip criterion.
Message RandomMessage(std::mt19937_64& rng) {
  switch (rng() % 7) {
    case 0:
      return Message::Subscribe(RandomString(rng, 6));
    case 1:
      return Message::Publish(RandomString(rng, 6), RandomJson(rng, 3));
    case 2:
      return Message::Deliver(RandomString(rng, 6), rng(), RandomJson(rng, 3));
    case 3:
      return Message::Ack(rng());
    case 4:
      return Message::Ping();
    case 5:
      return Message::Pong();
    default:
      return Message::Failure(RandomString(rng, 10));
  }
}

}  // namespace polisim::fabric
