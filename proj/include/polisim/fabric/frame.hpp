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

// Wire framing: a 4-byte big-endian unsigned body length followed by that
// many bytes of UTF-8 JSON. The body must be an object with a string "type".
// Bodies longer than 16 MiB are a protocol error.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "polisim/fabric/message.hpp"

namespace polisim::fabric {

inline constexpr std::uint32_t kMaxFrameBytes = 16u * 1024u * 1024u;
inline constexpr std::size_t kFrameHeaderBytes = 4;

// Throws Error(kProtocol) if the encoded body exceeds kMaxFrameBytes.
std::string EncodeFrame(const Message& message);

// Incremental decoder for a byte stream. Feed arbitrary chunks, then drain
// complete messages with Next(). After an exception the decoder is poisoned
// and the connection should be dropped.
class FrameDecoder {
 public:
  void Feed(std::span<const char> bytes);

  // Throws Error(kProtocol) on an oversize length, a body that is not a JSON
  // object with a string "type", or an invalid message.
  std::optional<Message> Next();

  std::size_t buffered() const { return buffer_.size() - offset_; }

 private:
  std::string buffer_;
  std::size_t offset_ = 0;
};

}  // namespace polisim::fabric
