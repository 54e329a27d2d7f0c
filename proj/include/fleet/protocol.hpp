#pragma once
// Wire frames: one canonical JSON object per line with exactly the fields
// v, type, seq, tick, src, dst, payload.

#include <cstdint>
#include <string>
#include <string_view>

#include "fleet/model.hpp"

namespace fleet::proto {

inline constexpr int kVersion = 1;
inline constexpr const char* kHub = "hub";
inline constexpr const char* kBroadcast = "*";

enum class FrameType {
  HELLO,
  WELCOME,
  TELEMETRY,
  ALERT,
  MISSION_TRIGGER,
  MISSION_STATUS,
  COMMAND,
  DETECTION,
  CORR_REQUEST,
  CORR_VERDICT,
  EVENT,
  ERROR,
  BYE,
};

std::string_view to_string(FrameType t);
/// Throws ProtocolError for a token outside the closed set.
FrameType parse_frame_type(std::string_view s);

struct Frame {
  int v = kVersion;
  FrameType type = FrameType::TELEMETRY;
  std::uint64_t seq = 0;
  Tick tick = 0;
  std::string src;
  std::string dst;
  Json payload = Json::object();

  friend bool operator==(const Frame&, const Frame&) = default;
};

Json frame_to_json(const Frame& f);
/// Strict: exactly the seven fields, v = 1, seq >= 1, payload an object.
Frame frame_from_json(const Json& j);

/// Canonical bytes without the trailing newline.
std::string encode_frame(const Frame& f);
/// Accepts a line with or without the trailing "\n". Throws ProtocolError.
Frame decode_frame(std::string_view line);

/// Numbers outgoing frames of one sender from 1.
class FrameWriter {
 public:
  explicit FrameWriter(std::string src) : src_(std::move(src)) {}

  Frame make(FrameType type, std::string dst, Tick tick, Json payload = Json::object()) {
    return Frame{kVersion, type, ++seq_, tick, src_, std::move(dst), std::move(payload)};
  }
  const std::string& src() const { return src_; }
  std::uint64_t last_seq() const { return seq_; }

 private:
  std::string src_;
  std::uint64_t seq_ = 0;
};

}  // namespace fleet::proto
