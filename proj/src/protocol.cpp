#include "fleet/protocol.hpp"

#include <array>

#include "fleet/canonical.hpp"
#include "fleet/error.hpp"

namespace fleet::proto {
namespace {

constexpr std::array<std::pair<FrameType, std::string_view>, 13> kTypes{{
    {FrameType::HELLO, "HELLO"},
    {FrameType::WELCOME, "WELCOME"},
    {FrameType::TELEMETRY, "TELEMETRY"},
    {FrameType::ALERT, "ALERT"},
    {FrameType::MISSION_TRIGGER, "MISSION_TRIGGER"},
    {FrameType::MISSION_STATUS, "MISSION_STATUS"},
    {FrameType::COMMAND, "COMMAND"},
    {FrameType::DETECTION, "DETECTION"},
    {FrameType::CORR_REQUEST, "CORR_REQUEST"},
    {FrameType::CORR_VERDICT, "CORR_VERDICT"},
    {FrameType::EVENT, "EVENT"},
    {FrameType::ERROR, "ERROR"},
    {FrameType::BYE, "BYE"},
}};

}  // namespace

std::string_view to_string(FrameType t) {
  for (const auto& [type, name] : kTypes) {
    if (type == t) return name;
  }
  return "?";
}

FrameType parse_frame_type(std::string_view s) {
  for (const auto& [type, name] : kTypes) {
    if (name == s) return type;
  }
  throw ProtocolError("unknown frame type '" + std::string(s) + "'");
}

Json frame_to_json(const Frame& f) {
  return Json{{"v", f.v},       {"type", to_string(f.type)}, {"seq", f.seq}, {"tick", f.tick},
              {"src", f.src},   {"dst", f.dst},             {"payload", f.payload}};
}

Frame frame_from_json(const Json& j) {
  if (!j.is_object()) throw ProtocolError("frame must be an object");
  if (j.size() != 7) throw ProtocolError("frame must have exactly 7 fields");
  for (const char* key : {"v", "type", "seq", "tick", "src", "dst", "payload"}) {
    if (!j.contains(key)) throw ProtocolError(std::string("missing field '") + key + "'");
  }
  const Json& v = j["v"];
  if (!v.is_number_integer() || v.get<std::int64_t>() != kVersion) throw ProtocolError("unsupported version");
  if (!j["type"].is_string()) throw ProtocolError("type must be a string");
  if (!j["seq"].is_number_unsigned() || j["seq"].get<std::uint64_t>() == 0) {
    throw ProtocolError("seq must be a positive integer");
  }
  if (!j["tick"].is_number_unsigned()) throw ProtocolError("tick must be a non-negative integer");
  if (!j["src"].is_string() || j["src"].get<std::string>().empty()) throw ProtocolError("src must be a string");
  if (!j["dst"].is_string() || j["dst"].get<std::string>().empty()) throw ProtocolError("dst must be a string");
  if (!j["payload"].is_object()) throw ProtocolError("payload must be an object");

  Frame f;
  f.v = kVersion;
  f.type = parse_frame_type(j["type"].get<std::string>());
  f.seq = j["seq"].get<std::uint64_t>();
  f.tick = j["tick"].get<Tick>();
  f.src = j["src"].get<std::string>();
  f.dst = j["dst"].get<std::string>();
  f.payload = j["payload"];
  return f;
}

std::string encode_frame(const Frame& f) { return canonical_serialize(frame_to_json(f)); }

Frame decode_frame(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  Json j;
  try {
    j = canonical_parse(line);
  } catch (const SerializationError& e) {
    throw ProtocolError(std::string("malformed frame: ") + e.what());
  }
  return frame_from_json(j);
}

}  // namespace fleet::proto
