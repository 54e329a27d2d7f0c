#pragma once
// Canonical JSON bytes: sorted keys, no insignificant whitespace, UTF-8,
// shortest round-trip decimals. Used for the wire, the log and hashing.

#include <string>
#include <string_view>

#include "fleet/error.hpp"
#include "fleet/model.hpp"

namespace fleet {

/// Throws SerializationError when the value holds a NaN or an infinity.
std::string canonical_serialize(const Json& value);

template <class T>
std::string canonical_serialize(const T& record) {
  Json j;
  to_json(j, record);
  return canonical_serialize(j);
}

/// Parses canonical bytes; throws SerializationError on malformed input.
Json canonical_parse(std::string_view bytes);

template <class T>
T canonical_deserialize(std::string_view bytes) {
  const Json j = canonical_parse(bytes);
  try {
    T out;
    from_json(j, out);
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw SerializationError(e.what());
  }
}

}  // namespace fleet
