#include "fleet/canonical.hpp"

#include <cmath>

namespace fleet {
namespace {

void require_finite(const Json& j) {
  switch (j.type()) {
    case Json::value_t::number_float:
      if (!std::isfinite(j.get<double>())) {
        throw SerializationError("non-finite number");
      }
      break;
    case Json::value_t::object:
    case Json::value_t::array:
      for (const auto& child : j) require_finite(child);
      break;
    default:
      break;
  }
}

}  // namespace

std::string canonical_serialize(const Json& value) {
  require_finite(value);
  try {
    return value.dump(-1, ' ', false, Json::error_handler_t::strict);
  } catch (const nlohmann::json::exception& e) {
    throw SerializationError(e.what());
  }
}

Json canonical_parse(std::string_view bytes) {
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw SerializationError(e.what());
  }
}

}  // namespace fleet
