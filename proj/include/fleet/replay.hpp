#pragma once
// Timed re-emission of a verified log.

#include <functional>
#include <string>

#include "fleet/verify.hpp"

namespace fleet {

using LineSink = std::function<void(const std::string&)>;

/// Verifies `path` first; only a clean log is re-emitted, byte for byte, in
/// order. Lines are paced by their tick difference * tick_dt / speed; speed
/// 0 emits as fast as possible.
VerifyResult replay(const std::string& path, double speed, const LineSink& sink);

}  // namespace fleet
