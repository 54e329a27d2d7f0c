#pragma once
// Offline audit of an event log against the published invariants.

#include <optional>
#include <string>
#include <vector>

namespace fleet {

struct Violation {
  std::size_t offset = 0;  // zero-based line; equals the line count for whole-log findings
  std::string kind;        // hash, format, seq gap, tick order, state machine, threshold gate,
                           // placement geometry, corroboration, c3 order, truncated
  std::string detail;
};

struct VerifyResult {
  std::size_t lines = 0;
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(const std::string& kind) const;
};

/// `digest` is the expected SHA-256 hex of the log; nullopt reports a missing digest.
VerifyResult verify_lines(const std::vector<std::string>& lines, const std::optional<std::string>& digest);

/// Reads the log and its side-car digest. Throws Error when the log is unreadable.
VerifyResult verify_log(const std::string& path);

}  // namespace fleet
