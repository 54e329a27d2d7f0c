#pragma once
// Append-only JSONL log with a running SHA-256 over the concatenated lines.

#include <cstddef>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fleet/model.hpp"

namespace fleet {

class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256& other);
  Sha256& operator=(const Sha256& other);

  void update(std::string_view data);
  /// Hex digest of everything fed so far; the running state is kept.
  std::string hex() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string sha256_hex(std::string_view data);

/// Side-car file holding the final digest of `log_path`.
std::string digest_path(const std::string& log_path);

class EventLog {
 public:
  /// In-memory log.
  EventLog() = default;
  /// Log mirrored to `path` (truncated on open). Throws Error when the file
  /// cannot be opened.
  explicit EventLog(std::string path);

  /// Appends one canonical record and returns its zero-based offset. Storage
  /// failures throw Error.
  std::size_t append(const Json& record);
  std::size_t append_line(std::string line);

  const std::vector<std::string>& lines() const { return lines_; }
  std::size_t size() const { return lines_.size(); }
  std::string digest() const { return hash_.hex(); }
  const std::optional<std::string>& path() const { return path_; }

  /// Flushes and writes the side-car digest file.
  void finalize();

 private:
  std::optional<std::string> path_;
  std::ofstream out_;
  std::vector<std::string> lines_;
  Sha256 hash_;
};

std::vector<std::string> read_lines(const std::string& path);

}  // namespace fleet
