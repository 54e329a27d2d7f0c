#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fleet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SerializationError : public Error {
 public:
  using Error::Error;
};

class ClassificationError : public Error {
 public:
  using Error::Error;
};

class PerceptionError : public Error {
 public:
  using Error::Error;
};

class NoPathError : public Error {
 public:
  using Error::Error;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

class TriggerRejected : public Error {
 public:
  using Error::Error;
};

class CorroborationRejected : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Raised while reading a log; `offset` is the zero-based line index.
class LogError : public Error {
 public:
  LogError(std::size_t offset, const std::string& what)
      : Error("line " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace fleet
