#pragma once
// Shared fixtures for the unit suites and the acceptance binary.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fleet/model.hpp"
#include "fleet/protocol.hpp"
#include "fleet/world.hpp"

namespace fleet::testing {

inline std::string source_path(const std::string& rel) { return std::string(FLEET_SOURCE_DIR) + "/" + rel; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fleet-tests-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline PlatformDescriptor quadruped(const std::string& id = "Q1", double range = 20.0, double fov = 1.2) {
  return {id, PlatformKind::quadruped, quadruped_camera_ring(range, fov), true, false, 1.0};
}

inline PlatformDescriptor wheeled(const std::string& id = "W1") {
  return {id, PlatformKind::wheeled, {{"front", 0.0, 1.2, 10.0}}, false, true, 0.5};
}

inline PlatformDescriptor aerial(const std::string& id = "A1") {
  return {id,
          PlatformKind::aerial,
          {{"down-front", 0.0, std::numbers::pi, 15.0}, {"down-back", std::numbers::pi, std::numbers::pi, 15.0}},
          false,
          false,
          2.0};
}

inline PlatformDescriptor fixed_camera(const std::string& id = "CAM1") {
  return {id, PlatformKind::fixed_camera, {{"lens", 0.0, 1.5, 25.0}}, false, false, 0.0};
}

inline PlatformDescriptor human(const std::string& id = "operator") {
  return {id, PlatformKind::human_operator, {}, false, false, 0.0};
}

inline sim::AgentBody body(PlatformDescriptor d, Pose2D pose, double level = 1.0, double drain = 0.0) {
  sim::AgentBody b;
  b.descriptor = std::move(d);
  b.pose = pose;
  b.battery.level = level;
  b.battery.drain_rate = drain;
  return b;
}

inline sim::WorldObject box(const std::string& id, Point at) {
  return {id, TargetClass::battery_box, Pose2D(at.x, at.y, 0.0), std::nullopt};
}

/// Seeded generators for the property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
  }
  bool coin() { return integer(0, 1) == 1; }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(v.size()) - 1))];
  }
  std::string word(std::size_t max_len = 8) {
    static const std::string alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJ0123456789-_ \"\\/\xc3\xa9";
    std::string s;
    const auto n = static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(max_len)));
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(alphabet.size()) - 2));
      // Keep the two-byte UTF-8 sequence intact.
      if (alphabet[k] == '\xc3') {
        s += "\xc3\xa9";
      } else {
        s += alphabet[k];
      }
    }
    return s;
  }
  /// Arbitrary JSON value of bounded depth with finite numbers only.
  Json value(int depth = 3) {
    switch (integer(0, depth > 0 ? 7 : 4)) {
      case 0:
        return nullptr;
      case 1:
        return coin();
      case 2:
        return integer(-1'000'000'000, 1'000'000'000);
      case 3:
        return real(-1e6, 1e6);
      case 4:
        return word();
      case 5:
      case 6: {
        Json o = Json::object();
        for (auto n = integer(0, 4); n > 0; --n) o[word(6)] = value(depth - 1);
        return o;
      }
      default: {
        Json a = Json::array();
        for (auto n = integer(0, 4); n > 0; --n) a.push_back(value(depth - 1));
        return a;
      }
    }
  }
  proto::Frame frame() {
    static const std::vector<proto::FrameType> types{
        proto::FrameType::HELLO,         proto::FrameType::WELCOME,        proto::FrameType::TELEMETRY,
        proto::FrameType::ALERT,         proto::FrameType::MISSION_TRIGGER, proto::FrameType::MISSION_STATUS,
        proto::FrameType::COMMAND,       proto::FrameType::DETECTION,      proto::FrameType::CORR_REQUEST,
        proto::FrameType::CORR_VERDICT,  proto::FrameType::EVENT,          proto::FrameType::ERROR,
        proto::FrameType::BYE};
    proto::Frame f;
    f.type = pick(types);
    f.seq = static_cast<std::uint64_t>(integer(1, 1'000'000));
    f.tick = static_cast<Tick>(integer(0, 1'000'000));
    f.src = "a" + word(6);
    f.dst = coin() ? std::string("hub") : "b" + word(6);
    f.payload = Json::object();
    for (auto n = integer(0, 5); n > 0; --n) f.payload[word(6)] = value(2);
    return f;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace fleet::testing
