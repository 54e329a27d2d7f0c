#include "fleet/replay.hpp"

#include <chrono>
#include <thread>

#include "fleet/event_log.hpp"
#include "fleet/protocol.hpp"

namespace fleet {

VerifyResult replay(const std::string& path, double speed, const LineSink& sink) {
  VerifyResult v = verify_log(path);
  if (!v.ok()) return v;
  const auto lines = read_lines(path);
  double tick_dt = 0.1;
  Tick prev = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto f = proto::decode_frame(lines[i]);
    if (i == 0) tick_dt = f.payload.at("config").value("tick_dt", tick_dt);
    if (speed > 0 && f.tick > prev) {
      std::this_thread::sleep_for(std::chrono::duration<double>(static_cast<double>(f.tick - prev) * tick_dt / speed));
    }
    prev = f.tick;
    sink(lines[i]);
  }
  return v;
}

}  // namespace fleet
