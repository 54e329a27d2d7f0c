#pragma once
// Network endpoints of a live hub: newline-delimited frames over TCP, the
// same frames over WebSocket at /ws, and GET /snapshot over HTTP. Everything
// runs on one io_context thread; the simulation tick is a timer on it.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fleet/runner.hpp"

namespace fleet::net {

struct ServeOptions {
  std::string bind = "127.0.0.1";
  std::uint16_t http_port = 8080;             // 0 picks a free port
  std::optional<std::uint16_t> tcp_port;      // raw line protocol; 0 picks a free port
  double speed = 1.0;                         // 0 ticks as fast as possible
  std::optional<Tick> max_ticks;
  bool stop_when_done = false;
  bool handle_signals = false;                // SIGINT/SIGTERM stop the server
};

class Server {
 public:
  Server(Simulation& sim, ServeOptions options);
  ~Server();

  std::uint16_t http_port() const;
  std::optional<std::uint16_t> tcp_port() const;
  /// Blocks until stop() or the tick limit.
  void run();
  /// Safe to call from any thread.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Waits for one WebSocket client on `port`, then sends each line as a text
/// message through `produce` (which calls the sink once per line).
void serve_lines_over_websocket(const std::string& bind, std::uint16_t port,
                                const std::function<void(const std::function<void(const std::string&)>&)>& produce);

}  // namespace fleet::net
