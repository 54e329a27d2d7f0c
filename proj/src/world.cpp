#include "fleet/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>

#include "fleet/error.hpp"

namespace fleet::sim {
namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t fnv1a(std::uint64_t h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double jitter(const WorldState& w, const std::string& agent, const std::string& camera,
              const std::string& target) {
  std::uint64_t h = 1469598103934665603ULL ^ w.rng_seed;
  h = fnv1a(h, std::to_string(w.tick));
  h = fnv1a(h, agent);
  h = fnv1a(h, camera);
  h = fnv1a(h, target);
  std::mt19937_64 rng(h);
  std::uniform_real_distribution<double> dist(-w.params.perception_jitter, w.params.perception_jitter);
  return dist(rng);
}

bool blocked(const WorldState& w, Point a, Point b) {
  return std::any_of(w.obstacles.begin(), w.obstacles.end(),
                     [&](const Rect& r) { return segment_hits_interior(a, b, r); });
}

Point step_toward(Point from, Point to, double max_step) {
  const Point d = to - from;
  const double len = norm(d);
  if (len <= max_step || len == 0.0) return to;
  return from + d * (max_step / len);
}

}  // namespace

const AgentBody* WorldState::find_agent(const std::string& id) const {
  auto it = agents.find(id);
  return it == agents.end() ? nullptr : &it->second;
}

const WorldObject* WorldState::find_object(const std::string& id) const {
  auto it = objects.find(id);
  return it == objects.end() ? nullptr : &it->second;
}

const std::string& command_agent(const Command& c) {
  return std::visit([](const auto& cmd) -> const std::string& { return cmd.agent_id; }, c);
}

StepResult step(const WorldState& world, const std::vector<Command>& commands) {
  StepResult result{world, {}};
  WorldState& w = result.world;
  w.tick = world.tick + 1;
  const double dt = w.tick_dt;
  std::set<std::string> moved;

  auto reject = [&](std::size_t i, const std::string& agent, std::string msg) {
    result.errors.push_back({i, agent, std::move(msg)});
  };

  for (std::size_t i = 0; i < commands.size(); ++i) {
    const Command& cmd = commands[i];
    const std::string& id = command_agent(cmd);
    auto it = w.agents.find(id);
    if (it == w.agents.end()) {
      reject(i, id, "unknown agent");
      continue;
    }
    AgentBody& body = it->second;
    // Motion permission is decided on the battery level at the start of the tick.
    const bool immobile = world.agents.at(id).battery.immobilized();
    const double max_step = body.descriptor.max_speed * dt;

    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, Forward> || std::is_same_v<T, MoveTo> ||
                        std::is_same_v<T, Face>) {
            if (immobile) {
              reject(i, id, "immobilized");
              return;
            }
            if (!moved.insert(id).second) {
              reject(i, id, "motion already applied this tick");
              return;
            }
            if constexpr (std::is_same_v<T, Forward>) {
              const double s = std::clamp(c.speed_fraction, -1.0, 1.0) * max_step;
              body.pose = Pose2D(body.pose.x + s * std::cos(body.pose.heading),
                                 body.pose.y + s * std::sin(body.pose.heading), body.pose.heading);
            } else if constexpr (std::is_same_v<T, MoveTo>) {
              const Point here = body.pose.position();
              const Point d = c.target - here;
              double heading = body.pose.heading;
              if (norm(d) > 1e-12) heading = std::atan2(d.y, d.x);
              const Point next = step_toward(here, c.target, max_step);
              body.pose = Pose2D(next.x, next.y, heading);
            } else {
              body.pose = Pose2D(body.pose.x, body.pose.y, c.heading);
            }
          } else if constexpr (std::is_same_v<T, SyncPose>) {
            body.pose = c.pose;
          } else if constexpr (std::is_same_v<T, Grasp>) {
            auto obj = w.objects.find(c.object_id);
            if (!body.descriptor.has_manipulator) {
              reject(i, id, "no manipulator");
            } else if (body.carrying) {
              reject(i, id, "already carrying");
            } else if (obj == w.objects.end()) {
              reject(i, id, "unknown object");
            } else if (obj->second.carried_by) {
              reject(i, id, "object already carried");
            } else if (distance(body.pose.position(), obj->second.pose.position()) >
                       w.params.grasp_reach) {
              reject(i, id, "out of reach");
            } else {
              body.carrying = c.object_id;
              obj->second.carried_by = id;
            }
          } else if constexpr (std::is_same_v<T, Release>) {
            if (!body.carrying) {
              reject(i, id, "not carrying");
            } else if (distance(body.pose.position(), c.at) > w.params.grasp_reach) {
              reject(i, id, "release point out of reach");
            } else {
              WorldObject& obj = w.objects.at(*body.carrying);
              obj.carried_by.reset();
              obj.pose = Pose2D(c.at.x, c.at.y, body.pose.heading);
              body.carrying.reset();
            }
          } else if constexpr (std::is_same_v<T, SwapBattery>) {
            auto obj = w.objects.find(c.object_id);
            if (!body.descriptor.battery_capable) {
              reject(i, id, "not battery capable");
            } else if (obj == w.objects.end() || obj->second.object_class != TargetClass::battery_box) {
              reject(i, id, "unknown battery");
            } else if (obj->second.carried_by) {
              reject(i, id, "battery still carried");
            } else if (distance(body.pose.position(), obj->second.pose.position()) >
                       w.params.swap_radius) {
              reject(i, id, "battery out of swap radius");
            } else {
              body.battery.level = 1.0;
              w.objects.erase(obj);
            }
          }
        },
        cmd);
  }

  for (auto& [id, body] : w.agents) {
    body.battery.level = std::max(0.0, body.battery.level - body.battery.drain_rate * dt);
  }
  for (auto& [id, obj] : w.objects) {
    if (obj.carried_by) obj.pose = w.agents.at(*obj.carried_by).pose;
  }
  return result;
}

double detection_confidence(double range, double max_range) {
  return std::clamp(1.0 - range / max_range, 0.0, 1.0);
}

std::optional<Sighting> sight(const WorldState& world, const AgentBody& observer,
                              const CameraSpec& camera, Point target) {
  const Point origin = observer.pose.position();
  const Point d = target - origin;
  const double range = norm(d);
  if (range > camera.max_range) return std::nullopt;
  const double bearing_world = range > 0.0 ? std::atan2(d.y, d.x) : observer.pose.heading;
  const double axis = observer.pose.heading + camera.mount_bearing;
  if (std::abs(normalize_angle(bearing_world - axis)) > camera.fov / 2.0 + 1e-12) return std::nullopt;
  if (blocked(world, origin, target)) return std::nullopt;
  return Sighting{range, normalize_angle(bearing_world - observer.pose.heading)};
}

bool can_see(const WorldState& world, const std::string& observer_id, Point target) {
  const AgentBody* observer = world.find_agent(observer_id);
  if (!observer) return false;
  return std::any_of(observer->descriptor.cameras.begin(), observer->descriptor.cameras.end(),
                     [&](const CameraSpec& c) { return sight(world, *observer, c, target).has_value(); });
}

std::vector<Detection> perceive(const WorldState& world, const std::string& agent_id,
                                const std::string& camera_id) {
  const AgentBody* body = world.find_agent(agent_id);
  if (!body) throw PerceptionError("unknown agent '" + agent_id + "'");
  const CameraSpec* cam = body->descriptor.find_camera(camera_id);
  if (!cam) throw PerceptionError("agent '" + agent_id + "' has no camera '" + camera_id + "'");

  std::vector<Detection> out;
  auto consider = [&](TargetClass cls, const std::string& target_id, Point where) {
    auto s = sight(world, *body, *cam, where);
    if (!s) return;
    double conf = detection_confidence(s->range, cam->max_range);
    if (world.params.perception_jitter > 0.0) {
      conf = std::clamp(conf + jitter(world, agent_id, camera_id, target_id), 0.0, 1.0);
    }
    out.push_back({cls, target_id, conf, s->range, s->bearing, camera_id, world.tick});
  };
  for (const auto& [id, obj] : world.objects) {
    if (obj.carried_by) continue;
    consider(obj.object_class, id, obj.pose.position());
  }
  for (const auto& [id, other] : world.agents) {
    if (id == agent_id || other.descriptor.kind != PlatformKind::wheeled) continue;
    consider(TargetClass::wheeled_platform, id, other.pose.position());
  }
  std::sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.range != b.range) return a.range < b.range;
    return a.target_id < b.target_id;
  });
  return out;
}

std::vector<Point> plan_path(const WorldState& world, const Pose2D& from, Point to) {
  const Point start = from.position();
  for (const Rect& r : world.obstacles) {
    if (r.contains_strict(to)) throw NoPathError("target inside obstacle");
    if (r.contains_strict(start)) throw NoPathError("start inside obstacle");
  }
  if (!blocked(world, start, to)) return {to};

  std::vector<Point> nodes{start, to};
  const double margin = world.params.agent_radius + 1e-6;
  for (const Rect& r : world.obstacles) {
    const Rect g = r.inflated(margin);
    for (Point c : {g.min, Point{g.max.x, g.min.y}, g.max, Point{g.min.x, g.max.y}}) {
      if (!world.bounds.contains(c)) continue;
      const bool inside = std::any_of(world.obstacles.begin(), world.obstacles.end(),
                                      [&](const Rect& o) { return o.contains(c); });
      if (!inside) nodes.push_back(c);
    }
  }

  // Dijkstra over the visibility graph.
  const std::size_t n = nodes.size();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> prev(n, n);
  std::vector<bool> done(n, false);
  dist[0] = 0.0;
  for (std::size_t iter = 0; iter < n; ++iter) {
    std::size_t u = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!done[i] && (u == n || dist[i] < dist[u])) u = i;
    }
    if (u == n || !std::isfinite(dist[u])) break;
    if (u == 1) break;
    done[u] = true;
    for (std::size_t v = 0; v < n; ++v) {
      if (done[v] || v == u) continue;
      if (blocked(world, nodes[u], nodes[v])) continue;
      const double alt = dist[u] + distance(nodes[u], nodes[v]);
      if (alt < dist[v]) {
        dist[v] = alt;
        prev[v] = u;
      }
    }
  }
  if (!std::isfinite(dist[1])) throw NoPathError("no obstacle-free path");

  std::vector<Point> path;
  for (std::size_t v = 1; v != 0; v = prev[v]) path.push_back(nodes[v]);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<Point> trace_circle(Point center, double radius, int n_samples) {
  if (n_samples < 3) throw std::invalid_argument("trace_circle needs at least 3 samples");
  if (!(radius > 0.0)) throw std::invalid_argument("trace_circle radius must be positive");
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) {
    const double a = 2.0 * kPi * k / n_samples;
    out.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
  }
  return out;
}

std::vector<Point> trace_square(const Pose2D& origin, double side) {
  if (!(side > 0.0)) throw std::invalid_argument("trace_square side must be positive");
  const Point o = origin.position();
  std::vector<Point> out;
  for (Point local : {Point{side, 0.0}, Point{side, side}, Point{0.0, side}, Point{0.0, 0.0}}) {
    out.push_back(o + rotate(local, origin.heading));
  }
  return out;
}

void to_json(Json& j, const AgentBody& v) {
  j = Json{{"descriptor", v.descriptor}, {"pose", v.pose}, {"battery", v.battery}};
  j["carrying"] = v.carrying ? Json(*v.carrying) : Json(nullptr);
}

void from_json(const Json& j, AgentBody& v) {
  v.descriptor = j.at("descriptor").get<PlatformDescriptor>();
  v.pose = j.at("pose").get<Pose2D>();
  v.battery = j.at("battery").get<BatteryState>();
  v.carrying.reset();
  if (j.contains("carrying") && !j.at("carrying").is_null()) v.carrying = j.at("carrying").get<std::string>();
}

void to_json(Json& j, const WorldObject& v) {
  j = Json{{"object_id", v.object_id}, {"class", to_string(v.object_class)}, {"pose", v.pose}};
  j["carried_by"] = v.carried_by ? Json(*v.carried_by) : Json(nullptr);
}

void from_json(const Json& j, WorldObject& v) {
  v.object_id = j.at("object_id").get<std::string>();
  v.object_class = parse_target_class(j.at("class").get<std::string>());
  v.pose = j.at("pose").get<Pose2D>();
  v.carried_by.reset();
  if (j.contains("carried_by") && !j.at("carried_by").is_null()) {
    v.carried_by = j.at("carried_by").get<std::string>();
  }
}

void to_json(Json& j, const WorldState& v) {
  j = Json{{"tick", v.tick},
           {"tick_dt", v.tick_dt},
           {"bounds", v.bounds},
           {"agents", v.agents},
           {"objects", v.objects},
           {"obstacles", v.obstacles},
           {"rng_seed", v.rng_seed},
           {"params",
            {{"grasp_reach", v.params.grasp_reach},
             {"swap_radius", v.params.swap_radius},
             {"agent_radius", v.params.agent_radius},
             {"perception_jitter", v.params.perception_jitter}}}};
}

void from_json(const Json& j, WorldState& v) {
  v.tick = j.at("tick").get<Tick>();
  v.tick_dt = j.at("tick_dt").get<double>();
  v.bounds = j.at("bounds").get<Rect>();
  v.agents = j.at("agents").get<std::map<std::string, AgentBody>>();
  v.objects = j.at("objects").get<std::map<std::string, WorldObject>>();
  v.obstacles = j.at("obstacles").get<std::vector<Rect>>();
  v.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  const Json& p = j.at("params");
  v.params.grasp_reach = p.at("grasp_reach").get<double>();
  v.params.swap_radius = p.at("swap_radius").get<double>();
  v.params.agent_radius = p.at("agent_radius").get<double>();
  v.params.perception_jitter = p.at("perception_jitter").get<double>();
}

}  // namespace fleet::sim
