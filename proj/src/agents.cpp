#include "fleet/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fleet/error.hpp"

namespace fleet::agents {

using proto::Frame;
using proto::FrameType;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kArrived = 1e-9;

Point heading_vector(double h) { return {std::cos(h), std::sin(h)}; }

bool better(const Detection& a, const Detection& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.range != b.range) return a.range < b.range;
  return a.target_id < b.target_id;
}

bool is_terminal_state(const std::string& s) {
  return s == "Completed" || s == "Unverified" || s == "Aborted";
}

/// Verdict of an observer on a corroboration subject: can it see the agent now?
Verdict observe(const sim::WorldState& world, const std::string& observer, const Json& request) {
  const std::string subject = request.value("subject", Json::object()).value("agent", "");
  const sim::AgentBody* target = world.find_agent(subject);
  if (!target) return Verdict::denied;
  return sim::can_see(world, observer, target->pose.position()) ? Verdict::confirmed : Verdict::denied;
}

}  // namespace

// ---------------------------------------------------------------------------

Controller::Controller(PlatformDescriptor descriptor)
    : descriptor_(std::move(descriptor)), writer_(descriptor_.agent_id) {}

Frame Controller::hello(const sim::WorldState& world) {
  Json payload{{"descriptor", descriptor_}};
  if (const auto* b = body(world)) {
    payload["pose"] = b->pose;
    payload["battery"] = b->battery;
  }
  return writer_.make(FrameType::HELLO, proto::kHub, world.tick, std::move(payload));
}

Output Controller::step(const sim::WorldState& world, const std::vector<Frame>& inbox) {
  Output out;
  if (closed_) return out;
  for (const Frame& f : inbox) {
    if (f.type == FrameType::WELCOME) {
      welcomed_ = true;
      telemetry_every_ = f.payload.value("telemetry_every", telemetry_every_);
      detection_threshold_ = f.payload.value("detection_threshold", detection_threshold_);
      continue;
    }
    if ((f.type == FrameType::ERROR && f.payload.value("closed", false)) ||
        (f.type == FrameType::BYE && f.src == proto::kHub)) {
      closed_ = true;
      return out;
    }
    on_frame(world, f, out);
  }
  if (!welcomed_) return out;
  on_tick(world, out);
  if (telemetry_every_ > 0 && world.tick % telemetry_every_ == 0) {
    send(out, world, FrameType::TELEMETRY, proto::kHub, telemetry(world));
  }
  return out;
}

Json Controller::telemetry(const sim::WorldState& world) {
  const auto* b = body(world);
  if (!b) return Json::object();
  return Json{{"pose", b->pose},
              {"battery", b->battery},
              {"immobilized", b->battery.immobilized()},
              {"carrying", b->carrying ? Json(*b->carrying) : Json(nullptr)}};
}

void Controller::send(Output& out, const sim::WorldState& world, FrameType type, const std::string& dst,
                      Json payload) {
  out.frames.push_back(writer_.make(type, dst, world.tick, std::move(payload)));
}

void Controller::status(Output& out, const sim::WorldState& world, const std::string& mission_id,
                        const std::string& event, Json evidence) {
  evidence["event"] = event;
  if (!mission_id.empty()) evidence["mission_id"] = mission_id;
  send(out, world, FrameType::MISSION_STATUS, proto::kHub, std::move(evidence));
}

// ---------------------------------------------------------------------------
// Quadruped: systems check, waypoint route, search, grasp and deliver.

namespace {

class Quadruped final : public Controller {
 public:
  Quadruped(PlatformDescriptor d, QuadrupedParams p) : Controller(std::move(d)), p_(std::move(p)) {}

 protected:
  enum class Mode { idle, stand, trace, route, scan, approach, grasp, deliver, release };

  void on_frame(const sim::WorldState& world, const Frame& f, Output& out) override {
    if (f.type != FrameType::COMMAND || f.src != proto::kHub) return;
    const std::string verb = f.payload.value("verb", "");
    const std::string mission = f.payload.value("mission_id", "");
    const auto* b = body(world);
    if (!b) return;
    mission_ = mission;
    phase_ = 0;
    if (verb == "hold") {
      mode_ = Mode::idle;
    } else if (verb == "stand") {
      mode_ = Mode::stand;
    } else if (verb == "unstow") {
      mode_ = Mode::idle;
      status(out, world, mission_, "arm_unstowed");
    } else if (verb == "trace") {
      start_trace(world, *b, f.payload, out);
    } else if (verb == "goto") {
      waypoints_.clear();
      for (const auto& w : f.payload.at("waypoints")) waypoints_.push_back(w.get<Point>());
      waypoint_ = 0;
      mode_ = Mode::route;
      status(out, world, mission_, "route_started");
    } else if (verb == "scan") {
      want_ = parse_target_class(f.payload.value("target_class", "battery_box"));
      want_id_ = f.payload.contains("target_id") ? std::optional(f.payload["target_id"].get<std::string>())
                                                 : std::nullopt;
      rotations_ = 0;
      roaming_ = false;
      mode_ = Mode::scan;
    } else if (verb == "approach") {
      object_ = f.payload.value("target_id", "");
      attempts_ = 0;
      mode_ = Mode::approach;
    } else if (verb == "grasp") {
      object_ = f.payload.value("object_id", object_);
      // The first attempt is made from where the approach stopped; retries
      // close in again first.
      phase_ = attempts_++ == 0 ? 1 : 0;
      mode_ = Mode::grasp;
    } else if (verb == "deliver") {
      partner_ = f.payload.value("partner_id", "");
      offset_ = f.payload.value("offset", 2.0);
      if (const auto* partner = world.find_agent(partner_)) partner_start_ = partner->pose;
      unseen_ = 0;
      mode_ = Mode::deliver;
    } else if (verb == "release") {
      partner_ = f.payload.value("partner_id", partner_);
      mode_ = Mode::release;
    }
  }

  void on_tick(const sim::WorldState& world, Output& out) override {
    const auto* b = body(world);
    if (!b || mode_ == Mode::idle) return;
    if (b->battery.immobilized()) {
      status(out, world, mission_, "fault", Json{{"reason", "immobilized"}, {"level", b->battery.level}});
      mode_ = Mode::idle;
      return;
    }
    try {
      switch (mode_) {
        case Mode::idle:
          break;
        case Mode::stand:
          status(out, world, mission_, phase_++ == 0 ? "motors_on" : "stood_up");
          if (phase_ > 1) mode_ = Mode::idle;
          break;
        case Mode::trace:
          tick_trace(world, *b, out);
          break;
        case Mode::route:
          tick_route(world, *b, out);
          break;
        case Mode::scan:
          tick_scan(world, *b, out);
          break;
        case Mode::approach:
          tick_approach(world, *b, out);
          break;
        case Mode::grasp:
          tick_grasp(world, *b, out);
          break;
        case Mode::deliver:
          tick_deliver(world, *b, out);
          break;
        case Mode::release:
          tick_release(world, *b, out);
          break;
      }
    } catch (const NoPathError& e) {
      status(out, world, mission_, "fault", Json{{"reason", std::string("no path: ") + e.what()}});
      mode_ = Mode::idle;
    }
  }

  Json telemetry(const sim::WorldState& world) override {
    Json t = Controller::telemetry(world);
    if (!arm_buffer_.empty()) {
      t["trace"] = Json{{"mission_id", mission_},
                        {"center", center_},
                        {"radius", radius_},
                        {"samples", arm_buffer_}};
      arm_buffer_ = Json::array();
    }
    return t;
  }

 private:
  /// One bounded step along a detour-aware path; true once within `stop` of `goal`.
  bool travel(const sim::WorldState& world, const sim::AgentBody& b, Point goal, double stop, Output& out) {
    if (distance(b.pose.position(), goal) <= stop) return true;
    const auto path = sim::plan_path(world, b.pose, goal);
    out.actuation.push_back(sim::MoveTo{id(), path.front()});
    return false;
  }

  void start_trace(const sim::WorldState& world, const sim::AgentBody& b, const Json& args, Output& out) {
    const double side = args.value("square_side", 1.0);
    radius_ = args.value("circle_radius", 1.0);
    const int n = args.value("samples", 36);
    origin_ = b.pose;
    side_ = side;
    corners_ = sim::trace_square(origin_, side);
    center_ = origin_.position() + rotate(Point{side / 2.0, side / 2.0}, origin_.heading);
    samples_ = sim::trace_circle(center_, radius_, n);
    reached_.clear();
    corner_ = 0;
    next_sample_ = 0;
    arm_buffer_ = Json::array();
    arm_points_.clear();
    mode_ = Mode::trace;
    status(out, world, mission_, "trace_started");
  }

  void tick_trace(const sim::WorldState& world, const sim::AgentBody& b, Output& out) {
    const Point pos = b.pose.position();
    if (corner_ < corners_.size() && distance(pos, corners_[corner_]) < kArrived) {
      reached_.push_back(pos);
      ++corner_;
    }
    double progress = 1.0;
    if (corner_ < corners_.size()) {
      const Point from = corner_ == 0 ? origin_.position() : corners_[corner_ - 1];
      progress = (static_cast<double>(corner_) + std::min(1.0, distance(from, pos) / side_)) / corners_.size();
    }
    // The arm sweeps the circle in step with the body's progress on the square.
    const std::size_t n = samples_.size();
    while (next_sample_ < n && static_cast<double>(next_sample_) / n <= progress + 1e-12) {
      const Point arm = samples_[next_sample_];
      arm_points_.push_back(arm);
      arm_buffer_.push_back(Json{{"index", next_sample_}, {"point", arm}});
      ++next_sample_;
    }
    if (corner_ < corners_.size()) {
      out.actuation.push_back(sim::MoveTo{id(), corners_[corner_]});
      return;
    }
    double radial = 0.0;
    for (const Point& a : arm_points_) radial = std::max(radial, std::abs(distance(a, center_) - radius_));
    double corner_error = 0.0;
    for (std::size_t i = 0; i < corners_.size(); ++i) {
      corner_error = std::max(corner_error, distance(reached_[i], corners_[i]));
    }
    send(out, world, FrameType::TELEMETRY, proto::kHub, telemetry(world));
    Json evidence{{"max_radial_deviation", radial},
                  {"corner_error", corner_error},
                  {"origin", origin_},
                  {"corners", reached_},
                  {"center", center_},
                  {"radius", radius_},
                  {"samples", n}};
    if (radial > p_.trace_tolerance || corner_error > p_.trace_tolerance) {
      evidence["reason"] = "trace tolerance exceeded";
      status(out, world, mission_, "fault", std::move(evidence));
    } else {
      status(out, world, mission_, "trace_done", std::move(evidence));
    }
    mode_ = Mode::idle;
  }

  void tick_route(const sim::WorldState& world, const sim::AgentBody& b, Output& out) {
    const Point goal = waypoints_[waypoint_];
    if (!travel(world, b, goal, kArrived, out)) return;
    status(out, world, mission_, "waypoint_reached", Json{{"waypoint", waypoint_}, {"position", b.pose.position()}});
    if (++waypoint_ == waypoints_.size()) {
      status(out, world, mission_, "route_complete", Json{{"position", b.pose.position()}});
      mode_ = Mode::idle;
    }
  }

  std::optional<Detection> best_detection(const sim::WorldState& world) const {
    std::optional<Detection> best;
    for (const auto& cam : descriptor_.cameras) {
      for (const auto& d : sim::perceive(world, id(), cam.camera_id)) {
        if (d.target_class != want_ || d.confidence < detection_threshold_) continue;
        if (want_id_ && d.target_id != *want_id_) continue;
        if (!best || better(d, *best)) best = d;
      }
    }
    return best;
  }

  void build_lawnmower(const sim::WorldState& world) {
    mower_.clear();
    const double s = p_.lawnmower_spacing;
    const Rect& r = world.bounds;
    bool forward = true;
    for (double y = r.min.y + s / 2.0; y < r.max.y; y += s) {
      const double x0 = r.min.x + s / 2.0;
      const double x1 = r.max.x - s / 2.0;
      mower_.push_back({forward ? x0 : x1, y});
      mower_.push_back({forward ? x1 : x0, y});
      forward = !forward;
    }
    mower_index_ = 0;
  }

  void tick_scan(const sim::WorldState& world, const sim::AgentBody& b, Output& out) {
    if (auto d = best_detection(world)) {
      send(out, world, FrameType::DETECTION, proto::kHub, Json{{"detection", *d}});
      status(out, world, mission_,
             want_ == TargetClass::battery_box ? "battery_detected" : "partner_detected",
             Json{{"detection", *d}});
      mode_ = Mode::idle;
      return;
    }
    if (roaming_) {
      bool arrived = false;
      try {
        arrived = travel(world, b, mower_[mower_index_], kArrived, out);
      } catch (const NoPathError&) {
        arrived = true;
      }
      if (arrived) {
        roaming_ = false;
        rotations_ = 0;
        mower_index_ = (mower_index_ + 1) % mower_.size();
      }
      return;
    }
    if (rotations_ < 8) {
      out.actuation.push_back(sim::Face{id(), b.pose.heading + kPi / 4.0});
      ++rotations_;
      return;
    }
    if (p_.search_pattern != "rotate_then_lawnmower") {
      rotations_ = 0;
      return;
    }
    if (mower_.empty()) build_lawnmower(world);
    if (mower_.empty()) {
      rotations_ = 0;
      return;
    }
    roaming_ = true;
  }

  void tick_approach(const sim::WorldState& world, const sim::AgentBody& b, Output& out) {
    const auto* obj = world.find_object(object_);
    if (!obj || obj->carried_by) {
      status(out, world, mission_, "target_lost", Json{{"object_id", object_}});
      mode_ = Mode::idle;
      return;
    }
    if (travel(world, b, obj->pose.position(), p_.approach_stop, out)) {
      status(out, world, mission_, "reached_box",
             Json{{"object_id", object_}, {"range", distance(b.pose.position(), obj->pose.position())}});
      mode_ = Mode::idle;
    }
  }

  void tick_grasp(const sim::WorldState& world, const sim::AgentBody& b, Output& out) {
    const auto* obj = world.find_object(object_);
    if (phase_ == 2) {
      if (b.carrying && *b.carrying == object_) {
        status(out, world, mission_, "grasp_success", Json{{"object_id", object_}});
      } else {
        const double range = obj ? distance(b.pose.position(), obj->pose.position()) : -1.0;
        status(out, world, mission_, "grasp_fail", Json{{"object_id", object_}, {"range", range}});
      }
      mode_ = Mode::idle;
      return;
    }
    if (phase_ == 0 && obj && !obj->carried_by &&
        !travel(world, b, obj->pose.position(), p_.approach_stop, out)) {
      return;
    }
    out.actuation.push_back(sim::Grasp{id(), object_});
    phase_ = 2;
  }

  Point placement(const sim::AgentBody& partner) const {
    return partner.pose.position() + heading_vector(partner.pose.heading) * offset_;
  }

  void tick_deliver(const sim::WorldState& world, const sim::AgentBody& b, Output& out) {
    const auto* partner = world.find_agent(partner_);
    auto lost = [&](const std::string& why) {
      status(out, world, mission_, "partner_lost", Json{{"partner_id", partner_}, {"reason", why}});
      mode_ = Mode::idle;
    };
    if (!partner) return lost("unknown partner");
    if (distance(partner->pose.position(), partner_start_.position()) > p_.partner_move_tolerance) {
      return lost("partner moved");
    }
    unseen_ = sim::can_see(world, id(), partner->pose.position()) ? 0 : unseen_ + 1;
    if (unseen_ > p_.partner_lost_ticks) return lost("out of perception");
    const Point drop = placement(*partner);
    // Stand just beyond the drop point so the box lands between body and partner.
    const Point stand = drop + heading_vector(partner->pose.heading) * p_.approach_stop;
    if (travel(world, b, stand, kArrived, out)) {
      status(out, world, mission_, "reached_partner",
             Json{{"partner_id", partner_}, {"partner_pose", partner->pose}, {"placement", drop}});
      mode_ = Mode::idle;
    }
  }

  void tick_release(const sim::WorldState& world, const sim::AgentBody& b, Output& out) {
    const auto* partner = world.find_agent(partner_);
    if (phase_ == 0) {
      if (!partner || !b.carrying) {
        status(out, world, mission_, "fault", Json{{"reason", "nothing to release"}});
        mode_ = Mode::idle;
        return;
      }
      box_ = *b.carrying;
      out.actuation.push_back(sim::Release{id(), placement(*partner)});
      phase_ = 1;
      return;
    }
    const auto* obj = world.find_object(box_);
    if (obj && !obj->carried_by && partner) {
      status(out, world, mission_, "placed",
             Json{{"box_id", box_},
                  {"partner_id", partner_},
                  {"partner_pose", partner->pose},
                  {"placement", obj->pose.position()}});
    } else {
      status(out, world, mission_, "fault", Json{{"reason", "release failed"}});
    }
    mode_ = Mode::idle;
  }

  QuadrupedParams p_;
  Mode mode_ = Mode::idle;
  std::string mission_;
  int phase_ = 0;

  Pose2D origin_;
  double side_ = 1.0;
  double radius_ = 1.0;
  Point center_;
  std::vector<Point> corners_, samples_, reached_, arm_points_;
  std::size_t corner_ = 0;
  std::size_t next_sample_ = 0;
  Json arm_buffer_ = Json::array();

  std::vector<Point> waypoints_;
  std::size_t waypoint_ = 0;

  TargetClass want_ = TargetClass::battery_box;
  std::optional<std::string> want_id_;
  int rotations_ = 0;
  bool roaming_ = false;
  std::vector<Point> mower_;
  std::size_t mower_index_ = 0;

  std::string object_;
  int attempts_ = 0;
  std::string partner_;
  double offset_ = 2.0;
  Pose2D partner_start_;
  Tick unseen_ = 0;
  std::string box_;
};

// ---------------------------------------------------------------------------
// Wheeled: patrol, a single low-battery alert, battery swap when a box arrives.

class Wheeled final : public Controller {
 public:
  Wheeled(PlatformDescriptor d, WheeledParams p) : Controller(std::move(d)), p_(std::move(p)) {}

 protected:
  void on_frame(const sim::WorldState&, const Frame&, Output&) override {}

  void on_tick(const sim::WorldState& world, Output& out) override {
    const auto* b = body(world);
    if (!b) return;
    const bool immobile = b->battery.immobilized();
    if (immobile != last_immobile_) {
      last_immobile_ = immobile;
      send(out, world, FrameType::TELEMETRY, proto::kHub, telemetry(world));
    }
    if (swap_issued_) {
      swap_issued_ = false;
      swap_start_.reset();
      if (b->battery.level > b->battery.alert_threshold) {
        alerted_ = false;
        status(out, world, "", "swap_complete", Json{{"object_id", swap_box_}, {"level", b->battery.level}});
      }
    }
    if (!alerted_ && b->battery.level <= b->battery.alert_threshold) {
      alerted_ = true;
      send(out, world, FrameType::ALERT, proto::kHub,
           Json{{"kind", "battery_low"},
                {"level", b->battery.level},
                {"threshold", b->battery.alert_threshold},
                {"pose", b->pose}});
    }
    if (alerted_) {
      tick_swap(world, *b, out);
      return;
    }
    if (p_.patrol.empty() || immobile) return;
    if (distance(b->pose.position(), p_.patrol[patrol_]) < kArrived) patrol_ = (patrol_ + 1) % p_.patrol.size();
    out.actuation.push_back(sim::MoveTo{id(), p_.patrol[patrol_]});
  }

 private:
  void tick_swap(const sim::WorldState& world, const sim::AgentBody& b, Output& out) {
    auto usable = [&](const sim::WorldObject* o) {
      return o && o->object_class == TargetClass::battery_box && !o->carried_by &&
             distance(o->pose.position(), b.pose.position()) <= world.params.swap_radius;
    };
    if (swap_start_ && !usable(world.find_object(swap_box_))) swap_start_.reset();
    if (!swap_start_) {
      for (const auto& [oid, obj] : world.objects) {
        if (usable(&obj)) {
          swap_start_ = world.tick;
          swap_box_ = oid;
          break;
        }
      }
      return;
    }
    if (world.tick - *swap_start_ >= p_.swap_ticks) {
      out.actuation.push_back(sim::SwapBattery{id(), swap_box_});
      swap_issued_ = true;
    }
  }

  WheeledParams p_;
  std::size_t patrol_ = 0;
  bool alerted_ = false;
  bool last_immobile_ = false;
  std::optional<Tick> swap_start_;
  std::string swap_box_;
  bool swap_issued_ = false;
};

// ---------------------------------------------------------------------------
// Corroborating observers.

struct QueuedVerdict {
  Tick due = 0;
  Json request;
};

void answer_requests(Controller& self, std::vector<QueuedVerdict>& queue, const sim::WorldState& world,
                     const std::function<void(Json)>& reply) {
  std::vector<QueuedVerdict> keep;
  for (auto& q : queue) {
    if (q.due > world.tick) {
      keep.push_back(std::move(q));
      continue;
    }
    // Past the deadline the verdict is dropped.
    if (world.tick > q.request.value("deadline_tick", Tick{0})) continue;
    reply(Json{{"request_id", q.request.at("request_id")},
               {"verdict", to_string(observe(world, self.id(), q.request))}});
  }
  queue = std::move(keep);
}

class Aerial final : public Controller {
 public:
  Aerial(PlatformDescriptor d, AerialParams p) : Controller(std::move(d)), p_(p) {}

 protected:
  void on_frame(const sim::WorldState& world, const Frame& f, Output&) override {
    if (f.type == FrameType::CORR_REQUEST) {
      queue_.push_back({world.tick + p_.verdict_delay, f.payload});
    } else if (f.type == FrameType::COMMAND) {
      const std::string verb = f.payload.value("verb", "");
      if (verb == "follow") {
        follow_ = f.payload.value("target", "");
      } else if (verb == "hold") {
        follow_.reset();
      }
    }
  }

  void on_tick(const sim::WorldState& world, Output& out) override {
    answer_requests(*this, queue_, world,
                    [&](Json v) { send(out, world, FrameType::CORR_VERDICT, proto::kHub, std::move(v)); });
    const auto* b = body(world);
    if (!b || !follow_) return;
    const auto* target = world.find_agent(*follow_);
    if (!target) return;
    const Point t = target->pose.position();
    const Point want = t - heading_vector(target->pose.heading) * p_.follow_distance;
    const Point here = b->pose.position();
    if (distance(here, want) > 0.05) {
      out.actuation.push_back(sim::MoveTo{id(), want});
    } else if (distance(here, t) > kArrived) {
      const Point d = t - here;
      out.actuation.push_back(sim::Face{id(), std::atan2(d.y, d.x)});
    }
  }

 private:
  AerialParams p_;
  std::optional<std::string> follow_;
  std::vector<QueuedVerdict> queue_;
};

class FixedCamera final : public Controller {
 public:
  FixedCamera(PlatformDescriptor d, FixedCameraParams p) : Controller(std::move(d)), p_(p) {}

 protected:
  void on_frame(const sim::WorldState& world, const Frame& f, Output&) override {
    if (f.type == FrameType::CORR_REQUEST) queue_.push_back({world.tick + p_.verdict_delay, f.payload});
  }

  void on_tick(const sim::WorldState& world, Output& out) override {
    answer_requests(*this, queue_, world,
                    [&](Json v) { send(out, world, FrameType::CORR_VERDICT, proto::kHub, std::move(v)); });
    // Auto-detection: report each target when it first comes into confident view.
    std::map<std::string, Detection> now;
    for (const auto& cam : descriptor_.cameras) {
      for (const auto& d : sim::perceive(world, id(), cam.camera_id)) {
        if (d.confidence < detection_threshold_) continue;
        auto it = now.find(d.target_id);
        if (it == now.end() || better(d, it->second)) now[d.target_id] = d;
      }
    }
    for (const auto& [tid, d] : now) {
      if (!seen_.contains(tid)) send(out, world, FrameType::DETECTION, proto::kHub, Json{{"detection", d}});
    }
    seen_.clear();
    for (const auto& [tid, d] : now) seen_.insert(tid);
  }

 private:
  FixedCameraParams p_;
  std::vector<QueuedVerdict> queue_;
  std::set<std::string> seen_;
};

}  // namespace

std::unique_ptr<Controller> make_quadruped(PlatformDescriptor d, QuadrupedParams p) {
  return std::make_unique<Quadruped>(std::move(d), std::move(p));
}
std::unique_ptr<Controller> make_wheeled(PlatformDescriptor d, WheeledParams p) {
  return std::make_unique<Wheeled>(std::move(d), std::move(p));
}
std::unique_ptr<Controller> make_aerial(PlatformDescriptor d, AerialParams p) {
  return std::make_unique<Aerial>(std::move(d), p);
}
std::unique_ptr<Controller> make_fixed_camera(PlatformDescriptor d, FixedCameraParams p) {
  return std::make_unique<FixedCamera>(std::move(d), p);
}

// ---------------------------------------------------------------------------

ScriptedOperator::ScriptedOperator(PlatformDescriptor d, OperatorParams p)
    : Controller(std::move(d)), params_(std::move(p)), status_(params_.schedule.size()) {}

bool ScriptedOperator::schedule_settled() const {
  return std::all_of(status_.begin(), status_.end(), [](const EntryStatus& e) {
    return e.state == EntryState::finished || e.state == EntryState::rejected;
  });
}

Json ScriptedOperator::telemetry(const sim::WorldState&) { return Json{{"heartbeat", true}}; }

void ScriptedOperator::on_frame(const sim::WorldState& world, const Frame& f, Output&) {
  switch (f.type) {
    case FrameType::MISSION_STATUS: {
      const std::string mission = f.payload.value("mission_id", "");
      const std::string state = f.payload.value("state", "");
      if (f.payload.value("event", "") == "trigger") {
        const std::string type = f.payload.value("mission_type", "");
        for (std::size_t i = 0; i < status_.size(); ++i) {
          if (status_[i].state == EntryState::sent && to_string(params_.schedule[i].type) == type) {
            status_[i].state = EntryState::running;
            status_[i].mission_id = mission;
            break;
          }
        }
        active_[mission] = f.payload.value("executor", "");
      }
      if (is_terminal_state(state)) {
        active_.erase(mission);
        for (auto& e : status_) {
          if (e.mission_id == mission) e.state = EntryState::finished;
        }
      }
      break;
    }
    case FrameType::ERROR: {
      if (!f.payload.contains("mission_type")) break;
      const std::string type = f.payload.value("mission_type", "");
      const std::string reason = f.payload.value("reason", "");
      for (std::size_t i = 0; i < status_.size(); ++i) {
        auto& e = status_[i];
        if (e.state != EntryState::sent || to_string(params_.schedule[i].type) != type) continue;
        if (reason == "executor busy" || reason == "beneficiary already assisted") {
          e.state = EntryState::waiting;
          e.not_before = world.tick + params_.retry_delay;
        } else {
          e.state = EntryState::rejected;
          e.reason = reason;
        }
        break;
      }
      break;
    }
    case FrameType::EVENT: {
      if (!f.payload.contains("proposal") || !params_.approve_proposals) break;
      const Json& p = f.payload["proposal"];
      if (p.value("status", "") != "pending" || !p.value("feasible", false)) break;
      pending_.push_back({world.tick + params_.approve_delay, FrameType::MISSION_TRIGGER, proto::kHub,
                          Json{{"mission_type", "M3"}, {"proposal_id", p.at("proposal_id")}}});
      break;
    }
    case FrameType::CORR_REQUEST: {
      if (params_.verdict == "ignore") break;
      const Tick deadline = f.payload.value("deadline_tick", Tick{0});
      pending_.push_back({std::min(world.tick + params_.verdict_delay, deadline), FrameType::CORR_VERDICT,
                          proto::kHub,
                          Json{{"request_id", f.payload.at("request_id")}, {"verdict", params_.verdict == "deny" ? "denied" : "confirmed"}}});
      break;
    }
    default:
      break;
  }
}

void ScriptedOperator::on_tick(const sim::WorldState& world, Output& out) {
  for (std::size_t i = 0; i < status_.size(); ++i) {
    auto& e = status_[i];
    const auto& entry = params_.schedule[i];
    if (e.state != EntryState::waiting || world.tick < e.not_before) continue;
    if (entry.at_tick && world.tick < *entry.at_tick) continue;
    if (entry.after) {
      const auto s = status_.at(*entry.after).state;
      if (s != EntryState::finished && s != EntryState::rejected) continue;
    }
    send(out, world, FrameType::MISSION_TRIGGER, proto::kHub,
         Json{{"mission_type", to_string(entry.type)}, {"params", entry.params}});
    e.state = EntryState::sent;
  }
  std::vector<Pending> later;
  for (auto& p : pending_) {
    if (p.due <= world.tick) {
      send(out, world, p.type, p.dst, std::move(p.payload));
    } else {
      later.push_back(std::move(p));
    }
  }
  pending_ = std::move(later);
  if (params_.steer_aerial) steer(world, out);
}

void ScriptedOperator::steer(const sim::WorldState& world, Output& out) {
  std::optional<std::string> aerial;
  for (const auto& [aid, a] : world.agents) {
    if (a.descriptor.kind == PlatformKind::aerial) {
      aerial = aid;
      break;
    }
  }
  if (!aerial) return;
  std::optional<std::string> target;
  if (!active_.empty()) target = active_.begin()->second;
  if (target == following_) return;
  following_ = target;
  if (target) {
    send(out, world, FrameType::COMMAND, *aerial, Json{{"verb", "follow"}, {"target", *target}});
  } else {
    send(out, world, FrameType::COMMAND, *aerial, Json{{"verb", "hold"}});
  }
}

}  // namespace fleet::agents
