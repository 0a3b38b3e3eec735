#include "roadsearch/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace roadsearch::sim {

using geometry::cross;
using geometry::distance;
using geometry::dot;
using geometry::lerp;

namespace {

// Clipping round-off below this many percent is reported as exactly 0 / 100.
constexpr double kPercentSnap = 1e-9;

bool finite(const VehicleState& s) {
  return std::isfinite(s.position.x) && std::isfinite(s.position.y) && std::isfinite(s.heading) &&
         std::isfinite(s.steer) && std::isfinite(s.time);
}

}  // namespace

void VehicleParams::check() const {
  if (!(wheelbase > 0.0)) throw DomainError("vehicle.wheelbase must be > 0");
  if (!(width > 0.0)) throw DomainError("vehicle.width must be > 0");
  if (!(length > 0.0)) throw DomainError("vehicle.length must be > 0");
  if (!(speed > 0.0)) throw DomainError("vehicle.speed must be > 0");
  if (!(max_steer > 0.0 && max_steer < std::numbers::pi / 2)) {
    throw DomainError("vehicle.max_steer must lie in (0, pi/2)");
  }
  if (!(lookahead > 0.0)) throw DomainError("vehicle.lookahead must be > 0");
  if (!(max_steer_rate > 0.0)) throw DomainError("vehicle.max_steer_rate must be > 0");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "PASS";
    case Verdict::kFail: return "FAIL";
    case Verdict::kInvalid: return "INVALID";
  }
  return "INVALID";
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "PASS") return Verdict::kPass;
  if (s == "FAIL") return Verdict::kFail;
  if (s == "INVALID") return Verdict::kInvalid;
  throw DomainError("unknown verdict '" + s + "'");
}

double normalize_angle(double a) {
  double r = std::remainder(a, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

VehicleState step(const VehicleState& state, double steer_cmd, const VehicleParams& params,
                  double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("step needs dt > 0");
  if (!finite(state) || !std::isfinite(steer_cmd)) {
    throw DomainError("step needs finite state and steering input");
  }
  const double target = std::clamp(steer_cmd, -params.max_steer, params.max_steer);
  const double slew = params.max_steer_rate * dt;
  const double steer = std::clamp(target, state.steer - slew, state.steer + slew);
  const double travel = params.speed * dt;
  VehicleState next;
  next.position = {state.position.x + travel * std::cos(state.heading),
                   state.position.y + travel * std::sin(state.heading)};
  next.heading = normalize_angle(state.heading + travel / params.wheelbase * std::tan(steer));
  next.steer = steer;
  next.time = state.time + dt;
  return next;
}

LanePath::LanePath(Polyline points) : points_(std::move(points)) {
  if (points_.size() < 2) throw DomainError("lane path needs at least 2 points");
  arc_ = geometry::cumulative_length(points_);
  if (!(arc_.back() > 0.0)) throw DomainError("lane path has zero length");
}

std::size_t LanePath::segment_at(double s) const {
  const auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
  if (it == arc_.begin()) return 0;
  const auto idx = static_cast<std::size_t>(std::distance(arc_.begin(), it)) - 1;
  return std::min(idx, points_.size() - 2);
}

LanePath::Projection LanePath::project(const Point2D& pos, std::optional<double> near_arc,
                                       double behind, double ahead) const {
  std::size_t first = 0;
  std::size_t last = points_.size() - 2;
  if (near_arc) {
    first = segment_at(*near_arc - behind);
    last = segment_at(*near_arc + ahead);
  }
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t k = first; k <= last; ++k) {
    const double u = geometry::project_on_segment(pos, points_[k], points_[k + 1]);
    const Point2D q = lerp(points_[k], points_[k + 1], u);
    const double d = distance(pos, q);
    if (d < best.distance) {
      best.segment = k;
      best.arc = arc_[k] + u * (arc_[k + 1] - arc_[k]);
      best.point = q;
      best.distance = d;
    }
  }
  const std::size_t tail = points_.size() - 2;
  if (best.segment == tail) {
    const Point2D dir = points_[tail + 1] - points_[tail];
    best.beyond_end = dot(pos - points_[tail + 1], dir) > 0.0;
  }
  return best;
}

Point2D LanePath::point_at(double s) const {
  const std::size_t k = segment_at(s);
  const double span = arc_[k + 1] - arc_[k];
  const double u = span > 0.0 ? (s - arc_[k]) / span : 0.0;
  // u outside [0,1] extends the first or last segment.
  return lerp(points_[k], points_[k + 1], u);
}

Point2D LanePath::direction_at(double s) const {
  const std::size_t k = segment_at(s);
  const Point2D d = points_[k + 1] - points_[k];
  return d * (1.0 / geometry::norm(d));
}

SteerCommand pure_pursuit(const VehicleState& state, const LanePath& lane,
                          const VehicleParams& params, std::optional<double> near_arc) {
  const auto proj = lane.project(state.position, near_arc);
  if (proj.beyond_end) return {0.0, true};
  const Point2D goal = lane.point_at(proj.arc + params.lookahead);
  const Point2D to_goal = goal - state.position;
  const double alpha = normalize_angle(std::atan2(to_goal.y, to_goal.x) - state.heading);
  const double steer = std::atan(2.0 * params.wheelbase * std::sin(alpha) / params.lookahead);
  return {std::clamp(steer, -params.max_steer, params.max_steer), false};
}

SteerCommand pure_pursuit(const VehicleState& state, const Polyline& lane_center,
                          const VehicleParams& params) {
  return pure_pursuit(state, LanePath(lane_center), params);
}

std::vector<Point2D> vehicle_footprint(const VehicleState& state, const VehicleParams& params) {
  const Point2D fwd{std::cos(state.heading), std::sin(state.heading)};
  const Point2D left{-fwd.y, fwd.x};
  const Point2D center = state.position + fwd * (0.5 * params.wheelbase);
  const Point2D hl = fwd * (0.5 * params.length);
  const Point2D hw = left * (0.5 * params.width);
  return {center - hl - hw, center + hl - hw, center + hl + hw, center - hl + hw};
}

double oob_percent(const VehicleState& state, const road::RoadSpec& road,
                   const VehicleParams& params) {
  const auto& c = road.centerline;
  const auto& r = road.right_boundary;
  if (c.size() < 2 || r.size() != c.size()) {
    throw DomainError("lane polygon needs matching centerline and boundary with >= 2 points");
  }
  const auto rect = vehicle_footprint(state, params);
  const double rect_area = params.length * params.width;

  double min_x = rect[0].x, max_x = rect[0].x, min_y = rect[0].y, max_y = rect[0].y;
  for (const auto& q : rect) {
    min_x = std::min(min_x, q.x);
    max_x = std::max(max_x, q.x);
    min_y = std::min(min_y, q.y);
    max_y = std::max(max_y, q.y);
  }

  double inside = 0.0;
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    const Point2D quad[4] = {c[i], c[i + 1], r[i + 1], r[i]};
    const auto [qx0, qx1] = std::minmax({quad[0].x, quad[1].x, quad[2].x, quad[3].x});
    const auto [qy0, qy1] = std::minmax({quad[0].y, quad[1].y, quad[2].y, quad[3].y});
    if (qx1 < min_x || qx0 > max_x || qy1 < min_y || qy0 > max_y) continue;
    const auto piece = geometry::clip_polygon(quad, rect);
    inside += std::abs(geometry::signed_area(piece));
  }

  double pct = 100.0 * (1.0 - inside / rect_area);
  if (pct < kPercentSnap) pct = 0.0;
  if (pct > 100.0 - kPercentSnap) pct = 100.0;
  return pct;
}

TestResult run_test(const road::RoadSpec& road, const VehicleParams& vparams,
                    const SimSettings& settings) {
  vparams.check();
  if (!(settings.dt > 0.0) || !(settings.max_time > 0.0)) {
    throw DomainError("simulation needs dt > 0 and max_time > 0");
  }
  const LanePath lane(road.ego_lane_center());

  // Start with the whole footprint on the road, stop before the front leaves it.
  const double start_arc = std::min(0.5 * vparams.length, 0.5 * lane.length());
  const double end_arc = lane.length() - vparams.length;

  VehicleState state;
  state.position = lane.point_at(start_arc);
  const Point2D dir = lane.direction_at(start_arc);
  state.heading = normalize_angle(std::atan2(dir.y, dir.x));

  TestResult result;
  result.verdict = Verdict::kPass;
  double near = start_arc;

  auto record = [&](const VehicleState& s) {
    const double pct = oob_percent(s, road, vparams);
    result.trajectory.push_back(s);
    result.oob_trace.push_back({s.time, pct});
    result.max_oob = std::max(result.max_oob, pct);
  };
  record(state);

  while (true) {
    if (result.max_oob > kFailThresholdPercent) break;
    if (near >= end_arc) {
      result.completed = true;
      break;
    }
    if (state.time >= settings.max_time) {
      result.timed_out = true;
      break;
    }
    const SteerCommand cmd = pure_pursuit(state, lane, vparams, near);
    if (cmd.done) {
      result.completed = true;
      break;
    }
    state = step(state, cmd.steer, vparams, settings.dt);
    near = lane.project(state.position, near).arc;
    record(state);
  }

  if (result.max_oob > kFailThresholdPercent) result.verdict = Verdict::kFail;
  return result;
}

void to_json(nlohmann::json& j, const VehicleParams& p) {
  j = nlohmann::json{{"wheelbase", p.wheelbase}, {"width", p.width},
                     {"length", p.length},       {"speed", p.speed},
                     {"max_steer", p.max_steer}, {"lookahead", p.lookahead},
                     {"max_steer_rate", p.max_steer_rate}};
}

void from_json(const nlohmann::json& j, VehicleParams& p) {
  p = VehicleParams{};
  if (j.contains("wheelbase")) p.wheelbase = j.at("wheelbase").get<double>();
  if (j.contains("width")) p.width = j.at("width").get<double>();
  if (j.contains("length")) p.length = j.at("length").get<double>();
  if (j.contains("speed")) p.speed = j.at("speed").get<double>();
  if (j.contains("max_steer")) p.max_steer = j.at("max_steer").get<double>();
  if (j.contains("lookahead")) p.lookahead = j.at("lookahead").get<double>();
  if (j.contains("max_steer_rate")) p.max_steer_rate = j.at("max_steer_rate").get<double>();
}

void to_json(nlohmann::json& j, const VehicleState& s) {
  j = nlohmann::json::array({s.position.x, s.position.y, s.heading, s.steer, s.time});
}

void from_json(const nlohmann::json& j, VehicleState& s) {
  s.position = {j.at(0).get<double>(), j.at(1).get<double>()};
  s.heading = j.at(2).get<double>();
  s.steer = j.at(3).get<double>();
  s.time = j.at(4).get<double>();
}

}  // namespace roadsearch::sim
