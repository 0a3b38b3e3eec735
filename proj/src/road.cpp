#include "roadsearch/road.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace roadsearch::road {

namespace {

// Dense pre-sampling before arc-length resampling.
constexpr int kOversample = 10;

Point2D unit(const Point2D& v) {
  const double n = geometry::norm(v);
  return n > 0.0 ? v * (1.0 / n) : Point2D{0.0, 0.0};
}

Point2D left_normal(const Point2D& dir) { return {-dir.y, dir.x}; }

std::vector<Point2D> per_point_directions(const Polyline& line) {
  const std::size_t n = line.size();
  std::vector<Point2D> dirs(n, Point2D{1.0, 0.0});
  if (n < 2) return dirs;
  std::vector<Point2D> seg(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) seg[i] = unit(line[i + 1] - line[i]);
  dirs[0] = seg.front();
  dirs[n - 1] = seg.back();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    Point2D avg = unit(seg[i - 1] + seg[i]);
    // Full reversal: fall back to the incoming segment.
    dirs[i] = (geometry::norm(avg) > 0.0) ? avg : seg[i - 1];
  }
  for (auto& d : dirs) {
    if (geometry::norm(d) == 0.0) d = {1.0, 0.0};
  }
  return dirs;
}

std::string fmt_point(const Point2D& p) {
  std::ostringstream os;
  os << "(" << p.x << ", " << p.y << ")";
  return os.str();
}

}  // namespace

double RoadParams::overlap_arc_gap() const { return std::numbers::pi * lane_width; }

void RoadParams::check() const {
  if (!(lane_width > 0.0)) throw DomainError("road.lane_width must be > 0");
  if (num_samples < 3) throw DomainError("road.num_samples must be >= 3");
  if (!(min_radius > 0.0)) throw DomainError("road.min_radius must be > 0");
  if (!(map_size > 0.0)) throw DomainError("road.map_size must be > 0");
  if (overlap_buffer && !(*overlap_buffer >= 0.0)) {
    throw DomainError("road.overlap_buffer must be >= 0");
  }
}

Polyline RoadSpec::ego_lane_center() const {
  Polyline out(centerline.size());
  for (std::size_t i = 0; i < centerline.size(); ++i) {
    out[i] = geometry::lerp(centerline[i], right_boundary[i], 0.5);
  }
  return out;
}

std::string to_string(Violation v) {
  switch (v) {
    case Violation::kOutOfMap: return "OUT_OF_MAP";
    case Violation::kOverlap: return "OVERLAP";
    case Violation::kTooSharp: return "TOO_SHARP";
    case Violation::kTooShort: return "TOO_SHORT";
  }
  return "UNKNOWN";
}

bool ValidityReport::has(Violation kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const ViolationEntry& e) { return e.kind == kind; });
}

Polyline resample_uniform(const Polyline& line, int count) {
  if (count < 2) throw DomainError("resample_uniform needs count >= 2");
  if (line.empty()) throw DomainError("resample_uniform needs a non-empty polyline");
  const auto arc = geometry::cumulative_length(line);
  const double total = arc.back();
  Polyline out;
  out.reserve(static_cast<std::size_t>(count));
  if (total <= 0.0) {
    out.assign(static_cast<std::size_t>(count), line.front());
    return out;
  }
  std::size_t seg = 0;
  for (int k = 0; k < count; ++k) {
    if (k == count - 1) {
      out.push_back(line.back());
      break;
    }
    const double target = total * k / (count - 1);
    while (seg + 2 < line.size() && arc[seg + 1] < target) ++seg;
    const double span = arc[seg + 1] - arc[seg];
    const double u = span > 0.0 ? std::clamp((target - arc[seg]) / span, 0.0, 1.0) : 0.0;
    out.push_back(geometry::lerp(line[seg], line[seg + 1], u));
  }
  return out;
}

RoadSpec build_road(const ControlPointSet& cps, const RoadParams& params) {
  params.check();
  const int dense_count = std::max(params.num_samples * kOversample, 1000);
  const Polyline dense = geometry::sample_bezier(cps, dense_count);

  RoadSpec road;
  road.params = params;
  road.centerline = resample_uniform(dense, params.num_samples);

  const auto dirs = per_point_directions(road.centerline);
  const std::size_t n = road.centerline.size();
  road.left_boundary.resize(n);
  road.right_boundary.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2D offset = left_normal(dirs[i]) * params.lane_width;
    road.left_boundary[i] = road.centerline[i] + offset;
    road.right_boundary[i] = road.centerline[i] - offset;
  }
  return road;
}

ValidityReport validate(const RoadSpec& road) {
  ValidityReport report;
  const RoadParams& p = road.params;

  const double length = geometry::polyline_length(road.centerline);
  if (length < 4.0 * p.lane_width) {
    std::ostringstream os;
    os << "centerline length " << length << " m below " << 4.0 * p.lane_width << " m";
    report.violations.push_back({Violation::kTooShort, os.str()});
    // Remaining checks need a proper polyline.
    if (length <= 0.0) return report;
  }

  for (const Polyline* side : {&road.left_boundary, &road.right_boundary}) {
    const auto it = std::find_if(side->begin(), side->end(), [&](const Point2D& q) {
      return q.x < 0.0 || q.x > p.map_size || q.y < 0.0 || q.y > p.map_size;
    });
    if (it != side->end()) {
      report.violations.push_back(
          {Violation::kOutOfMap, "boundary point " + fmt_point(*it) + " leaves the map"});
      break;
    }
  }

  if (geometry::self_intersects(road.centerline, p.effective_overlap_buffer(),
                                p.overlap_arc_gap())) {
    std::ostringstream os;
    os << "centerline comes within " << p.effective_overlap_buffer() << " m of itself";
    report.violations.push_back({Violation::kOverlap, os.str()});
  }

  if (road.centerline.size() >= 3) {
    const double radius = geometry::min_curvature_radius(road.centerline);
    if (radius < p.min_radius) {
      std::ostringstream os;
      os << "curve radius " << radius << " m below " << p.min_radius << " m";
      report.violations.push_back({Violation::kTooSharp, os.str()});
    }
  }
  return report;
}

RoadSpec reflect_x(const RoadSpec& road) {
  RoadSpec out = road;
  for (Polyline* line : {&out.centerline, &out.left_boundary, &out.right_boundary}) {
    for (auto& q : *line) q.y = -q.y;
  }
  return out;
}

nlohmann::json points_to_json(const Polyline& line) {
  auto arr = nlohmann::json::array();
  for (const auto& q : line) arr.push_back({q.x, q.y});
  return arr;
}

Polyline points_from_json(const nlohmann::json& arr) {
  Polyline out;
  out.reserve(arr.size());
  for (const auto& q : arr) {
    if (!q.is_array() || q.size() != 2) {
      throw DomainError("point must be a two-element array");
    }
    out.push_back({q.at(0).get<double>(), q.at(1).get<double>()});
  }
  return out;
}

void to_json(nlohmann::json& j, const RoadParams& p) {
  j = nlohmann::json{{"lane_width", p.lane_width},
                     {"num_samples", p.num_samples},
                     {"min_radius", p.min_radius},
                     {"map_size", p.map_size}};
  if (p.overlap_buffer) j["overlap_buffer"] = *p.overlap_buffer;
}

void from_json(const nlohmann::json& j, RoadParams& p) {
  p = RoadParams{};
  if (j.contains("lane_width")) p.lane_width = j.at("lane_width").get<double>();
  if (j.contains("num_samples")) p.num_samples = j.at("num_samples").get<int>();
  if (j.contains("min_radius")) p.min_radius = j.at("min_radius").get<double>();
  if (j.contains("map_size")) p.map_size = j.at("map_size").get<double>();
  if (j.contains("overlap_buffer") && !j.at("overlap_buffer").is_null()) {
    p.overlap_buffer = j.at("overlap_buffer").get<double>();
  }
}

void to_json(nlohmann::json& j, const RoadSpec& r) {
  j = nlohmann::json{{"centerline", points_to_json(r.centerline)},
                     {"left_boundary", points_to_json(r.left_boundary)},
                     {"right_boundary", points_to_json(r.right_boundary)},
                     {"params", r.params}};
}

void from_json(const nlohmann::json& j, RoadSpec& r) {
  r.centerline = points_from_json(j.at("centerline"));
  r.left_boundary = points_from_json(j.at("left_boundary"));
  r.right_boundary = points_from_json(j.at("right_boundary"));
  r.params = j.at("params").get<RoadParams>();
  if (r.left_boundary.size() != r.centerline.size() ||
      r.right_boundary.size() != r.centerline.size()) {
    throw DomainError("road polylines must have equal point counts");
  }
}

}  // namespace roadsearch::road
