#include "roadsearch/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace roadsearch::geometry {

ControlPointSet::ControlPointSet(std::vector<Point2D> points, double map_size)
    : points_(std::move(points)), map_size_(map_size) {
  if (points_.size() < 2) {
    throw DomainError("control point set needs at least 2 points");
  }
  if (!(map_size_ > 0.0) || !std::isfinite(map_size_)) {
    throw DomainError("map size must be positive and finite");
  }
  for (const auto& p : points_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw DomainError("control point coordinates must be finite");
    }
    if (p.x < 0.0 || p.x > map_size_ || p.y < 0.0 || p.y > map_size_) {
      throw DomainError("control point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                        ") lies outside the map");
    }
  }
}

Point2D bezier_point(std::span<const Point2D> control, double t) {
  if (control.size() < 2) {
    throw DomainError("bezier_point needs at least 2 control points");
  }
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError("bezier parameter t must lie in [0, 1]");
  }
  std::vector<Point2D> work(control.begin(), control.end());
  for (std::size_t level = work.size() - 1; level > 0; --level) {
    for (std::size_t i = 0; i < level; ++i) {
      work[i] = lerp(work[i], work[i + 1], t);
    }
  }
  return work.front();
}

Polyline sample_bezier(std::span<const Point2D> control, int num_samples) {
  if (num_samples < 2) {
    throw DomainError("sample_bezier needs num_samples >= 2");
  }
  Polyline out;
  out.reserve(static_cast<std::size_t>(num_samples));
  for (int i = 0; i < num_samples; ++i) {
    // Endpoints are taken verbatim so t = 1 is exact.
    const double t = (i == num_samples - 1) ? 1.0 : static_cast<double>(i) / (num_samples - 1);
    const Point2D pt = bezier_point(control, t);
    if (!out.empty() && out.back() == pt) continue;
    out.push_back(pt);
  }
  return out;
}

double discrete_frechet(std::span<const Point2D> p, std::span<const Point2D> q) {
  if (p.empty() || q.empty()) {
    throw DomainError("discrete_frechet needs non-empty polylines");
  }
  const std::size_t m = q.size();
  // Two rolling rows of the coupling table.
  std::vector<double> prev(m), cur(m);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = distance(p[i], q[j]);
      double reach;
      if (i == 0 && j == 0) {
        reach = d;
      } else if (i == 0) {
        reach = std::max(cur[j - 1], d);
      } else if (j == 0) {
        reach = std::max(prev[0], d);
      } else {
        reach = std::max(std::min({prev[j], prev[j - 1], cur[j - 1]}), d);
      }
      cur[j] = reach;
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

double project_on_segment(const Point2D& p, const Point2D& a, const Point2D& b) {
  const Point2D ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return 0.0;
  return std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
}

double point_segment_distance(const Point2D& p, const Point2D& a, const Point2D& b) {
  return distance(p, lerp(a, b, project_on_segment(p, a, b)));
}

namespace {

int orientation(const Point2D& a, const Point2D& b, const Point2D& c) {
  const double v = cross(b - a, c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(const Point2D& a, const Point2D& b, const Point2D& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(const Point2D& a, const Point2D& b, const Point2D& c, const Point2D& d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

double segment_distance(const Point2D& a, const Point2D& b, const Point2D& c, const Point2D& d) {
  if (segments_intersect(a, b, c, d)) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

bool self_intersects(std::span<const Point2D> p, double buffer, double min_arc_gap) {
  if (buffer < 0.0 || min_arc_gap < 0.0) {
    throw DomainError("self_intersects needs a non-negative buffer");
  }
  if (p.size() < 4) return false;
  const auto arc = cumulative_length(p);
  const std::size_t segs = p.size() - 1;

  // Arc position of the point at parameter u on segment k.
  auto arc_at = [&](std::size_t k, double u) { return arc[k] + u * (arc[k + 1] - arc[k]); };

  for (std::size_t i = 0; i + 2 < segs; ++i) {
    const Point2D& a = p[i];
    const Point2D& b = p[i + 1];
    for (std::size_t j = i + 2; j < segs; ++j) {
      const Point2D& c = p[j];
      const Point2D& d = p[j + 1];
      // A closed polyline makes the first and last segment adjacent.
      if (a == d || b == c || a == c || b == d) continue;
      if (segments_intersect(a, b, c, d)) return true;
      if (buffer == 0.0) continue;

      // Endpoint-to-segment candidates realise the segment distance.
      struct Candidate {
        double dist;
        double arc_gap;
      };
      const double uc = project_on_segment(c, a, b);
      const double ud = project_on_segment(d, a, b);
      const double ua = project_on_segment(a, c, d);
      const double ub = project_on_segment(b, c, d);
      const Candidate cands[] = {
          {distance(c, lerp(a, b, uc)), arc[j] - arc_at(i, uc)},
          {distance(d, lerp(a, b, ud)), arc[j + 1] - arc_at(i, ud)},
          {distance(a, lerp(c, d, ua)), arc_at(j, ua) - arc[i]},
          {distance(b, lerp(c, d, ub)), arc_at(j, ub) - arc[i + 1]},
      };
      for (const auto& cand : cands) {
        if (cand.dist < buffer && cand.arc_gap > min_arc_gap) return true;
      }
    }
  }
  return false;
}

double circumradius(const Point2D& a, const Point2D& b, const Point2D& c) {
  const double twice_area = std::abs(cross(b - a, c - a));
  if (twice_area == 0.0) return std::numeric_limits<double>::infinity();
  return distance(a, b) * distance(b, c) * distance(c, a) / (2.0 * twice_area);
}

double min_curvature_radius(std::span<const Point2D> p) {
  if (p.size() < 3) {
    throw DomainError("min_curvature_radius needs at least 3 points");
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 2 < p.size(); ++i) {
    best = std::min(best, circumradius(p[i], p[i + 1], p[i + 2]));
  }
  return best;
}

std::vector<double> cumulative_length(std::span<const Point2D> p) {
  std::vector<double> out(p.size(), 0.0);
  for (std::size_t i = 1; i < p.size(); ++i) {
    out[i] = out[i - 1] + distance(p[i - 1], p[i]);
  }
  return out;
}

double polyline_length(std::span<const Point2D> p) {
  double total = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) total += distance(p[i - 1], p[i]);
  return total;
}

double signed_area(std::span<const Point2D> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += cross(polygon[i], polygon[(i + 1) % n]);
  }
  return 0.5 * acc;
}

std::vector<Point2D> clip_polygon(std::span<const Point2D> subject, std::span<const Point2D> clip) {
  std::vector<Point2D> output(subject.begin(), subject.end());
  const std::size_t n = clip.size();
  for (std::size_t e = 0; e < n && !output.empty(); ++e) {
    const Point2D& ea = clip[e];
    const Point2D& eb = clip[(e + 1) % n];
    const Point2D edge = eb - ea;
    auto inside = [&](const Point2D& pt) { return cross(edge, pt - ea) >= 0.0; };
    auto crossing = [&](const Point2D& s, const Point2D& t) {
      const double ds = cross(edge, s - ea);
      const double dt = cross(edge, t - ea);
      return lerp(s, t, ds / (ds - dt));
    };

    std::vector<Point2D> input;
    input.swap(output);
    Point2D prev = input.back();
    for (const Point2D& curr : input) {
      if (inside(curr)) {
        if (!inside(prev)) output.push_back(crossing(prev, curr));
        output.push_back(curr);
      } else if (inside(prev)) {
        output.push_back(crossing(prev, curr));
      }
      prev = curr;
    }
  }
  return output;
}

}  // namespace roadsearch::geometry
