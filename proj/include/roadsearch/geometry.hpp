#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace roadsearch {

/// Raised when an operation is called outside its mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace geometry {

/// Absolute tolerance (meters) used for geometric comparisons.
inline constexpr double kEpsilon = 1e-9;

struct Point2D {
  double x{0.0};
  double y{0.0};

  friend bool operator==(const Point2D&, const Point2D&) = default;

  Point2D operator+(const Point2D& o) const { return {x + o.x, y + o.y}; }
  Point2D operator-(const Point2D& o) const { return {x - o.x, y - o.y}; }
  Point2D operator*(double s) const { return {x * s, y * s}; }
};

inline double dot(const Point2D& a, const Point2D& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Point2D& a, const Point2D& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Point2D& a) { return std::hypot(a.x, a.y); }
inline double distance(const Point2D& a, const Point2D& b) { return norm(a - b); }
inline Point2D lerp(const Point2D& a, const Point2D& b, double t) {
  return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
}

/// Ordered control points inside the square map [0, map_size]^2.
/// Construction validates the in-map invariant.
class ControlPointSet {
 public:
  ControlPointSet() = default;
  ControlPointSet(std::vector<Point2D> points, double map_size);

  const std::vector<Point2D>& points() const { return points_; }
  double map_size() const { return map_size_; }
  std::size_t size() const { return points_.size(); }

  friend bool operator==(const ControlPointSet&, const ControlPointSet&) = default;

 private:
  std::vector<Point2D> points_;
  double map_size_{0.0};
};

using Polyline = std::vector<Point2D>;

/// de Casteljau evaluation of the degree n-1 Bezier curve over all control points.
Point2D bezier_point(std::span<const Point2D> control, double t);
inline Point2D bezier_point(const ControlPointSet& cps, double t) {
  return bezier_point(cps.points(), t);
}

/// Uniform-in-t sampling; exactly coincident consecutive samples are collapsed.
Polyline sample_bezier(std::span<const Point2D> control, int num_samples);
inline Polyline sample_bezier(const ControlPointSet& cps, int num_samples) {
  return sample_bezier(cps.points(), num_samples);
}

/// Discrete Frechet distance over monotone couplings, O(|p| |q|) dynamic program.
double discrete_frechet(std::span<const Point2D> p, std::span<const Point2D> q);

double point_segment_distance(const Point2D& p, const Point2D& a, const Point2D& b);

/// Parameter in [0,1] of the point on segment ab closest to p.
double project_on_segment(const Point2D& p, const Point2D& a, const Point2D& b);

bool segments_intersect(const Point2D& a, const Point2D& b, const Point2D& c, const Point2D& d);

double segment_distance(const Point2D& a, const Point2D& b, const Point2D& c, const Point2D& d);

/// True iff two non-adjacent segments of `p` come closer than `buffer`.
///
/// With `min_arc_gap` > 0 a near approach only counts when the two closest
/// points are more than `min_arc_gap` apart measured along the polyline, so a
/// smoothly bending, densely sampled curve does not flag its own neighbouring
/// segments. Proper crossings of non-adjacent segments always count.
bool self_intersects(std::span<const Point2D> p, double buffer, double min_arc_gap = 0.0);

/// Radius of the circle through three points; +infinity when collinear.
double circumradius(const Point2D& a, const Point2D& b, const Point2D& c);

/// Minimum circumradius over consecutive point triples.
double min_curvature_radius(std::span<const Point2D> p);

/// Cumulative arc length, result[0] == 0.
std::vector<double> cumulative_length(std::span<const Point2D> p);

double polyline_length(std::span<const Point2D> p);

/// Signed shoelace area (positive for counter-clockwise).
double signed_area(std::span<const Point2D> polygon);

/// Sutherland-Hodgman: clips `subject` against the convex polygon `clip`
/// (counter-clockwise). The subject may be non-convex; the area of the result
/// equals the area of the intersection.
std::vector<Point2D> clip_polygon(std::span<const Point2D> subject, std::span<const Point2D> clip);

}  // namespace geometry
}  // namespace roadsearch
