#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "roadsearch/geometry.hpp"

namespace roadsearch::road {

using geometry::ControlPointSet;
using geometry::Point2D;
using geometry::Polyline;

struct RoadParams {
  double lane_width{4.0};
  int num_samples{100};
  double min_radius{7.0};
  double map_size{200.0};
  /// Unset means two lane widths (one full road width).
  std::optional<double> overlap_buffer;

  double effective_overlap_buffer() const { return overlap_buffer.value_or(2.0 * lane_width); }

  /// Along-road distance below which a near approach counts as the road's own
  /// bend rather than a fold. A half turn of radius lane_width comes back
  /// within one road width after pi * lane_width of travel.
  double overlap_arc_gap() const;

  /// Throws DomainError naming the offending field.
  void check() const;

  friend bool operator==(const RoadParams&, const RoadParams&) = default;
};

/// Two-lane road: the ego (right) lane lies between `centerline` and
/// `right_boundary`, the opposite lane between `centerline` and `left_boundary`.
struct RoadSpec {
  Polyline centerline;
  Polyline left_boundary;
  Polyline right_boundary;
  RoadParams params;

  /// Midline of the ego lane, the path the vehicle follows.
  Polyline ego_lane_center() const;

  friend bool operator==(const RoadSpec&, const RoadSpec&) = default;
};

enum class Violation { kOutOfMap, kOverlap, kTooSharp, kTooShort };

std::string to_string(Violation v);

struct ViolationEntry {
  Violation kind;
  std::string detail;
};

struct ValidityReport {
  std::vector<ViolationEntry> violations;

  bool valid() const { return violations.empty(); }
  bool has(Violation kind) const;
};

/// Samples the Bezier curve, resamples to uniform arc length and offsets the
/// lane boundaries. Never throws for in-map control points; degenerate curves
/// are reported by validate().
RoadSpec build_road(const ControlPointSet& cps, const RoadParams& params);

/// Resamples `line` to `count` points spaced uniformly along its length.
Polyline resample_uniform(const Polyline& line, int count);

ValidityReport validate(const RoadSpec& road);

/// Mirror image about the x axis, keeping the ego lane on the same strip.
RoadSpec reflect_x(const RoadSpec& road);

/// Points as [[x, y], ...].
nlohmann::json points_to_json(const Polyline& line);
Polyline points_from_json(const nlohmann::json& arr);

void to_json(nlohmann::json& j, const RoadParams& p);
void from_json(const nlohmann::json& j, RoadParams& p);
void to_json(nlohmann::json& j, const RoadSpec& r);
void from_json(const nlohmann::json& j, RoadSpec& r);

}  // namespace roadsearch::road
