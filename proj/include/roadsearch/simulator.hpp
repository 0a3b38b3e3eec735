#pragma once

#include <optional>
#include <string>
#include <vector>

#include "roadsearch/geometry.hpp"
#include "roadsearch/road.hpp"

namespace roadsearch::sim {

using geometry::Point2D;
using geometry::Polyline;

/// Oracle threshold: a test fails once strictly more than this share of the
/// bounding box is outside the ego lane.
inline constexpr double kFailThresholdPercent = 95.0;

struct VehicleParams {
  double wheelbase{2.5};
  double width{1.8};
  double length{4.3};
  double speed{12.0};
  double max_steer{0.6};
  double lookahead{8.0};
  /// Road-wheel actuator rate limit (rad/s).
  double max_steer_rate{0.6};

  void check() const;

  friend bool operator==(const VehicleParams&, const VehicleParams&) = default;
};

struct SimSettings {
  double dt{0.05};
  double max_time{300.0};

  friend bool operator==(const SimSettings&, const SimSettings&) = default;
};

/// Kinematic bicycle state, referenced at the rear-axle midpoint.
struct VehicleState {
  Point2D position;
  double heading{0.0};  // (-pi, pi]
  double steer{0.0};
  double time{0.0};

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct OobSample {
  double time{0.0};
  double oob_percent{0.0};

  friend bool operator==(const OobSample&, const OobSample&) = default;
};

enum class Verdict { kPass, kFail, kInvalid };

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

struct TestResult {
  Verdict verdict{Verdict::kInvalid};
  std::vector<VehicleState> trajectory;
  std::vector<OobSample> oob_trace;
  double max_oob{0.0};
  /// Reached the end of the road.
  bool completed{false};
  /// Stopped by max_time before reaching the end or failing.
  bool timed_out{false};

  friend bool operator==(const TestResult&, const TestResult&) = default;
};

double normalize_angle(double a);

/// One explicit-Euler step of the kinematic bicycle model at constant speed.
VehicleState step(const VehicleState& state, double steer_cmd, const VehicleParams& params,
                  double dt);

/// Reference path with arc-length parametrisation and windowed projection.
class LanePath {
 public:
  explicit LanePath(Polyline points);

  struct Projection {
    std::size_t segment{0};
    double arc{0.0};
    Point2D point;
    double distance{0.0};
    /// Position lies past the final point along the final direction.
    bool beyond_end{false};
  };

  /// Closest point; with `near_arc` the search is restricted to a window of
  /// [near_arc - behind, near_arc + ahead] along the path.
  Projection project(const Point2D& pos, std::optional<double> near_arc = std::nullopt,
                     double behind = 5.0, double ahead = 20.0) const;

  /// Point at arc length `s`; beyond the ends the first/last segment is extended.
  Point2D point_at(double s) const;
  Point2D direction_at(double s) const;

  double length() const { return arc_.back(); }
  const Polyline& points() const { return points_; }

 private:
  std::size_t segment_at(double s) const;

  Polyline points_;
  std::vector<double> arc_;
};

struct SteerCommand {
  double steer{0.0};
  bool done{false};
};

/// Pure pursuit toward the point `lookahead` metres ahead of the projection.
SteerCommand pure_pursuit(const VehicleState& state, const LanePath& lane,
                          const VehicleParams& params, std::optional<double> near_arc = std::nullopt);
SteerCommand pure_pursuit(const VehicleState& state, const Polyline& lane_center,
                          const VehicleParams& params);

/// Oriented bounding rectangle (counter-clockwise) around the body centre,
/// which sits half a wheelbase ahead of the rear axle.
std::vector<Point2D> vehicle_footprint(const VehicleState& state, const VehicleParams& params);

/// Percentage of the footprint area outside the strip between the centerline
/// and the right boundary.
double oob_percent(const VehicleState& state, const road::RoadSpec& road,
                   const VehicleParams& params);

/// Closed-loop run along the ego lane. Stops at the road end, at max_time, or
/// as soon as the oracle threshold is exceeded. The caller validates the road.
TestResult run_test(const road::RoadSpec& road, const VehicleParams& vparams,
                    const SimSettings& settings = {});

void to_json(nlohmann::json& j, const VehicleParams& p);
void from_json(const nlohmann::json& j, VehicleParams& p);
void to_json(nlohmann::json& j, const VehicleState& s);
void from_json(const nlohmann::json& j, VehicleState& s);

}  // namespace roadsearch::sim
