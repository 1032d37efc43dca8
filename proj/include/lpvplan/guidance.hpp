#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "lpvplan/geometry.hpp"
#include "lpvplan/world.hpp"

namespace lpvplan {

/// Arc-length parameterized polyline. Not smoothed: headings are piecewise
/// constant per segment.
class ReferencePath {
 public:
  ReferencePath() = default;

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<double>& cumulativeArcLength() const { return arc_; }
  const std::vector<double>& segmentHeadings() const { return headings_; }

  double length() const { return arc_.back(); }
  std::size_t segmentCount() const { return headings_.size(); }

  /// Segment containing arc length s (clamped); a vertex belongs to the
  /// segment that starts there, except the final vertex.
  std::size_t segmentAt(double s) const;
  Vec2 pointAt(double s) const;
  double headingAt(double s) const;
  /// Unit left normal of the segment containing s.
  Vec2 normalAt(double s) const;

 private:
  friend ReferencePath buildReference(std::span<const Vec2> points);
  std::vector<Vec2> vertices_;
  std::vector<double> arc_;
  std::vector<double> headings_;
};

/// Drops consecutive duplicates and computes arc lengths and headings.
/// Throws InvalidPath if fewer than two distinct points remain.
ReferencePath buildReference(std::span<const Vec2> points);

struct FrenetSample {
  double s = 0.0;
  double e = 0.0;  ///< left positive
  double headingRef = 0.0;
};

/// Nearest point on the polyline; e is signed by the segment direction.
FrenetSample projectToFrenet(const ReferencePath& path, const Vec2& p);

/// Inverse map: point at arc length s shifted by e along the left normal.
Vec2 unprojectFrenet(const ReferencePath& path, double s, double e);

enum class RelaxationLevel { Normal, Emergency };
enum class BoundOrigin { Default, Legal, Obstacle };

const char* levelName(RelaxationLevel level);

/// Per-step lower/upper lateral limits with their provenance. `*Physical`
/// holds the obstacle-derived limit (infinite when no obstacle is hit) so
/// a legal clamp can be lifted without ever widening past an obstacle.
struct LateralBounds {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<BoundOrigin> lowerOrigin;
  std::vector<BoundOrigin> upperOrigin;
  std::vector<double> lowerPhysical;
  std::vector<double> upperPhysical;

  std::size_t size() const { return lower.size(); }
  void resize(std::size_t n);
};

/// Spatial constraints for each prediction step: CoG deviation e plus the
/// front and rear contour points.
struct Corridor {
  std::vector<double> s;
  LateralBounds center;
  LateralBounds front;
  LateralBounds rear;
  RelaxationLevel level = RelaxationLevel::Normal;
  /// Steps whose spatial rows are hard (no slack). Used when a step has
  /// collapsed, so the optimizer certifies the conflict instead of softening it.
  std::vector<bool> hard;

  std::size_t steps() const { return s.size(); }
};

struct CorridorSettings {
  double eDefaultMin = -2.0;
  double eDefaultMax = 2.0;
  /// Subtracted from obstacle-derived limits.
  double margin = 0.1;
  /// Subtracted from legal-line limits.
  double legalMargin = 0.0;
};

/// Legal boundaries (e.g. solid lane markings) as polylines.
using LegalLines = std::vector<std::vector<Vec2>>;

/// Builds per-step bounds by casting rays along the path normal at each
/// station (front at s+lF, rear at s-lR, clamped to the path ends) and
/// intersecting default, legal and obstacle limits. Does not check collapse.
Corridor buildCorridorUnchecked(const ReferencePath& path, const PolygonalWorld& world, const LegalLines& legal,
                                const CorridorSettings& settings, std::span<const double> samples, double lF,
                                double lR);

/// First step (any of the three bound pairs) where lower >= upper.
std::optional<std::size_t> findCollapse(const Corridor& corridor);

/// buildCorridorUnchecked followed by a collapse check; throws CorridorInfeasible.
Corridor buildCorridor(const ReferencePath& path, const PolygonalWorld& world, const LegalLines& legal,
                       const CorridorSettings& settings, std::span<const double> samples, double lF, double lR);

/// Per-step replacement limits used where a legal clamp is lifted.
struct RelaxedLimits {
  std::vector<double> lower;
  std::vector<double> upper;

  static RelaxedLimits uniform(std::size_t steps, double lower, double upper);
};

/// Emergency-level corridor: every bound whose binding origin is Legal moves
/// out to the relaxed limit, capped by its obstacle-derived limit. Throws
/// AlreadyRelaxed.
Corridor relaxCorridor(const Corridor& corridor, const RelaxedLimits& limits);

/// Heading change of the reference between consecutive samples, wrapped to
/// (-pi, pi]. Element 0 is zero.
std::vector<double> referenceDisturbance(const ReferencePath& path, std::span<const double> samples);

/// CSV dump: k,s,eMin,eMax,eFMin,eFMax,eRMin,eRMax,level
void writeCorridorCsv(std::ostream& out, const Corridor& corridor);

// --- tactical parameters ----------------------------------------------------

struct Interval {
  double min = 0.0;
  double max = 0.0;
};

enum class ComfortProfile { Passenger, Empty };
enum class Actuator { FrontSteer, RearSteer };
enum class ReportSource { Guidance, Stabilization };

struct OutputWeights {
  double beta = 0.0;
  double yawRate = 0.0;
  double dPsi = 0.0;
  double e = 0.0;
};

struct AxleWeights {
  double front = 0.0;
  double rear = 0.0;
};

struct TacticalParameters {
  OutputWeights outputWeights;
  AxleWeights inputWeights;  ///< absolute steering angle
  AxleWeights rateWeights;   ///< change between consecutive inputs
  Interval beta{-0.35, 0.35};
  Interval yawRate{-1.5, 1.5};
  Interval deltaF{-0.5, 0.5};
  Interval deltaR{-0.5, 0.5};
  Interval rateF{-1.0, 1.0};  ///< rad/s
  Interval rateR{-1.0, 1.0};  ///< rad/s
  ComfortProfile comfortProfile = ComfortProfile::Empty;
  double comfortFactor = 4.0;

  /// Throws std::invalid_argument on negative weights or inverted bounds.
  void validate() const;
};

struct DegradationReport {
  Actuator affectedActuator = Actuator::FrontSteer;
  double angleScale = 1.0;
  double rateScale = 1.0;
  ReportSource source = ReportSource::Guidance;
};

/// Applies degradation scaling and the comfort profile to `base`.
/// Stabilization-level reports take precedence over guidance-level reports for
/// the same actuator; among reports of the winning source the most
/// restrictive scale applies.
TacticalParameters assembleTactical(ComfortProfile profile, std::span<const DegradationReport> degradations,
                                    const TacticalParameters& base);

}  // namespace lpvplan
