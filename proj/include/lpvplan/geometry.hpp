#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace lpvplan {

using Vec2 = Eigen::Vector2d;

/// Simple polygon given by its vertices; the closing edge is implicit.
using Polygon = std::vector<Vec2>;

/// Planar pose. Heading is kept in (-pi, pi].
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  Pose2() = default;
  Pose2(double x_, double y_, double heading_);

  Vec2 position() const { return {x, y}; }
};

/// Axis-aligned rectangle.
struct Box2 {
  Vec2 min{0.0, 0.0};
  Vec2 max{0.0, 0.0};

  bool contains(const Vec2& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y();
  }
};

constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle to (-pi, pi].
double wrapAngle(double a);

/// z-component of the 2-D cross product.
inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Signed area, positive for counter-clockwise vertex order.
double signedArea(std::span<const Vec2> poly);

/// Reorders vertices counter-clockwise if needed.
Polygon makeCounterClockwise(Polygon poly);

enum class PointLocation { Outside, Boundary, Inside };

/// Classifies a point against a polygon. Points within `tol` of an edge are
/// reported as Boundary.
PointLocation locatePoint(const Vec2& p, std::span<const Vec2> poly, double tol = 1e-12);

inline bool strictlyInside(const Vec2& p, std::span<const Vec2> poly, double tol = 1e-12) {
  return locatePoint(p, poly, tol) == PointLocation::Inside;
}

/// Distance from p to the closed segment [a, b].
double pointSegmentDistance(const Vec2& p, const Vec2& a, const Vec2& b);

/// True iff the two open segments cross at a single point interior to both.
bool segmentsCrossProperly(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1);

/// True iff the closed segments share at least one point.
bool segmentsTouch(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1);

/// Smallest t >= 0 where origin + t * dir hits the closed segment [a, b].
std::optional<double> raySegmentHit(const Vec2& origin, const Vec2& dir, const Vec2& a, const Vec2& b);

/// True iff no two non-adjacent edges touch and adjacent edges meet only at
/// their shared vertex.
bool isSimple(std::span<const Vec2> poly);

/// Outward offset of a counter-clockwise polygon by `radius`. Convex corners
/// are replaced by a circumscribed polyline of the arc so the result contains
/// the Minkowski sum with the disk; reflex corners use the miter point.
Polygon inflatePolygon(std::span<const Vec2> poly, double radius);

}  // namespace lpvplan

namespace lpvplan {

/// True iff two simple polygons share at least one point (closed sets).
bool polygonsOverlap(std::span<const Vec2> a, std::span<const Vec2> b);

}  // namespace lpvplan
