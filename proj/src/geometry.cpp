#include "lpvplan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lpvplan {

Pose2::Pose2(double x_, double y_, double heading_) : x(x_), y(y_), heading(wrapAngle(heading_)) {}

double wrapAngle(double a) {
  if (!std::isfinite(a)) return a;
  double w = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

double signedArea(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    twice += cross(poly[i], poly[(i + 1) % n]);
  }
  return 0.5 * twice;
}

Polygon makeCounterClockwise(Polygon poly) {
  if (signedArea(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  return poly;
}

double pointSegmentDistance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

PointLocation locatePoint(const Vec2& p, std::span<const Vec2> poly, double tol) {
  const std::size_t n = poly.size();
  if (n < 3) return PointLocation::Outside;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[j];
    const Vec2& b = poly[i];
    if (pointSegmentDistance(p, a, b) <= tol) return PointLocation::Boundary;
    if ((b.y() > p.y()) != (a.y() > p.y())) {
      const double xCross = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < xCross) inside = !inside;
    }
  }
  return inside ? PointLocation::Inside : PointLocation::Outside;
}

namespace {

int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = cross(b - a, c - a);
  const double scale = std::max({(b - a).squaredNorm(), (c - a).squaredNorm(), 1e-300});
  if (std::abs(v) <= 1e-14 * scale) return 0;
  return v > 0.0 ? 1 : -1;
}

bool onSegment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return p.x() <= std::max(a.x(), b.x()) + 1e-12 && p.x() >= std::min(a.x(), b.x()) - 1e-12 &&
         p.y() <= std::max(a.y(), b.y()) + 1e-12 && p.y() >= std::min(a.y(), b.y()) - 1e-12;
}

}  // namespace

bool segmentsCrossProperly(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
  const int o1 = orientation(a0, a1, b0);
  const int o2 = orientation(a0, a1, b1);
  const int o3 = orientation(b0, b1, a0);
  const int o4 = orientation(b0, b1, a1);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

bool segmentsTouch(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
  const int o1 = orientation(a0, a1, b0);
  const int o2 = orientation(a0, a1, b1);
  const int o3 = orientation(b0, b1, a0);
  const int o4 = orientation(b0, b1, a1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && onSegment(a0, a1, b0)) return true;
  if (o2 == 0 && onSegment(a0, a1, b1)) return true;
  if (o3 == 0 && onSegment(b0, b1, a0)) return true;
  if (o4 == 0 && onSegment(b0, b1, a1)) return true;
  return false;
}

std::optional<double> raySegmentHit(const Vec2& origin, const Vec2& dir, const Vec2& a, const Vec2& b) {
  const Vec2 e = b - a;
  const Vec2 w = a - origin;
  const double denom = cross(dir, e);
  const double scale = dir.norm() * e.norm();
  if (std::abs(denom) <= 1e-14 * std::max(scale, 1e-300)) {
    // Parallel: only a collinear segment can be hit.
    if (std::abs(cross(w, dir)) > 1e-12 * std::max(dir.norm() * w.norm(), 1e-300)) return std::nullopt;
    const double dd = dir.squaredNorm();
    const double ta = w.dot(dir) / dd;
    const double tb = (b - origin).dot(dir) / dd;
    if (ta < 0.0 && tb < 0.0) return std::nullopt;
    if (ta <= 0.0 || tb <= 0.0) return 0.0;  // origin lies on the segment
    return std::min(ta, tb);
  }
  const double t = cross(w, e) / denom;
  const double u = cross(w, dir) / denom;
  if (t < 0.0 || u < -1e-12 || u > 1.0 + 1e-12) return std::nullopt;
  return t;
}

bool isSimple(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a0 = poly[i];
    const Vec2& a1 = poly[(i + 1) % n];
    if ((a1 - a0).squaredNorm() == 0.0) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec2& b0 = poly[j];
      const Vec2& b1 = poly[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Adjacent edges may only share their common vertex: reject folds.
        const Vec2 shared = (j == i + 1) ? a1 : a0;
        const Vec2 other0 = (j == i + 1) ? a0 : a1;
        const Vec2 other1 = (j == i + 1) ? b1 : b0;
        if (orientation(other0, shared, other1) == 0 && (other0 - shared).dot(other1 - shared) > 0.0) return false;
        continue;
      }
      if (segmentsTouch(a0, a1, b0, b1)) return false;
    }
  }
  return true;
}

Polygon inflatePolygon(std::span<const Vec2> poly, double radius) {
  Polygon src(poly.begin(), poly.end());
  if (radius <= 0.0 || src.size() < 3) return src;
  src = makeCounterClockwise(std::move(src));
  const std::size_t n = src.size();
  Polygon out;
  out.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& prev = src[(i + n - 1) % n];
    const Vec2& cur = src[i];
    const Vec2& next = src[(i + 1) % n];
    const Vec2 dIn = (cur - prev).normalized();
    const Vec2 dOut = (next - cur).normalized();
    const double thetaIn = std::atan2(-dIn.x(), dIn.y());  // outward (right) normal angle
    const double turn = std::atan2(cross(dIn, dOut), dIn.dot(dOut));
    int pieces = 1;
    if (turn > 0.0) pieces = std::max(1, static_cast<int>(std::ceil(turn / (kPi / 4.0) - 1e-9)));
    const double step = turn / pieces;
    const double reach = radius / std::cos(0.5 * step);
    for (int j = 0; j < pieces; ++j) {
      const double ang = thetaIn + (j + 0.5) * step;
      out.emplace_back(cur + reach * Vec2(std::cos(ang), std::sin(ang)));
    }
  }
  return out;
}

}  // namespace lpvplan

namespace lpvplan {

bool polygonsOverlap(std::span<const Vec2> a, std::span<const Vec2> b) {
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      if (segmentsTouch(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb])) return true;
    }
  }
  // No boundary contact: either disjoint or one contains the other.
  if (na > 0 && locatePoint(a[0], b) != PointLocation::Outside) return true;
  if (nb > 0 && locatePoint(b[0], a) != PointLocation::Outside) return true;
  return false;
}

}  // namespace lpvplan
