// Independent reference computations used only by the tests. Nothing here
// calls into the routines it is used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec2 = Eigen::Vector2d;
using Poly = std::vector<Vec2>;

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Even-odd point-in-polygon on a horizontal ray (no boundary handling).
inline bool insideEvenOdd(const Vec2& p, const Poly& poly) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[j];
    const Vec2& b = poly[i];
    if ((a.y() > p.y()) != (b.y() > p.y()) &&
        p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) {
      in = !in;
    }
  }
  return in;
}

/// Naive open-segment vs. polygon-interior test, valid for segments in
/// general position (no collinearity, endpoints not on the boundary).
inline bool naiveSegmentHitsPolygon(const Vec2& p0, const Vec2& p1, const Poly& poly) {
  if (insideEvenOdd(p0, poly) || insideEvenOdd(p1, poly)) return true;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    const double d1 = cross(p1 - p0, a - p0);
    const double d2 = cross(p1 - p0, b - p0);
    const double d3 = cross(b - a, p0 - a);
    const double d4 = cross(b - a, p1 - a);
    if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  }
  return false;
}

/// Cyrus-Beck clip of segment against a convex CCW polygon. Returns true iff
/// a piece of positive length lies strictly inside (by more than `tol`).
inline bool clipHitsConvexInterior(const Vec2& p0, const Vec2& p1, const Poly& poly, double tol = 1e-9) {
  double tIn = 0.0;
  double tOut = 1.0;
  const Vec2 d = p1 - p0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    const Vec2 e = b - a;
    const Vec2 inward(-e.y(), e.x());  // CCW: interior on the left
    const double num = inward.dot(p0 - a) / e.norm();
    const double den = inward.dot(d) / e.norm();
    // Require num + t*den > tol (strictly inside this half plane).
    if (std::abs(den) < 1e-15) {
      if (num <= tol) return false;
      continue;
    }
    const double t = (tol - num) / den;
    if (den > 0) tIn = std::max(tIn, t);
    else tOut = std::min(tOut, t);
    if (tIn >= tOut) return false;
  }
  return tOut - tIn > 1e-12;
}

/// Separating-axis overlap test for convex polygons (closed sets).
inline bool satOverlap(const Poly& a, const Poly& b) {
  auto separated = [](const Poly& p, const Poly& q) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Vec2 e = p[(i + 1) % p.size()] - p[i];
      const Vec2 axis(-e.y(), e.x());
      double pMin = std::numeric_limits<double>::infinity(), pMax = -pMin, qMin = pMin, qMax = -pMin;
      for (const Vec2& v : p) {
        pMin = std::min(pMin, axis.dot(v));
        pMax = std::max(pMax, axis.dot(v));
      }
      for (const Vec2& v : q) {
        qMin = std::min(qMin, axis.dot(v));
        qMax = std::max(qMax, axis.dot(v));
      }
      if (pMax < qMin || qMax < pMin) return true;
    }
    return false;
  };
  return !separated(a, b) && !separated(b, a);
}

/// Convex hull (Andrew's monotone chain), counter-clockwise.
inline Poly convexHull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  Poly hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i - 1] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

/// Random convex polygon around `center` with radius in [rMin, rMax].
inline Poly randomConvex(std::mt19937_64& rng, const Vec2& center, double rMin, double rMax, int points = 7) {
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> rad(rMin, rMax);
  std::vector<Vec2> pts;
  for (int i = 0; i < points; ++i) {
    const double a = ang(rng);
    const double r = rad(rng);
    pts.emplace_back(center + r * Vec2(std::cos(a), std::sin(a)));
  }
  return convexHull(pts);
}

/// Exhaustive enumeration of simple paths from s to t in an undirected graph
/// given as an adjacency matrix of edge costs (infinite = no edge). `cost`
/// maps (from, to) to the cost of traversing that edge.
inline double bestSimplePathCost(int n, int s, int t, const std::function<bool(int, int)>& edge,
                                 const std::function<double(int, int)>& cost, std::vector<int>* bestPath = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> path{s};
  std::vector<bool> used(n, false);
  used[s] = true;
  std::function<void(int, double)> dfs = [&](int v, double acc) {
    if (v == t) {
      if (acc < best) {
        best = acc;
        if (bestPath) *bestPath = path;
      }
      return;
    }
    for (int w = 0; w < n; ++w) {
      if (used[w] || !edge(v, w)) continue;
      used[w] = true;
      path.push_back(w);
      dfs(w, acc + cost(v, w));
      path.pop_back();
      used[w] = false;
    }
  };
  dfs(s, 0.0);
  return best;
}

/// Minimum of 1/2 z'Hz + g'z over {Gz <= h} by enumerating every active set,
/// solving the equality-constrained KKT system and keeping primal/dual
/// feasible candidates.
inline double activeSetEnumeration(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& G,
                                   const Eigen::VectorXd& h, Eigen::VectorXd* argmin = nullptr) {
  const int n = static_cast<int>(g.size());
  const int m = static_cast<int>(h.size());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) act.push_back(i);
    }
    const int k = static_cast<int>(act.size());
    if (k > n) continue;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd rhs(n + k);
    K.topLeftCorner(n, n) = H;
    rhs.head(n) = -g;
    for (int a = 0; a < k; ++a) {
      K.block(0, n + a, n, 1) = G.row(act[a]).transpose();
      K.block(n + a, 0, 1, n) = G.row(act[a]);
      rhs(n + a) = h(act[a]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd z = sol.head(n);
    const Eigen::VectorXd lam = sol.tail(k);
    if ((lam.array() < -1e-9).any()) continue;
    if (((G * z - h).array() > 1e-9).any()) continue;
    const double f = 0.5 * z.dot(H * z) + g.dot(z);
    if (f < best) {
      best = f;
      if (argmin) *argmin = z;
    }
  }
  return best;
}

}  // namespace oracle
