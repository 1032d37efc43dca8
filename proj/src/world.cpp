#include "lpvplan/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "lpvplan/errors.hpp"

namespace lpvplan {

namespace {

void checkBounds(const Box2& bounds) {
  if (!(bounds.min.x() < bounds.max.x() && bounds.min.y() < bounds.max.y())) {
    throw std::invalid_argument("world bounds must have positive extent");
  }
}

void checkPolygon(const Polygon& poly, const Box2& bounds) {
  if (poly.size() < 3) throw std::invalid_argument("obstacle polygon needs at least 3 vertices");
  for (const Vec2& v : poly) {
    if (!v.allFinite()) throw std::invalid_argument("obstacle vertex is not finite");
    if (!bounds.contains(v)) throw std::invalid_argument("obstacle vertex outside world bounds");
  }
}

}  // namespace

PolygonalWorld PolygonalWorld::fromContours(std::vector<Polygon> obstacles, Box2 bounds) {
  checkBounds(bounds);
  PolygonalWorld world;
  world.bounds_ = bounds;
  for (auto& poly : obstacles) {
    checkPolygon(poly, bounds);
    world.obstacles_.push_back(makeCounterClockwise(std::move(poly)));
  }
  return world;
}

PolygonalWorld::PolygonalWorld(std::vector<Polygon> obstacles, Box2 bounds) : bounds_(bounds) {
  checkBounds(bounds);
  obstacles_.reserve(obstacles.size());
  for (auto& poly : obstacles) {
    checkPolygon(poly, bounds);
    if (!isSimple(poly)) throw std::invalid_argument("obstacle polygon is not simple");
    obstacles_.push_back(makeCounterClockwise(std::move(poly)));
  }
}

PolygonalWorld PolygonalWorld::inflated(double radius) const {
  PolygonalWorld out;
  out.bounds_ = bounds_;
  if (radius > 0.0) {
    out.bounds_.min.array() -= radius;
    out.bounds_.max.array() += radius;
  }
  out.obstacles_.reserve(obstacles_.size());
  for (const auto& poly : obstacles_) out.obstacles_.push_back(inflatePolygon(poly, radius));
  return out;
}

namespace {

bool collinear(const Vec2& a, const Vec2& b, const Vec2& c, double scale) {
  return std::abs(cross(b - a, c - a)) <= 1e-12 * scale * scale;
}

bool samePoint(const Vec2& a, const Vec2& b, double scale) { return (a - b).norm() <= 1e-12 * scale; }

}  // namespace

bool segmentIntersectsPolygon(const Vec2& p0, const Vec2& p1, std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  const Vec2 d = p1 - p0;
  const double len = d.norm();
  if (len == 0.0) return strictlyInside(p0, poly);
  double scale = len;
  for (const Vec2& v : poly) scale = std::max(scale, v.cwiseAbs().maxCoeff());
  scale = std::max({scale, p0.cwiseAbs().maxCoeff(), p1.cwiseAbs().maxCoeff(), 1.0});

  std::vector<double> cuts{0.0, 1.0};
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if (segmentsCrossProperly(p0, p1, a, b)) return true;
    if (collinear(p0, p1, a, scale) && collinear(p0, p1, b, scale)) {
      const double ta = (a - p0).dot(d) / (len * len);
      const double tb = (b - p0).dot(d) / (len * len);
      const double overlap = std::min(1.0, std::max(ta, tb)) - std::max(0.0, std::min(ta, tb));
      if (overlap * len > 1e-12 * scale) {
        const bool isThatEdge = (samePoint(a, p0, scale) && samePoint(b, p1, scale)) ||
                                (samePoint(a, p1, scale) && samePoint(b, p0, scale));
        if (!isThatEdge) return true;
      }
    }
    const double t = (a - p0).dot(d) / (len * len);
    if (t > 0.0 && t < 1.0 && pointSegmentDistance(a, p0, p1) <= 1e-12 * scale) cuts.push_back(t);
  }
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if ((cuts[i + 1] - cuts[i]) * len <= 1e-12 * scale) continue;
    const Vec2 mid = p0 + 0.5 * (cuts[i] + cuts[i + 1]) * d;
    if (strictlyInside(mid, poly, 1e-12 * scale)) return true;
  }
  return false;
}

bool segmentIntersectsWorld(const Vec2& p0, const Vec2& p1, const PolygonalWorld& world) {
  for (const auto& poly : world.obstacles()) {
    if (segmentIntersectsPolygon(p0, p1, poly)) return true;
  }
  return false;
}

std::size_t VisibilityGraph::edgeCount() const {
  std::size_t twice = 0;
  for (const auto& adj : adjacency) twice += adj.size();
  return twice / 2;
}

bool VisibilityGraph::hasEdge(std::size_t a, std::size_t b) const {
  if (a >= adjacency.size()) return false;
  return std::any_of(adjacency[a].begin(), adjacency[a].end(), [b](const GraphEdge& e) { return e.to == b; });
}

VisibilityGraph buildVisibilityGraph(const PolygonalWorld& world, const Pose2& start, const Pose2& goal,
                                     double inflation) {
  const PolygonalWorld grown = world.inflated(inflation);
  for (const auto& poly : grown.obstacles()) {
    if (strictlyInside(start.position(), poly)) throw InvalidQuery("start lies inside an inflated obstacle");
    if (strictlyInside(goal.position(), poly)) throw InvalidQuery("goal lies inside an inflated obstacle");
  }

  VisibilityGraph graph;
  for (const auto& poly : grown.obstacles()) {
    graph.nodes.insert(graph.nodes.end(), poly.begin(), poly.end());
  }
  graph.startNode = graph.nodes.size();
  graph.nodes.push_back(start.position());
  graph.goalNode = graph.nodes.size();
  graph.nodes.push_back(goal.position());

  const std::size_t n = graph.nodes.size();
  graph.adjacency.assign(n, {});
  std::vector<bool> usable(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == graph.startNode || i == graph.goalNode) continue;
    usable[i] = world.bounds().contains(graph.nodes[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!usable[i]) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!usable[j]) continue;
      const Vec2& a = graph.nodes[i];
      const Vec2& b = graph.nodes[j];
      if (a == b) continue;
      if (segmentIntersectsWorld(a, b, grown)) continue;
      const double len = (b - a).norm();
      graph.adjacency[i].push_back({j, len});
      graph.adjacency[j].push_back({i, len});
    }
  }
  return graph;
}

double headingEdgeCost(const VisibilityGraph& graph, std::size_t from, std::size_t to, double length,
                       const Pose2& start, const Pose2& goal, double wStart, double wEnd) {
  const Vec2 d = graph.nodes[to] - graph.nodes[from];
  const double dir = std::atan2(d.y(), d.x());
  double cost = length;
  if (from == graph.startNode) cost += wStart * std::abs(wrapAngle(dir - start.heading));
  if (to == graph.goalNode) cost += wEnd * std::abs(wrapAngle(goal.heading - dir));
  return cost;
}

HeadingPath shortestHeadingPath(const VisibilityGraph& graph, const Pose2& start, const Pose2& goal, double wStart,
                                double wEnd) {
  const std::size_t n = graph.nodes.size();
  if (graph.startNode >= n || graph.goalNode >= n) throw NoPath("graph lacks start or goal node");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  struct Label {
    double g = kInf;
    std::size_t hops = 0;
    std::size_t parent = kNone;
  };
  std::vector<Label> labels(n);
  std::vector<bool> closed(n, false);
  const Vec2 goalPos = graph.nodes[graph.goalNode];
  auto heuristic = [&](std::size_t v) { return (goalPos - graph.nodes[v]).norm(); };
  auto tieEq = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); };

  using Entry = std::tuple<double, std::size_t, std::size_t>;  // (f, hops, node)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  labels[graph.startNode].g = 0.0;
  open.emplace(heuristic(graph.startNode), 0, graph.startNode);

  while (!open.empty()) {
    const std::size_t v = std::get<2>(open.top());
    open.pop();
    if (closed[v]) continue;
    closed[v] = true;
    if (v == graph.goalNode) break;
    const std::size_t hops = labels[v].hops;
    for (const GraphEdge& e : graph.adjacency[v]) {
      if (closed[e.to] || e.to == graph.startNode) continue;
      const double g = labels[v].g + headingEdgeCost(graph, v, e.to, e.length, start, goal, wStart, wEnd);
      Label& lab = labels[e.to];
      bool improve = false;
      if (lab.g == kInf) {
        improve = true;
      } else if (tieEq(g, lab.g)) {
        improve = std::make_pair(hops + 1, v) < std::make_pair(lab.hops, lab.parent);
      } else {
        improve = g < lab.g;
      }
      if (improve) {
        lab = {g, hops + 1, v};
        open.emplace(g + heuristic(e.to), hops + 1, e.to);
      }
    }
  }
  if (labels[graph.goalNode].g == kInf) throw NoPath("goal is not reachable from start");

  HeadingPath path;
  path.cost = labels[graph.goalNode].g;
  for (std::size_t v = graph.goalNode; v != kNone; v = labels[v].parent) path.nodes.push_back(v);
  std::reverse(path.nodes.begin(), path.nodes.end());
  for (std::size_t v : path.nodes) path.points.push_back(graph.nodes[v]);
  return path;
}

}  // namespace lpvplan
