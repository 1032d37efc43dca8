#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "lpvplan/geometry.hpp"

namespace lpvplan {

/// Static environment: impassable areas as simple counter-clockwise polygons
/// plus the rectangle all planning happens in.
class PolygonalWorld {
 public:
  PolygonalWorld() = default;

  /// Validates and normalizes the obstacles (orientation, simplicity,
  /// containment in `bounds`). Throws std::invalid_argument on violation.
  PolygonalWorld(std::vector<Polygon> obstacles, Box2 bounds);

  /// Same checks as the constructor minus the simplicity test, for traced
  /// raster contours that are simple by construction.
  static PolygonalWorld fromContours(std::vector<Polygon> obstacles, Box2 bounds);

  const std::vector<Polygon>& obstacles() const { return obstacles_; }
  const Box2& bounds() const { return bounds_; }

  /// Copy of the world with every obstacle offset outward by `radius`.
  /// The bounds grow by the same amount.
  PolygonalWorld inflated(double radius) const;

 private:
  std::vector<Polygon> obstacles_;
  Box2 bounds_;
};

/// Row-major boolean occupancy grid. `origin` is the world pose of the
/// lower-left corner of cell (column 0, row 0); rows grow along the origin's
/// local +y axis.
struct OccupancyGrid {
  Pose2 origin;
  double resolution = 1.0;
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<bool> cells;

  bool occupied(std::size_t col, std::size_t row) const { return cells[row * width + col]; }

  /// World coordinates of a point given in cell units.
  Vec2 toWorld(double col, double row) const;

  /// Throws std::invalid_argument unless resolution > 0 and the cell count matches.
  void validate() const;
};

/// Traces the outer contour of each 4-connected occupied region. Holes are
/// filled. Polygons below `minArea` (square meters) are dropped.
PolygonalWorld gridToPolygons(const OccupancyGrid& grid, double minArea);

/// Reads a P2/P5 portable graymap. Pixels darker than 128 (after scaling to
/// 0..255) are occupied. The first image row becomes the top grid row.
OccupancyGrid readPgm(const std::filesystem::path& file, Pose2 origin, double resolution);

/// True iff the open segment (p0, p1) passes through the interior of any
/// obstacle, or runs collinearly along part of an obstacle edge without being
/// that edge.
bool segmentIntersectsWorld(const Vec2& p0, const Vec2& p1, const PolygonalWorld& world);
bool segmentIntersectsPolygon(const Vec2& p0, const Vec2& p1, std::span<const Vec2> poly);

struct GraphEdge {
  std::size_t to = 0;
  double length = 0.0;
};

/// Undirected graph over obstacle vertices plus the start and goal points.
struct VisibilityGraph {
  std::vector<Vec2> nodes;
  std::vector<std::vector<GraphEdge>> adjacency;
  std::size_t startNode = 0;
  std::size_t goalNode = 0;

  std::size_t edgeCount() const;
  bool hasEdge(std::size_t a, std::size_t b) const;
};

/// Builds the visibility graph of `world` after inflating every obstacle by
/// `inflation`. Node order: inflated obstacle vertices (obstacle by
/// obstacle), then start, then goal. Throws InvalidQuery if start or goal is
/// inside an inflated obstacle.
VisibilityGraph buildVisibilityGraph(const PolygonalWorld& world, const Pose2& start, const Pose2& goal,
                                     double inflation);

/// Result of the heading-penalized search.
struct HeadingPath {
  std::vector<std::size_t> nodes;
  std::vector<Vec2> points;
  double cost = 0.0;
};

/// Edge cost with start/goal heading penalties: s + wStart*|alpha_start| on
/// edges leaving the start node, s + wEnd*|alpha_end| on edges entering the
/// goal node, s otherwise.
double headingEdgeCost(const VisibilityGraph& graph, std::size_t from, std::size_t to, double length,
                       const Pose2& start, const Pose2& goal, double wStart, double wEnd);

/// A* over the graph with heading-penalized edge costs. Ties are broken on
/// (cost, hop count, node index). Throws NoPath.
HeadingPath shortestHeadingPath(const VisibilityGraph& graph, const Pose2& start, const Pose2& goal, double wStart,
                                double wEnd);

}  // namespace lpvplan
