#include "lpvplan/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "lpvplan/errors.hpp"

namespace lpvplan {

Vec2 OccupancyGrid::toWorld(double col, double row) const {
  const double c = std::cos(origin.heading);
  const double s = std::sin(origin.heading);
  const double lx = col * resolution;
  const double ly = row * resolution;
  return {origin.x + c * lx - s * ly, origin.y + s * lx + c * ly};
}

void OccupancyGrid::validate() const {
  if (!(resolution > 0.0)) throw std::invalid_argument("grid resolution must be positive");
  if (cells.size() != width * height) throw std::invalid_argument("grid cell count does not match width*height");
}

namespace {

using Lattice = std::array<long, 2>;

struct DirectedEdge {
  Lattice from;
  Lattice to;
};

// Turn preference when a lattice vertex has two outgoing boundary edges:
// left first keeps diagonal-only neighbours in separate lobes (4-connectivity).
int turnRank(const Lattice& inDir, const Lattice& outDir) {
  const long crossZ = inDir[0] * outDir[1] - inDir[1] * outDir[0];
  const long dot = inDir[0] * outDir[0] + inDir[1] * outDir[1];
  if (crossZ > 0) return 0;
  if (dot > 0) return 1;
  if (crossZ < 0) return 2;
  return 3;
}

std::vector<std::vector<Lattice>> traceLoops(const std::vector<DirectedEdge>& edges) {
  std::map<Lattice, std::vector<std::size_t>> outgoing;
  for (std::size_t i = 0; i < edges.size(); ++i) outgoing[edges[i].from].push_back(i);
  std::vector<bool> used(edges.size(), false);
  std::vector<std::vector<Lattice>> loops;
  for (std::size_t seed = 0; seed < edges.size(); ++seed) {
    if (used[seed]) continue;
    std::vector<Lattice> loop;
    std::size_t cur = seed;
    while (!used[cur]) {
      used[cur] = true;
      loop.push_back(edges[cur].from);
      const Lattice inDir{edges[cur].to[0] - edges[cur].from[0], edges[cur].to[1] - edges[cur].from[1]};
      std::size_t next = edges.size();
      int bestRank = 4;
      for (std::size_t cand : outgoing[edges[cur].to]) {
        if (used[cand]) continue;
        const Lattice outDir{edges[cand].to[0] - edges[cand].from[0], edges[cand].to[1] - edges[cand].from[1]};
        const int rank = turnRank(inDir, outDir);
        if (rank < bestRank) {
          bestRank = rank;
          next = cand;
        }
      }
      if (next == edges.size()) break;
      cur = next;
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

// Drops vertices whose neighbours are collinear with them.
std::vector<Lattice> dropCollinear(const std::vector<Lattice>& loop) {
  std::vector<Lattice> out;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Lattice& a = loop[(i + n - 1) % n];
    const Lattice& b = loop[i];
    const Lattice& c = loop[(i + 1) % n];
    const long crossZ = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
    if (crossZ != 0) out.push_back(b);
  }
  return out;
}

long latticeTwiceArea(const std::vector<Lattice>& loop) {
  long twice = 0;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Lattice& a = loop[i];
    const Lattice& b = loop[(i + 1) % n];
    twice += a[0] * b[1] - a[1] * b[0];
  }
  return twice;
}

}  // namespace

PolygonalWorld gridToPolygons(const OccupancyGrid& grid, double minArea) {
  grid.validate();
  const long w = static_cast<long>(grid.width);
  const long h = static_cast<long>(grid.height);
  std::vector<int> label(grid.cells.size(), -1);
  auto idx = [w](long c, long r) { return static_cast<std::size_t>(r * w + c); };
  auto occ = [&](long c, long r) { return c >= 0 && r >= 0 && c < w && r < h && grid.cells[idx(c, r)]; };

  std::vector<Polygon> polygons;
  Box2 bounds{grid.toWorld(0, 0), grid.toWorld(0, 0)};
  for (const auto& [c, r] : std::array<std::array<double, 2>, 4>{
           {{0.0, 0.0}, {double(w), 0.0}, {0.0, double(h)}, {double(w), double(h)}}}) {
    const Vec2 p = grid.toWorld(c, r);
    bounds.min = bounds.min.cwiseMin(p);
    bounds.max = bounds.max.cwiseMax(p);
  }
  if (w == 0 || h == 0) {
    bounds.max = bounds.min + Vec2(1.0, 1.0);
    return PolygonalWorld({}, bounds);
  }

  int components = 0;
  for (long r0 = 0; r0 < h; ++r0) {
    for (long c0 = 0; c0 < w; ++c0) {
      if (!occ(c0, r0) || label[idx(c0, r0)] >= 0) continue;
      const int id = components++;
      std::vector<Lattice> members;
      std::vector<Lattice> stack{{c0, r0}};
      label[idx(c0, r0)] = id;
      while (!stack.empty()) {
        const Lattice cell = stack.back();
        stack.pop_back();
        members.push_back(cell);
        for (const auto& [dc, dr] : std::array<Lattice, 4>{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}}) {
          const long c = cell[0] + dc;
          const long r = cell[1] + dr;
          if (occ(c, r) && label[idx(c, r)] < 0) {
            label[idx(c, r)] = id;
            stack.push_back({c, r});
          }
        }
      }
      // Fill holes inside the component's box: anything the padded border
      // cannot reach through non-member cells belongs to the region.
      long cMin = w, cMax = -1, rMin = h, rMax = -1;
      for (const auto& [c, r] : members) {
        cMin = std::min(cMin, c);
        cMax = std::max(cMax, c);
        rMin = std::min(rMin, r);
        rMax = std::max(rMax, r);
      }
      const long bw = cMax - cMin + 3, bh = rMax - rMin + 3;
      auto bIdx = [&](long c, long r) { return static_cast<std::size_t>((r - rMin + 1) * bw + (c - cMin + 1)); };
      std::vector<char> reach(static_cast<std::size_t>(bw * bh), 0);
      auto member = [&](long c, long r) { return occ(c, r) && label[idx(c, r)] == id; };
      std::vector<Lattice> flood{{cMin - 1, rMin - 1}};
      reach[bIdx(cMin - 1, rMin - 1)] = 1;
      while (!flood.empty()) {
        const Lattice cell = flood.back();
        flood.pop_back();
        for (const auto& [dc, dr] : std::array<Lattice, 4>{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}}) {
          const long c = cell[0] + dc;
          const long r = cell[1] + dr;
          if (c < cMin - 1 || r < rMin - 1 || c > cMax + 1 || r > rMax + 1) continue;
          if (reach[bIdx(c, r)] || member(c, r)) continue;
          reach[bIdx(c, r)] = 1;
          flood.push_back({c, r});
        }
      }
      auto inComp = [&](long c, long r) {
        if (c < cMin || r < rMin || c > cMax || r > rMax) return false;
        return !reach[bIdx(c, r)];
      };
      std::vector<DirectedEdge> edges;
      for (long r = rMin; r <= rMax; ++r) {
        for (long c = cMin; c <= cMax; ++c) {
          if (!inComp(c, r)) continue;
          if (!inComp(c, r - 1)) edges.push_back({{c, r}, {c + 1, r}});
          if (!inComp(c + 1, r)) edges.push_back({{c + 1, r}, {c + 1, r + 1}});
          if (!inComp(c, r + 1)) edges.push_back({{c + 1, r + 1}, {c, r + 1}});
          if (!inComp(c - 1, r)) edges.push_back({{c, r + 1}, {c, r}});
        }
      }
      // Holes are filled, so one loop is expected; keep the largest anyway.
      std::vector<Lattice> outer;
      long outerArea = 0;
      for (auto& loop : traceLoops(edges)) {
        const long a = latticeTwiceArea(loop);
        if (a > outerArea) {
          outerArea = a;
          outer = std::move(loop);
        }
      }
      const double area = 0.5 * static_cast<double>(outerArea) * grid.resolution * grid.resolution;
      if (outer.empty() || area < minArea) continue;
      Polygon poly;
      for (const Lattice& v : dropCollinear(outer)) poly.push_back(grid.toWorld(double(v[0]), double(v[1])));
      polygons.push_back(std::move(poly));
    }
  }

  return PolygonalWorld::fromContours(std::move(polygons), bounds);
}

namespace {

std::string nextToken(std::istream& in) {
  std::string tok;
  char ch = 0;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

}  // namespace

OccupancyGrid readPgm(const std::filesystem::path& file, Pose2 origin, double resolution) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open PGM file " + file.string());
  const std::string magic = nextToken(in);
  if (magic != "P2" && magic != "P5") throw IoError("unsupported PGM magic '" + magic + "' in " + file.string());
  std::size_t width = 0;
  std::size_t height = 0;
  long maxval = 0;
  try {
    width = std::stoul(nextToken(in));
    height = std::stoul(nextToken(in));
    maxval = std::stol(nextToken(in));
  } catch (const std::exception&) {
    throw IoError("malformed PGM header in " + file.string());
  }
  if (maxval <= 0 || maxval > 65535) throw IoError("invalid PGM maxval in " + file.string());

  OccupancyGrid grid;
  grid.origin = origin;
  grid.resolution = resolution;
  grid.width = width;
  grid.height = height;
  grid.cells.assign(width * height, false);
  for (std::size_t fileRow = 0; fileRow < height; ++fileRow) {
    const std::size_t row = height - 1 - fileRow;
    for (std::size_t col = 0; col < width; ++col) {
      long value = 0;
      if (magic == "P2") {
        const std::string tok = nextToken(in);
        if (tok.empty()) throw IoError("truncated PGM data in " + file.string());
        value = std::stol(tok);
      } else if (maxval < 256) {
        const int byte = in.get();
        if (byte == EOF) throw IoError("truncated PGM data in " + file.string());
        value = byte;
      } else {
        const int hi = in.get();
        const int lo = in.get();
        if (lo == EOF) throw IoError("truncated PGM data in " + file.string());
        value = (hi << 8) | lo;
      }
      const double scaled = 255.0 * static_cast<double>(value) / static_cast<double>(maxval);
      grid.cells[row * width + col] = scaled < 128.0;
    }
  }
  grid.validate();
  return grid;
}

}  // namespace lpvplan
