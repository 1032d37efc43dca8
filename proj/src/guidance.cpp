#include "lpvplan/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "lpvplan/errors.hpp"

namespace lpvplan {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ReferencePath buildReference(std::span<const Vec2> points) {
  ReferencePath path;
  for (const Vec2& p : points) {
    if (!p.allFinite()) throw InvalidPath("reference point is not finite");
    if (!path.vertices_.empty() && (p - path.vertices_.back()).norm() == 0.0) continue;
    path.vertices_.push_back(p);
  }
  if (path.vertices_.size() < 2) throw InvalidPath("reference needs at least two distinct points");
  path.arc_.push_back(0.0);
  for (std::size_t i = 0; i + 1 < path.vertices_.size(); ++i) {
    const Vec2 d = path.vertices_[i + 1] - path.vertices_[i];
    path.arc_.push_back(path.arc_.back() + d.norm());
    path.headings_.push_back(std::atan2(d.y(), d.x()));
  }
  return path;
}

std::size_t ReferencePath::segmentAt(double s) const {
  if (s <= 0.0) return 0;
  if (s >= length()) return segmentCount() - 1;
  const auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
  return std::min<std::size_t>(static_cast<std::size_t>(it - arc_.begin()) - 1, segmentCount() - 1);
}

Vec2 ReferencePath::pointAt(double s) const {
  const double sc = std::clamp(s, 0.0, length());
  const std::size_t i = segmentAt(sc);
  const double segLen = arc_[i + 1] - arc_[i];
  const double t = (sc - arc_[i]) / segLen;
  return vertices_[i] + t * (vertices_[i + 1] - vertices_[i]);
}

double ReferencePath::headingAt(double s) const { return headings_[segmentAt(s)]; }

Vec2 ReferencePath::normalAt(double s) const {
  const double h = headingAt(s);
  return {-std::sin(h), std::cos(h)};
}

FrenetSample projectToFrenet(const ReferencePath& path, const Vec2& p) {
  const auto& v = path.vertices();
  const auto& arc = path.cumulativeArcLength();
  FrenetSample best;
  double bestDist = kInf;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const Vec2 d = v[i + 1] - v[i];
    const double len = arc[i + 1] - arc[i];
    const double t = std::clamp((p - v[i]).dot(d) / (len * len), 0.0, 1.0);
    const Vec2 foot = v[i] + t * d;
    const double dist = (p - foot).norm();
    if (dist < bestDist) {
      bestDist = dist;
      const double side = cross(d, p - foot);
      best.s = arc[i] + t * len;
      best.e = side >= 0.0 ? dist : -dist;
      best.headingRef = path.segmentHeadings()[i];
    }
  }
  return best;
}

Vec2 unprojectFrenet(const ReferencePath& path, double s, double e) { return path.pointAt(s) + e * path.normalAt(s); }

const char* levelName(RelaxationLevel level) {
  return level == RelaxationLevel::Normal ? "Normal" : "Emergency";
}

void LateralBounds::resize(std::size_t n) {
  lower.resize(n);
  upper.resize(n);
  lowerOrigin.resize(n);
  upperOrigin.resize(n);
  lowerPhysical.resize(n);
  upperPhysical.resize(n);
}

namespace {

// Distance along the ray to where it first enters an obstacle interior;
// zero if it starts inside. Running along an edge does not count.
double castToObstacles(const Vec2& origin, const Vec2& dir, const PolygonalWorld& world) {
  constexpr double kStep = 1e-7;
  double best = kInf;
  std::vector<double> hits;
  for (const auto& poly : world.obstacles()) {
    if (strictlyInside(origin + kStep * dir, poly)) return 0.0;
    hits.clear();
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& a = poly[i];
      const Vec2& b = poly[(i + 1) % n];
      if (auto t = raySegmentHit(origin, dir, a, b)) {
        hits.push_back(*t);
        // Collinear edge: the far end is where the ray may turn inside.
        if (std::abs(cross(dir, b - a)) <= 1e-14 * dir.norm() * (b - a).norm()) {
          hits.push_back(std::max((a - origin).dot(dir), (b - origin).dot(dir)) / dir.squaredNorm());
        }
      }
    }
    std::sort(hits.begin(), hits.end());
    for (double t : hits) {
      if (t >= best) break;
      if (strictlyInside(origin + (t + kStep) * dir, poly)) {
        best = t;
        break;
      }
    }
  }
  return best;
}

bool insideAny(const Vec2& q, const PolygonalWorld& world) {
  for (const auto& poly : world.obstacles()) {
    if (strictlyInside(q, poly)) return true;
  }
  return false;
}

// Distance along the ray until it leaves every obstacle it starts in
// (overlapping obstacles are crossed one after the other).
double exitDistance(const Vec2& origin, const Vec2& dir, const PolygonalWorld& world) {
  double t = 0.0;
  for (int guard = 0; guard < 64 && insideAny(origin + t * dir, world); ++guard) {
    double next = kInf;
    for (const auto& poly : world.obstacles()) {
      const std::size_t n = poly.size();
      for (std::size_t i = 0; i < n; ++i) {
        auto hit = raySegmentHit(origin + t * dir, dir, poly[i], poly[(i + 1) % n]);
        if (hit && *hit > 1e-9) next = std::min(next, t + *hit);
      }
    }
    if (!std::isfinite(next)) return kInf;
    t = next + 1e-9;
  }
  return t;
}

double castToLines(const Vec2& origin, const Vec2& dir, const LegalLines& lines) {
  double best = kInf;
  for (const auto& line : lines) {
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      if (auto t = raySegmentHit(origin, dir, line[i], line[i + 1])) best = std::min(best, *t);
    }
  }
  return best;
}

struct Limit {
  double value;
  BoundOrigin origin;
};

// Tightest of the three limits; on ties the obstacle wins, then the legal line.
Limit tightest(double deflt, double legal, double physical) {
  Limit out{deflt, BoundOrigin::Default};
  if (legal <= out.value) out = {legal, BoundOrigin::Legal};
  if (physical <= out.value) out = {physical, BoundOrigin::Obstacle};
  return out;
}

void fillStep(LateralBounds& b, std::size_t k, const ReferencePath& path, double station, const PolygonalWorld& world,
              const LegalLines& legal, const CorridorSettings& cfg) {
  const double sc = std::clamp(station, 0.0, path.length());
  const Vec2 p = path.pointAt(sc);
  const Vec2 n = path.normalAt(sc);

  double upPhysical = kInf;
  double downPhysical = kInf;
  if (insideAny(p, world)) {
    // The reference runs through an obstacle: pass it on the side that needs
    // the smaller lateral offset (left on ties). The exit becomes the bound
    // on the opposite side.
    const double upExit = exitDistance(p, n, world);
    const double downExit = exitDistance(p, -n, world);
    if (upExit <= downExit && std::isfinite(upExit)) {
      downPhysical = -(upExit + cfg.margin);
      const double beyond = castToObstacles(p + upExit * n, n, world);
      upPhysical = std::isfinite(beyond) ? upExit + beyond - cfg.margin : kInf;
    } else if (std::isfinite(downExit)) {
      upPhysical = -(downExit + cfg.margin);
      const double beyond = castToObstacles(p - downExit * n, -n, world);
      downPhysical = std::isfinite(beyond) ? downExit + beyond - cfg.margin : kInf;
    } else {
      upPhysical = -cfg.margin;
      downPhysical = -cfg.margin;
    }
  } else {
    const double upObstacle = castToObstacles(p, n, world);
    if (std::isfinite(upObstacle)) upPhysical = upObstacle - cfg.margin;
    const double downObstacle = castToObstacles(p, -n, world);
    if (std::isfinite(downObstacle)) downPhysical = downObstacle - cfg.margin;
  }
  const Limit up = tightest(cfg.eDefaultMax, castToLines(p, n, legal) - cfg.legalMargin, upPhysical);
  const Limit down = tightest(-cfg.eDefaultMin, castToLines(p, -n, legal) - cfg.legalMargin, downPhysical);

  b.upper[k] = up.value;
  b.upperOrigin[k] = up.origin;
  b.upperPhysical[k] = upPhysical;
  b.lower[k] = -down.value;
  b.lowerOrigin[k] = down.origin;
  b.lowerPhysical[k] = -downPhysical;
}

bool collapsedAt(const Corridor& c, std::size_t k) {
  return c.center.lower[k] >= c.center.upper[k] || c.front.lower[k] >= c.front.upper[k] ||
         c.rear.lower[k] >= c.rear.upper[k];
}

}  // namespace

Corridor buildCorridorUnchecked(const ReferencePath& path, const PolygonalWorld& world, const LegalLines& legal,
                                const CorridorSettings& settings, std::span<const double> samples, double lF,
                                double lR) {
  if (!(settings.eDefaultMin < settings.eDefaultMax)) throw std::invalid_argument("corridor defaults inverted");
  Corridor c;
  const std::size_t n = samples.size();
  c.s.assign(samples.begin(), samples.end());
  c.center.resize(n);
  c.front.resize(n);
  c.rear.resize(n);
  c.hard.assign(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    fillStep(c.center, k, path, samples[k], world, legal, settings);
    fillStep(c.front, k, path, samples[k] + lF, world, legal, settings);
    fillStep(c.rear, k, path, samples[k] - lR, world, legal, settings);
  }
  return c;
}

std::optional<std::size_t> findCollapse(const Corridor& corridor) {
  for (std::size_t k = 0; k < corridor.steps(); ++k) {
    if (collapsedAt(corridor, k)) return k;
  }
  return std::nullopt;
}

Corridor buildCorridor(const ReferencePath& path, const PolygonalWorld& world, const LegalLines& legal,
                       const CorridorSettings& settings, std::span<const double> samples, double lF, double lR) {
  Corridor c = buildCorridorUnchecked(path, world, legal, settings, samples, lF, lR);
  if (auto k = findCollapse(c)) {
    throw CorridorInfeasible(*k, "corridor collapses at step " + std::to_string(*k));
  }
  return c;
}

RelaxedLimits RelaxedLimits::uniform(std::size_t steps, double lower, double upper) {
  return {std::vector<double>(steps, lower), std::vector<double>(steps, upper)};
}

Corridor relaxCorridor(const Corridor& corridor, const RelaxedLimits& limits) {
  if (corridor.level == RelaxationLevel::Emergency) throw AlreadyRelaxed("corridor is already at emergency level");
  const std::size_t n = corridor.steps();
  if (limits.lower.size() < n || limits.upper.size() < n) {
    throw std::invalid_argument("relaxed limits shorter than corridor");
  }
  Corridor out = corridor;
  out.level = RelaxationLevel::Emergency;
  auto lift = [&](LateralBounds& b) {
    for (std::size_t k = 0; k < n; ++k) {
      if (b.upperOrigin[k] == BoundOrigin::Legal) {
        const double phys = b.upperPhysical[k];
        const double widened = std::min(phys, limits.upper[k]);
        b.upper[k] = std::max(b.upper[k], widened);
        b.upperOrigin[k] = phys <= limits.upper[k] ? BoundOrigin::Obstacle : BoundOrigin::Default;
      }
      if (b.lowerOrigin[k] == BoundOrigin::Legal) {
        const double phys = b.lowerPhysical[k];
        const double widened = std::max(phys, limits.lower[k]);
        b.lower[k] = std::min(b.lower[k], widened);
        b.lowerOrigin[k] = phys >= limits.lower[k] ? BoundOrigin::Obstacle : BoundOrigin::Default;
      }
    }
  };
  lift(out.center);
  lift(out.front);
  lift(out.rear);
  for (std::size_t k = 0; k < n; ++k) {
    if (out.hard[k] && !collapsedAt(out, k)) out.hard[k] = false;
  }
  return out;
}

std::vector<double> referenceDisturbance(const ReferencePath& path, std::span<const double> samples) {
  std::vector<double> out(samples.size(), 0.0);
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const std::size_t i0 = path.segmentAt(samples[k - 1]);
    const std::size_t i1 = path.segmentAt(samples[k]);
    // Sum the vertex turns so that more than half a turn between samples is kept.
    double total = 0.0;
    const auto& h = path.segmentHeadings();
    for (std::size_t i = i0; i < i1; ++i) total += wrapAngle(h[i + 1] - h[i]);
    for (std::size_t i = i1; i < i0; ++i) total -= wrapAngle(h[i + 1] - h[i]);
    out[k] = wrapAngle(total);
  }
  return out;
}

void writeCorridorCsv(std::ostream& out, const Corridor& c) {
  out << "k,s,eMin,eMax,eFMin,eFMax,eRMin,eRMax,level\n";
  char buf[512];
  for (std::size_t k = 0; k < c.steps(); ++k) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", k, c.s[k], c.center.lower[k],
                  c.center.upper[k], c.front.lower[k], c.front.upper[k], c.rear.lower[k], c.rear.upper[k],
                  levelName(c.level));
    out << buf;
  }
}

void TacticalParameters::validate() const {
  const double weights[] = {outputWeights.beta, outputWeights.yawRate, outputWeights.dPsi, outputWeights.e,
                            inputWeights.front, inputWeights.rear,      rateWeights.front,  rateWeights.rear};
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("tactical weights must be finite and >= 0");
  }
  for (const Interval* iv : {&beta, &yawRate, &deltaF, &deltaR, &rateF, &rateR}) {
    if (!(iv->min <= iv->max)) throw std::invalid_argument("tactical bound has min > max");
  }
  if (!(comfortFactor >= 1.0)) throw std::invalid_argument("comfort factor must be >= 1");
}

TacticalParameters assembleTactical(ComfortProfile profile, std::span<const DegradationReport> degradations,
                                    const TacticalParameters& base) {
  TacticalParameters out = base;
  for (const Actuator act : {Actuator::FrontSteer, Actuator::RearSteer}) {
    bool haveStab = false;
    for (const auto& r : degradations) {
      haveStab = haveStab || (r.affectedActuator == act && r.source == ReportSource::Stabilization);
    }
    const ReportSource winner = haveStab ? ReportSource::Stabilization : ReportSource::Guidance;
    double angle = 1.0;
    double rate = 1.0;
    for (const auto& r : degradations) {
      if (r.affectedActuator != act || r.source != winner) continue;
      if (r.angleScale < 0.0 || r.angleScale > 1.0 || r.rateScale < 0.0 || r.rateScale > 1.0) {
        throw std::invalid_argument("degradation scales must lie in [0, 1]");
      }
      angle = std::min(angle, r.angleScale);
      rate = std::min(rate, r.rateScale);
    }
    Interval& a = act == Actuator::FrontSteer ? out.deltaF : out.deltaR;
    Interval& d = act == Actuator::FrontSteer ? out.rateF : out.rateR;
    a.min *= angle;
    a.max *= angle;
    d.min *= rate;
    d.max *= rate;
  }
  out.comfortProfile = profile;
  if (profile == ComfortProfile::Passenger) {
    out.outputWeights.yawRate *= base.comfortFactor;
    out.rateWeights.front *= base.comfortFactor;
    out.rateWeights.rear *= base.comfortFactor;
  }
  return out;
}

}  // namespace lpvplan
