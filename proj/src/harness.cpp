#include "lpvplan/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "lpvplan/errors.hpp"

namespace lpvplan {

namespace {

Box2 contentBounds(const Scenario& s, const std::vector<Polygon>& obstacles) {
  Box2 b{s.start.position(), s.start.position()};
  auto grow = [&](const Vec2& p) {
    b.min = b.min.cwiseMin(p);
    b.max = b.max.cwiseMax(p);
  };
  grow(s.goal.position());
  for (const auto& poly : obstacles) {
    for (const auto& v : poly) grow(v);
  }
  for (const auto& line : s.legalLines) {
    for (const auto& v : line) grow(v);
  }
  for (const auto& v : s.guidance.referencePath) grow(v);
  for (const auto& v : s.goalRegion) grow(v);
  const Vec2 pad(5.0, 5.0);
  return {b.min - pad, b.max + pad};
}

// Star-shaped polygon around `center`: sorted random angles, random radii.
Polygon randomStar(std::mt19937_64& rng, const Vec2& center, double rMin, double rMax) {
  std::uniform_int_distribution<int> count(5, 8);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> radius(rMin, rMax);
  const int n = count(rng);
  std::vector<double> angles(static_cast<std::size_t>(n));
  for (double& a : angles) a = angle(rng);
  std::sort(angles.begin(), angles.end());
  Polygon poly;
  for (double a : angles) {
    const double r = radius(rng);
    poly.emplace_back(center + r * Vec2(std::cos(a), std::sin(a)));
  }
  return poly;
}

double steeringRateLimit(const Interval& rate) { return std::max(std::abs(rate.min), std::abs(rate.max)); }

// Forced-infeasibility injection: a collapsed hard spatial row.
void injectCollapse(Corridor& c) {
  const std::size_t k = std::min<std::size_t>(3, c.steps() - 1);
  c.center.lower[k] = c.center.upper[k] + 1.0;
  c.hard[k] = true;
}

void markCollapsedHard(Corridor& c) {
  for (std::size_t k = 0; k < c.steps(); ++k) {
    if (c.center.lower[k] >= c.center.upper[k] || c.front.lower[k] >= c.front.upper[k] ||
        c.rear.lower[k] >= c.rear.upper[k]) {
      c.hard[k] = true;
    }
  }
}

// Projection that extends the first and last segments beyond the path ends,
// so an overshoot shows up as arc length clamped at the end and a lateral
// offset perpendicular to the final segment.
FrenetSample measureFrenet(const ReferencePath& ref, const Vec2& p) {
  FrenetSample fs = projectToFrenet(ref, p);
  const double len = ref.length();
  if (fs.s <= 0.0 || fs.s >= len) {
    const Vec2 anchor = ref.pointAt(fs.s);
    const double h = ref.headingAt(fs.s);
    fs.e = cross(Vec2(std::cos(h), std::sin(h)), p - anchor);
  }
  return fs;
}

}  // namespace

PolygonalWorld buildScenarioWorld(const Scenario& s, std::uint64_t seed) {
  std::vector<Polygon> obstacles = s.obstacles;
  if (s.random.count > 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(s.random.region.min.x(), s.random.region.max.x());
    std::uniform_real_distribution<double> uy(s.random.region.min.y(), s.random.region.max.y());
    int placed = 0;
    for (int attempt = 0; attempt < 1000 * s.random.count && placed < s.random.count; ++attempt) {
      const Vec2 c(ux(rng), uy(rng));
      Polygon poly = randomStar(rng, c, s.random.minRadius, s.random.maxRadius);
      const double keepOut = s.random.clearance + s.random.maxRadius;
      if ((c - s.start.position()).norm() < keepOut || (c - s.goal.position()).norm() < keepOut) continue;
      bool clash = false;
      for (const auto& other : obstacles) clash = clash || polygonsOverlap(makeCounterClockwise(poly), other);
      if (clash) continue;
      obstacles.push_back(makeCounterClockwise(std::move(poly)));
      ++placed;
    }
  }

  std::vector<Polygon> traced;
  if (s.grid) {
    std::filesystem::path file = s.grid->file;
    if (file.is_relative() && !s.baseDir.empty()) file = s.baseDir / file;
    const OccupancyGrid grid = readPgm(file, s.grid->origin, s.grid->resolution);
    traced = gridToPolygons(grid, s.grid->minArea).obstacles();
  }

  std::vector<Polygon> all = obstacles;
  all.insert(all.end(), traced.begin(), traced.end());
  const Box2 bounds = s.bounds.value_or(contentBounds(s, all));
  try {
    // User and random polygons are checked for simplicity; traced contours
    // are simple by construction and may overlap each other.
    PolygonalWorld checked(obstacles, bounds);
    if (traced.empty()) return checked;
    return PolygonalWorld::fromContours(std::move(all), bounds);
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(std::string("world: ") + e.what());
  }
}

RunResult runScenario(const Scenario& s, const RunOptions& options) {
  s.validate();
  RunResult r;
  r.scenario = s.name;
  r.vehicle = s.vehicle;
  r.legalLines = s.legalLines;
  r.goalRegion = s.goalRegion;
  const std::uint64_t seed = options.seed.value_or(s.seed);
  const VehicleParams& veh = s.vehicle;
  const int p = s.mpc.horizon;
  const double Ts = s.mpc.Ts;

  ReferencePath ref;
  try {
    r.world = buildScenarioWorld(s, seed);
    std::vector<Vec2> points = s.guidance.referencePath;
    if (points.empty()) {
      const VisibilityGraph graph =
          buildVisibilityGraph(r.world, s.start, s.goal, veh.halfWidth + s.guidance.inflationMargin);
      points = shortestHeadingPath(graph, s.start, s.goal, s.guidance.wStart, s.guidance.wEnd).points;
    }
    ref = buildReference(points);
  } catch (const Error& e) {
    r.planningFailed = true;
    r.diagnostic = e.what();
    return r;
  }
  r.reference = ref.vertices();
  const PolygonalWorld corridorWorld = r.world.inflated(veh.halfWidth);
  const double pathLength = ref.length();

  PlantState plant;
  plant.x = s.start.x;
  plant.y = s.start.y;
  plant.psi = s.start.heading;
  plant.vx = s.initialSpeed;

  const long ratio = std::lround(Ts / s.plantDt);
  const long plantSteps = static_cast<long>(std::floor(s.duration / s.plantDt + 1e-9));
  const long cycleCount = static_cast<long>(std::floor(s.duration / Ts + 1e-9));
  r.cycles.reserve(static_cast<std::size_t>(cycleCount));
  r.plant.reserve(static_cast<std::size_t>(plantSteps));

  FallbackBuffer buffer;
  RelaxationMonitor monitor;
  RelaxationLevel level = RelaxationLevel::Normal;
  SteeringInput command;
  TacticalParameters tactical = s.mpc.tactical;
  bool braking = false;

  if (contourCollides(plant, veh, r.world)) {
    r.collision = true;
    r.collisionTime = 0.0;
  }

  long cycle = 0;
  for (long step = 0; step < plantSteps; ++step) {
    if (step % ratio == 0 && cycle < cycleCount) {
      const double t = static_cast<double>(cycle) * Ts;
      ++cycle;

      std::vector<DegradationReport> degradations;
      bool forced = false;
      for (const auto& ev : s.events) {
        if (ev.type == EventType::Degradation && ev.t <= t + 1e-9) degradations.push_back(ev.degradation);
        if (ev.type == EventType::ForceInfeasible && t >= ev.t - 1e-9 && t < ev.t + ev.cycles * Ts - 1e-9) {
          forced = true;
        }
      }
      tactical = assembleTactical(s.mpc.tactical.comfortProfile, degradations, s.mpc.tactical);
      MpcConfig cfg = s.mpc;
      cfg.tactical = tactical;

      const FrenetSample fs = measureFrenet(ref, plant.pose().position());
      const double speed = plant.speed();
      LpvState x0;
      // Near standstill slip and yaw rate only reflect steering kinematics.
      const bool moving = speed > 0.05;
      x0.beta = moving ? std::atan2(plant.vy, plant.vx) : 0.0;
      x0.yawRate = moving ? plant.yawRate : 0.0;
      x0.dPsi = wrapAngle(plant.psi - fs.headingRef);
      x0.e = fs.e;

      // Arc-length stations: advance along the previous plan where one exists.
      const double vModel = std::max(speed, kLpvSpeedFloor);
      std::vector<LpvState> guide;
      if (buffer.hasTrajectory()) {
        const PlannedTrajectory tail = shiftedTail(*buffer.trajectory(), t);
        if (!tail.emergencyStop) guide = tail.states;
      }
      std::vector<double> stations(static_cast<std::size_t>(p) + 1);
      stations[0] = fs.s;
      for (int i = 1; i <= p; ++i) {
        double heading = 0.0;
        if (static_cast<std::size_t>(i) < guide.size()) {
          heading = guide[static_cast<std::size_t>(i - 1)].dPsi + guide[static_cast<std::size_t>(i - 1)].beta;
        }
        const double ds = vModel * Ts * std::max(std::cos(heading), 0.0);
        stations[static_cast<std::size_t>(i)] = std::min(stations[static_cast<std::size_t>(i - 1)] + ds, pathLength);
      }
      const std::vector<double> samples(stations.begin() + 1, stations.end());
      const std::vector<double> turns = referenceDisturbance(ref, stations);

      PlanRequest req;
      req.t0 = t;
      req.x0 = x0;
      req.speed = speed;
      req.uPrev = command;
      req.disturbance.resize(p);
      req.references = Eigen::MatrixXd::Zero(p, kTrackedOutputs);
      for (int i = 0; i < p; ++i) {
        const auto k = static_cast<std::size_t>(i);
        req.disturbance(i) = turns[k + 1] / Ts;
        if (s.guidance.terminalHeadingBlend > 0.0 && pathLength - samples[k] <= s.guidance.terminalHeadingBlend) {
          const double target = wrapAngle(s.goal.heading - ref.headingAt(samples[k]));
          req.references(i, 0) = -target;
          req.references(i, 2) = target;
        }
      }

      auto prepare = [&](Corridor c) {
        markCollapsedHard(c);
        if (forced) injectCollapse(c);
        return c;
      };
      const RelaxedLimits limits = RelaxedLimits::uniform(static_cast<std::size_t>(p), s.emergencyMin, s.emergencyMax);
      Corridor base = buildCorridorUnchecked(ref, corridorWorld, s.legalLines, s.corridor, samples, veh.lF, veh.lR);
      if (level == RelaxationLevel::Emergency) base = relaxCorridor(base, limits);
      req.corridor = prepare(base);

      PlanResult result = planStep(req, veh, cfg);
      double solveTime = result.report.solveTime;
      bool relaxedNow = false;
      // Injected windows exercise the fallback only; they never escalate.
      if (!forced && monitor.update(result.report, req.corridor)) {
        RelaxationEvent ev;
        ev.t = t;
        ev.normal = req.corridor;
        ev.normalStatus = result.report.status;
        req.corridor = prepare(relaxCorridor(base, limits));
        level = RelaxationLevel::Emergency;
        relaxedNow = true;
        result = planStep(req, veh, cfg);
        solveTime += result.report.solveTime;
        monitor.update(result.report, req.corridor);
        ev.emergency = req.corridor;
        ev.emergencyStatus = result.report.status;
        r.relaxations.push_back(std::move(ev));
      }

      CycleRecord rec;
      rec.t = t;
      rec.status = result.report.status;
      rec.objective = result.trajectory.objective;
      rec.iterations = result.report.iterations;
      rec.solveTime = solveTime;
      rec.slackMax = result.trajectory.slackMax;
      rec.level = req.corridor.level;
      rec.forcedInfeasible = forced;
      rec.relaxed = relaxedNow;
      rec.s = fs.s;
      rec.e = fs.e;
      rec.eMin = req.corridor.center.lower.front();
      rec.eMax = req.corridor.center.upper.front();
      rec.speed = speed;
      try {
        rec.active = buffer.select(result.report, result.trajectory, t);
      } catch (const NoFallbackAvailable& e) {
        r.planningFailed = true;
        r.diagnostic = std::string(e.what()) + " at t=" + std::to_string(t);
        r.cycles.push_back(std::move(rec));
        break;
      }
      rec.fallback = result.report.status != SolveStatus::Optimal;
      rec.emergencyStop = rec.active.emergencyStop;
      braking = braking || rec.emergencyStop;
      command = rec.active.inputs.front();
      rec.command = command;
      r.cycles.push_back(std::move(rec));
    }

    // Longitudinal P controller on the wheel torques; never drives backwards.
    const double t = static_cast<double>(step) * s.plantDt;
    double vTarget = 0.0;
    if (!braking) {
      const double remaining = pathLength - projectToFrenet(ref, plant.pose().position()).s;
      // Plan the stop with half the available deceleration so the P
      // controller keeps authority in reserve.
      vTarget = std::min(s.speedAt(t), std::sqrt(s.maxDecel * std::max(remaining, 0.0)));
    }
    double force = veh.mass * s.speedGain * (vTarget - plant.vx);
    force = std::clamp(force, -veh.mass * s.maxDecel, veh.mass * s.maxDecel);
    if (force < 0.0) force *= std::clamp(plant.vx / 0.05, 0.0, 1.0);
    PlantCommand cmd;
    cmd.deltaF = command.deltaF;
    cmd.deltaR = command.deltaR;
    cmd.maxRateF = steeringRateLimit(tactical.rateF);
    cmd.maxRateR = steeringRateLimit(tactical.rateR);
    cmd.wheelTorques.fill(0.25 * force * veh.wheelRadius);
    plant = plantStep(plant, cmd, s.plantDt, veh);
    const double tNext = static_cast<double>(step + 1) * s.plantDt;
    r.plant.push_back({tNext, plant, command});
    if (!r.collision && contourCollides(plant, veh, r.world)) {
      r.collision = true;
      r.collisionTime = tNext;
    }
  }

  r.finalPose = plant.pose();
  r.finalPositionError = (plant.pose().position() - s.goal.position()).norm();
  r.finalHeadingError = wrapAngle(plant.psi - s.goal.heading);
  r.finalInGoalRegion =
      !s.goalRegion.empty() && locatePoint(plant.pose().position(), s.goalRegion) != PointLocation::Outside;
  double total = 0.0;
  for (const auto& c : r.cycles) {
    if (c.status == SolveStatus::Optimal) r.maxSlack = std::max(r.maxSlack, c.slackMax);
    if (c.fallback) ++r.infeasibleCycles;
    if (c.emergencyStop) ++r.emergencyStops;
    total += c.solveTime;
    r.maxSolveTime = std::max(r.maxSolveTime, c.solveTime);
  }
  r.meanSolveTime = r.cycles.empty() ? 0.0 : total / static_cast<double>(r.cycles.size());
  r.relaxationRequests = monitor.requests();
  return r;
}

void writeCycleCsv(std::ostream& out, const RunResult& r, bool includeTiming) {
  out << "t,status,objective,iterations,solveTime,slackMax,relaxationLevel\n";
  char buf[256];
  for (const auto& c : r.cycles) {
    std::snprintf(buf, sizeof(buf), "%.17g,%s,%.17g,%d,%.17g,%.17g,%s\n", c.t, statusName(c.status), c.objective,
                  c.iterations, includeTiming ? c.solveTime : 0.0, c.slackMax, levelName(c.level));
    out << buf;
  }
}

void writePlantCsv(std::ostream& out, const RunResult& r) {
  out << "t,x,y,psi,vx,vy,yawRate,deltaF,deltaR,cmdF,cmdR\n";
  char buf[512];
  for (const auto& p : r.plant) {
    const auto& st = p.state;
    const double dF = 0.5 * (st.wheelAngles[0] + st.wheelAngles[1]);
    const double dR = 0.5 * (st.wheelAngles[2] + st.wheelAngles[3]);
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", p.t, st.x,
                  st.y, st.psi, st.vx, st.vy, st.yawRate, dF, dR, p.command.deltaF, p.command.deltaR);
    out << buf;
  }
}

double signAgreementRatio(const std::vector<SteeringInput>& inputs, double threshold) {
  int counted = 0;
  int agree = 0;
  for (const auto& u : inputs) {
    if (std::abs(u.deltaF) <= threshold || std::abs(u.deltaR) <= threshold) continue;
    ++counted;
    if (u.deltaF * u.deltaR > 0.0) ++agree;
  }
  return counted == 0 ? 0.0 : static_cast<double>(agree) / counted;
}

std::vector<ProfileRow> compareWeightProfiles(const Scenario& s, const std::vector<NamedProfile>& profiles,
                                              const RunOptions& options) {
  if (profiles.size() < 2) throw std::invalid_argument("comparison needs at least two profiles");
  std::vector<ProfileRow> rows;
  for (const auto& prof : profiles) {
    ProfileRow row;
    row.name = prof.name;
    Scenario variant = s;
    variant.mpc.tactical = prof.tactical;
    try {
      const RunResult r = runScenario(variant, options);
      row.failed = r.planningFailed;
      row.collision = r.collision;
      row.diagnostic = r.diagnostic;
      std::vector<SteeringInput> inputs;
      for (const auto& c : r.cycles) {
        inputs.push_back(c.command);
        row.maxDeltaF = std::max(row.maxDeltaF, std::abs(c.command.deltaF));
        row.maxDeltaR = std::max(row.maxDeltaR, std::abs(c.command.deltaR));
      }
      row.signAgreement = signAgreementRatio(inputs);
      for (const auto& p : r.plant) {
        row.maxYawRate = std::max(row.maxYawRate, std::abs(p.state.yawRate));
        if (p.state.speed() > 0.05) {
          row.maxBeta = std::max(row.maxBeta, std::abs(std::atan2(p.state.vy, p.state.vx)));
        }
      }
    } catch (const Error& e) {
      row.failed = true;
      row.diagnostic = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void writeComparisonTable(std::ostream& out, const std::vector<ProfileRow>& rows) {
  out << "profile,status,maxDeltaF,maxDeltaR,signAgreement,maxYawRate,maxBeta\n";
  char buf[512];
  for (const auto& row : rows) {
    const char* status = row.failed ? "failed" : (row.collision ? "collision" : "ok");
    std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.name.c_str(), status, row.maxDeltaF,
                  row.maxDeltaR, row.signAgreement, row.maxYawRate, row.maxBeta);
    out << buf;
  }
}

}  // namespace lpvplan
