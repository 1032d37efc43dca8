#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lpvplan/guidance.hpp"
#include "lpvplan/mpc.hpp"
#include "lpvplan/scenario.hpp"
#include "lpvplan/vehicle.hpp"
#include "lpvplan/world.hpp"

namespace lpvplan {

/// One MPC cycle.
struct CycleRecord {
  double t = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  double objective = 0.0;
  int iterations = 0;
  double solveTime = 0.0;  ///< s
  double slackMax = 0.0;
  RelaxationLevel level = RelaxationLevel::Normal;

  bool fallback = false;       ///< plant follows a buffered trajectory
  bool emergencyStop = false;
  bool forcedInfeasible = false;
  bool relaxed = false;        ///< a relaxation was performed in this cycle
  SteeringInput command;       ///< input applied until the next cycle
  double s = 0.0;
  double e = 0.0;
  double eMin = 0.0;  ///< corridor bounds of the first prediction step
  double eMax = 0.0;
  double speed = 0.0;
  /// Trajectory the plant follows after this cycle.
  PlannedTrajectory active;
};

/// One plant integration step (state after the step).
struct PlantRecord {
  double t = 0.0;
  PlantState state;
  SteeringInput command;
};

/// Corridor snapshot around a relaxation.
struct RelaxationEvent {
  double t = 0.0;
  Corridor normal;
  Corridor emergency;
  SolveStatus normalStatus = SolveStatus::Infeasible;
  SolveStatus emergencyStatus = SolveStatus::Infeasible;
};

struct RunResult {
  std::string scenario;
  bool planningFailed = false;
  std::string diagnostic;

  bool collision = false;
  double collisionTime = 0.0;
  Pose2 finalPose;
  double finalPositionError = 0.0;  ///< m, to the goal position
  double finalHeadingError = 0.0;   ///< rad, wrapped
  bool finalInGoalRegion = false;
  double maxSlack = 0.0;
  int infeasibleCycles = 0;  ///< cycles that ended on the fallback
  int emergencyStops = 0;    ///< cycles flagged emergency stop
  int relaxationRequests = 0;
  double meanSolveTime = 0.0;
  double maxSolveTime = 0.0;

  PolygonalWorld world;
  LegalLines legalLines;
  Polygon goalRegion;
  VehicleParams vehicle;
  std::vector<Vec2> reference;
  std::vector<CycleRecord> cycles;
  std::vector<PlantRecord> plant;
  std::vector<RelaxationEvent> relaxations;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  ///< overrides the scenario seed
  /// Keep per-cycle wall-clock solve times in the trace. Off by default so
  /// that trace files are reproducible byte for byte.
  bool recordTiming = false;
};

/// World assembled from the scenario's polygons, grid and random obstacles.
PolygonalWorld buildScenarioWorld(const Scenario& s, std::uint64_t seed);

/// Closed-loop simulation: guidance once, MPC at Ts, plant at plantDt.
/// Planning errors (no path, no fallback) are reported in the result.
RunResult runScenario(const Scenario& s, const RunOptions& options = {});

/// cycles.csv columns: t,status,objective,iterations,solveTime,slackMax,relaxationLevel
void writeCycleCsv(std::ostream& out, const RunResult& r, bool includeTiming = false);
/// plant.csv columns: t,x,y,psi,vx,vy,yawRate,deltaF,deltaR,cmdF,cmdR
void writePlantCsv(std::ostream& out, const RunResult& r);

/// Writes trajectory.svg, steering.svg, corridor.svg, cycles.csv and
/// plant.csv into `outDir` (created if missing). Throws IoError.
std::vector<std::filesystem::path> emitPlots(const RunResult& r, const std::filesystem::path& outDir,
                                             bool includeTiming = false);

/// Fraction of samples with both steering angles above `threshold` in
/// magnitude whose signs agree. Zero when no sample qualifies.
double signAgreementRatio(const std::vector<SteeringInput>& inputs, double threshold = 1e-3);

struct ProfileRow {
  std::string name;
  bool failed = false;
  bool collision = false;
  std::string diagnostic;
  double maxDeltaF = 0.0;
  double maxDeltaR = 0.0;
  double signAgreement = 0.0;
  double maxYawRate = 0.0;
  double maxBeta = 0.0;
};

/// Runs the scenario once per profile (commanded steering per cycle is
/// evaluated). Needs at least two profiles.
std::vector<ProfileRow> compareWeightProfiles(const Scenario& s, const std::vector<NamedProfile>& profiles,
                                              const RunOptions& options = {});
void writeComparisonTable(std::ostream& out, const std::vector<ProfileRow>& rows);

}  // namespace lpvplan
