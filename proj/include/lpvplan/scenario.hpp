#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lpvplan/guidance.hpp"
#include "lpvplan/mpc.hpp"
#include "lpvplan/vehicle.hpp"
#include "lpvplan/world.hpp"

namespace lpvplan {

constexpr int kScenarioSchemaVersion = 1;

struct GridSource {
  std::filesystem::path file;
  Pose2 origin;
  double resolution = 0.1;
  double minArea = 0.0;
};

/// Seeded random convex obstacles placed inside `region`, kept clear of the
/// start and goal by `clearance`.
struct RandomObstacles {
  int count = 0;
  Box2 region;
  double minRadius = 0.2;
  double maxRadius = 0.5;
  double clearance = 1.0;
};

struct SpeedBreakpoint {
  double t = 0.0;  ///< s, profile value holds from here on
  double v = 0.0;  ///< m/s
};

struct GuidanceSettings {
  /// Added to the vehicle half-width for visibility-graph inflation.
  double inflationMargin = 0.15;
  double wStart = 1.0;  ///< m/rad
  double wEnd = 1.0;    ///< m/rad
  /// Within this distance of the path end, the heading target is the goal
  /// heading rather than the path heading. Zero disables.
  double terminalHeadingBlend = 0.0;
  /// Optional explicit reference polyline (skips the graph search).
  std::vector<Vec2> referencePath;
};

enum class EventType { Degradation, ForceInfeasible };

struct ScenarioEvent {
  double t = 0.0;
  EventType type = EventType::Degradation;
  DegradationReport degradation;  ///< Degradation only
  int cycles = 0;                 ///< ForceInfeasible only
};

struct Scenario {
  int schemaVersion = kScenarioSchemaVersion;
  std::string name;
  std::uint64_t seed = 0;

  std::vector<Polygon> obstacles;
  std::optional<Box2> bounds;  ///< derived from content when absent
  LegalLines legalLines;
  std::optional<GridSource> grid;
  RandomObstacles random;
  /// Target area used for scoring (e.g. a parking bay); may be empty.
  Polygon goalRegion;

  Pose2 start;
  Pose2 goal;
  VehicleParams vehicle = presetMax();

  /// mpc.tactical is the base parameter set; its comfortProfile selects the
  /// profile applied every cycle.
  MpcConfig mpc;
  CorridorSettings corridor;
  double emergencyMin = -3.0;  ///< relaxed lateral limits at emergency level
  double emergencyMax = 3.0;
  GuidanceSettings guidance;

  std::vector<SpeedBreakpoint> speedProfile{{0.0, 1.0}};
  double initialSpeed = 0.0;
  double maxDecel = 1.0;       ///< m/s^2, for stopping at the path end
  double speedGain = 4.0;      ///< 1/s, longitudinal P controller

  std::vector<ScenarioEvent> events;
  double duration = 10.0;
  double plantDt = 0.001;

  /// Directory relative paths (grid file) are resolved against.
  std::filesystem::path baseDir;

  /// Throws ScenarioError on inconsistent content.
  void validate() const;
  double speedAt(double t) const;
};

/// Parses a scenario document. Relative paths resolve against `baseDir`.
Scenario parseScenario(const std::string& text, const std::filesystem::path& baseDir = {});
Scenario loadScenario(const std::filesystem::path& file);

struct NamedProfile {
  std::string name;
  TacticalParameters tactical;
};
/// Reads tactical parameter sets for a comparison run. Each entry overrides
/// fields of `base`.
std::vector<NamedProfile> parseProfiles(const std::string& text, const TacticalParameters& base);
std::vector<NamedProfile> loadProfiles(const std::filesystem::path& file, const TacticalParameters& base);

}  // namespace lpvplan
