// lpvplan command line: run, compare and validate scenario files.
//
// Exit codes: 0 success, 1 usage or scenario error, 2 collision,
// 3 planning failure.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lpvplan/errors.hpp"
#include "lpvplan/harness.hpp"
#include "lpvplan/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCollision = 2;
constexpr int kExitPlanningFailure = 3;

void printSummary(const lpvplan::RunResult& r) {
  std::printf("scenario        %s\n", r.scenario.c_str());
  std::printf("cycles          %zu\n", r.cycles.size());
  std::printf("collision       %s\n", r.collision ? "yes" : "no");
  if (r.collision) std::printf("collision time  %.3f s\n", r.collisionTime);
  std::printf("final pose      (%.4f, %.4f, %.4f rad)\n", r.finalPose.x, r.finalPose.y, r.finalPose.heading);
  std::printf("position error  %.4f m\n", r.finalPositionError);
  std::printf("heading error   %.4f rad\n", r.finalHeadingError);
  if (!r.goalRegion.empty()) std::printf("in goal region  %s\n", r.finalInGoalRegion ? "yes" : "no");
  std::printf("max slack       %.3g\n", r.maxSlack);
  std::printf("infeasible      %d\n", r.infeasibleCycles);
  std::printf("emergency stops %d\n", r.emergencyStops);
  std::printf("relaxations     %d\n", r.relaxationRequests);
  std::printf("solve time      mean %.3f ms, max %.3f ms\n", 1e3 * r.meanSolveTime, 1e3 * r.maxSolveTime);
}

int runCommand(const std::string& file, const std::string& outDir, const std::optional<std::uint64_t>& seed,
               bool timing) {
  const lpvplan::Scenario s = lpvplan::loadScenario(file);
  lpvplan::RunOptions opt;
  opt.seed = seed;
  opt.recordTiming = timing;
  const lpvplan::RunResult r = lpvplan::runScenario(s, opt);
  printSummary(r);
  const std::string dir = outDir.empty() ? "out/" + (s.name.empty() ? std::string("run") : s.name) : outDir;
  for (const auto& f : lpvplan::emitPlots(r, dir, timing)) std::printf("wrote %s\n", f.string().c_str());
  if (r.planningFailed) {
    std::fprintf(stderr, "planning failed: %s\n", r.diagnostic.c_str());
    return kExitPlanningFailure;
  }
  return r.collision ? kExitCollision : kExitOk;
}

int compareCommand(const std::string& file, const std::string& profilesFile,
                   const std::optional<std::uint64_t>& seed) {
  const lpvplan::Scenario s = lpvplan::loadScenario(file);
  const auto profiles = lpvplan::loadProfiles(profilesFile, s.mpc.tactical);
  lpvplan::RunOptions opt;
  opt.seed = seed;
  const auto rows = lpvplan::compareWeightProfiles(s, profiles, opt);
  lpvplan::writeComparisonTable(std::cout, rows);
  bool collision = false;
  bool failed = false;
  for (const auto& row : rows) {
    collision = collision || row.collision;
    failed = failed || row.failed;
  }
  if (failed) return kExitPlanningFailure;
  return collision ? kExitCollision : kExitOk;
}

int validateCommand(const std::string& file) {
  const lpvplan::Scenario s = lpvplan::loadScenario(file);
  std::printf("%s: ok (schemaVersion %d)\n", file.c_str(), s.schemaVersion);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage trajectory planner with LPV model predictive control"};
  app.require_subcommand(1);

  std::string scenarioFile;
  std::string outDir;
  std::string profilesFile;
  std::optional<std::uint64_t> seed;
  bool timing = false;

  auto* run = app.add_subcommand("run", "Simulate a scenario in closed loop");
  run->add_option("scenario", scenarioFile, "Scenario file")->required();
  run->add_option("--out", outDir, "Directory for plots and traces (default out/<scenario name>)");
  run->add_option("--seed", seed, "Overrides the scenario seed");
  run->add_flag("--timing", timing, "Write wall-clock solve times into the cycle trace");

  auto* compare = app.add_subcommand("compare", "Run a scenario once per weight profile");
  compare->add_option("scenario", scenarioFile, "Scenario file")->required();
  compare->add_option("--profiles", profilesFile, "Profile file")->required();
  compare->add_option("--seed", seed, "Overrides the scenario seed");

  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("scenario", scenarioFile, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return runCommand(scenarioFile, outDir, seed, timing);
    if (*compare) return compareCommand(scenarioFile, profilesFile, seed);
    return validateCommand(scenarioFile);
  } catch (const lpvplan::ScenarioError& e) {
    std::fprintf(stderr, "invalid scenario: %s\n", e.what());
    return kExitUsage;
  } catch (const lpvplan::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kExitUsage;
  } catch (const lpvplan::Error& e) {
    std::fprintf(stderr, "planning failed: %s\n", e.what());
    return kExitPlanningFailure;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitUsage;
  }
}
