#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "lpvplan/guidance.hpp"
#include "lpvplan/qp.hpp"
#include "lpvplan/vehicle.hpp"

namespace lpvplan {

struct MpcConfig {
  int horizon = 20;  ///< prediction (= control) horizon p
  double Ts = 0.1;   ///< s
  TacticalParameters tactical;
  double slackWeight = 1e4;
  int maxSolveIterations = 100;
  double kktTolerance = 1e-6;

  void validate() const;
};

/// Number of outputs of the prediction model (beta, yawRate, dPsi, e, eF, eR).
constexpr int kOutputs = 6;
/// Outputs with tracking weights (beta, yawRate, dPsi, e).
constexpr int kTrackedOutputs = 4;

/// Condensed horizon operators: Y = Phi x0 + Gamma U + GammaD D, where Y
/// stacks the six outputs for steps 1..p, U stacks (deltaF, deltaR) for steps
/// 0..p-1 and D stacks the disturbance for steps 0..p-1.
struct Prediction {
  int horizon = 0;
  Eigen::MatrixXd Phi;
  Eigen::MatrixXd Gamma;
  Eigen::MatrixXd GammaD;
};

Prediction buildPrediction(const Eigen::MatrixXd& Ad, const Eigen::MatrixXd& Bd, const Eigen::MatrixXd& C, int horizon);

/// Stacked outputs for the given initial state, inputs and disturbance.
Eigen::VectorXd predictOutputs(const Prediction& pred, const Eigen::Vector4d& x0, const Eigen::VectorXd& U,
                               const Eigen::VectorXd& D);

/// Decision vector layout: [dF_0, dR_0, ..., dF_{p-1}, dR_{p-1}, slack_1..slack_p].
inline int inputIndex(int step, int axle) { return 2 * step + axle; }
inline int slackIndex(int horizon, int step) { return 2 * horizon + step; }
inline int decisionSize(int horizon) { return 3 * horizon; }

/// Everything the cost and constraint builders need besides the operators.
struct HorizonData {
  Eigen::Vector4d x0 = Eigen::Vector4d::Zero();
  Eigen::VectorXd disturbance;  ///< p entries, reference yaw rate per step
  Eigen::MatrixXd references;   ///< p x 4: targets for (beta, yawRate, dPsi, e)
  Eigen::Vector2d uPrev = Eigen::Vector2d::Zero();
};

/// J(z) = 1/2 z'Hz + g'z + constant.
struct QuadraticCost {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  double constant = 0.0;

  double evaluate(const Eigen::VectorXd& z) const { return 0.5 * z.dot(H * z) + g.dot(z) + constant; }
};

/// Expands output tracking, absolute input and input-change costs (weights
/// enter squared) plus slackWeight * sum(slack^2) into a quadratic form.
QuadraticCost buildCost(const Prediction& pred, const HorizonData& data, const TacticalParameters& tactical,
                        double slackWeight);

struct ConstraintRows {
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  std::vector<bool> soft;  ///< row carries a slack variable
};

/// Output rows (beta, yawRate, e, eF, eR) are soft with one shared slack per
/// step unless the corridor marks that step hard; steering angle and rate
/// rows are hard. An angle box that excludes the applied input is widened
/// per step to the envelope the rate limit can reach. Infinite bounds
/// produce no row.
ConstraintRows buildConstraints(const Prediction& pred, const HorizonData& data, const Corridor& corridor,
                                const TacticalParameters& tactical, double Ts);

struct SteeringInput {
  double deltaF = 0.0;
  double deltaR = 0.0;
};

struct PlannedTrajectory {
  double t0 = 0.0;
  std::vector<LpvState> states;        ///< steps 0..p
  std::vector<SteeringInput> inputs;   ///< steps 0..p-1
  bool feasible = false;
  double objective = 0.0;
  double validUntil = 0.0;
  double Ts = 0.0;
  bool emergencyStop = false;
  double slackMax = 0.0;
};

struct PlanRequest {
  double t0 = 0.0;
  LpvState x0;
  Corridor corridor;
  Eigen::VectorXd disturbance;  ///< p entries, rad/s
  Eigen::MatrixXd references;   ///< p x 4
  SteeringInput uPrev;
  double speed = 0.0;
};

struct PlanResult {
  PlannedTrajectory trajectory;
  SolveReport report;
  bool speedClamped = false;
};

/// One receding-horizon solve at frozen speed. A non-optimal solve yields
/// feasible == false; the caller's fallback buffer is not touched here.
PlanResult planStep(const PlanRequest& request, const VehicleParams& vehicle, const MpcConfig& cfg);

/// Owns the last feasible trajectory and decides what the plant follows.
class FallbackBuffer {
 public:
  bool hasTrajectory() const { return buffer_.has_value(); }
  const std::optional<PlannedTrajectory>& trajectory() const { return buffer_; }

  /// Optimal: stores and returns `candidate` (validUntil = now + p*Ts).
  /// Otherwise returns the buffered trajectory shifted to `now`; past
  /// validUntil the last input is frozen and emergencyStop is set.
  /// Throws NoFallbackAvailable when nothing was ever stored.
  PlannedTrajectory select(const SolveReport& current, const PlannedTrajectory& candidate, double now);

 private:
  std::optional<PlannedTrajectory> buffer_;
};

/// Tail of `buffer` starting at the step matching `now`.
PlannedTrajectory shiftedTail(const PlannedTrajectory& buffer, double now);

struct RelaxationRequest {
  RelaxationLevel from = RelaxationLevel::Normal;
  RelaxationLevel to = RelaxationLevel::Emergency;
};

/// Request iff the solve was certified infeasible on a Normal corridor.
std::optional<RelaxationRequest> requestRelaxation(const SolveReport& report, const Corridor& corridor);

/// Stateful wrapper limiting escalation to one request per infeasibility
/// episode (an episode ends with the next optimal solve).
class RelaxationMonitor {
 public:
  std::optional<RelaxationRequest> update(const SolveReport& report, const Corridor& corridor);
  int requests() const { return requests_; }

 private:
  bool escalated_ = false;
  int requests_ = 0;
};

}  // namespace lpvplan
