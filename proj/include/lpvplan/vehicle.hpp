#pragma once

#include <array>
#include <string_view>

#include <Eigen/Core>

#include "lpvplan/world.hpp"

namespace lpvplan {

/// Physical vehicle description. The first block parameterizes the
/// single-track prediction model; the rest is used by the plant and the
/// collision contour only.
struct VehicleParams {
  double mass = 0.0;               ///< kg
  double yawInertia = 0.0;         ///< Jz, kg m^2
  double lF = 0.0;                 ///< CoG to front axle, m
  double lR = 0.0;                 ///< CoG to rear axle, m
  double corneringStiffnessF = 0.0;  ///< N/rad, whole axle
  double corneringStiffnessR = 0.0;  ///< N/rad, whole axle

  double trackWidth = 0.0;     ///< m
  double halfWidth = 0.0;      ///< m, collision contour
  double frontOverhang = 0.0;  ///< m beyond the front axle
  double rearOverhang = 0.0;   ///< m beyond the rear axle
  double wheelRadius = 0.3;    ///< m
  double friction = 1.0;       ///< mu
  double steerLag = 0.05;      ///< s, first-order actuator time constant
  double steerStop = 0.6;      ///< rad, mechanical limit of every wheel

  /// Throws std::invalid_argument unless every field is strictly positive.
  void validate() const;
  double wheelbase() const { return lF + lR; }
};

/// 1:5 scale model vehicle preset.
VehicleParams presetMax();
/// Full-scale vehicle preset.
VehicleParams presetMobile();
/// "MAX" or "MOBILE"; throws std::invalid_argument otherwise.
VehicleParams vehiclePreset(std::string_view name);

/// Speed below which the LPV matrices are evaluated at the floor value.
constexpr double kLpvSpeedFloor = 0.5;

using Matrix4d = Eigen::Matrix<double, 4, 4>;
using Matrix43d = Eigen::Matrix<double, 4, 3>;
using Matrix64d = Eigen::Matrix<double, 6, 4>;

/// State of the single-track prediction model.
struct LpvState {
  double beta = 0.0;     ///< side slip, rad
  double yawRate = 0.0;  ///< rad/s
  double dPsi = 0.0;     ///< heading relative to the reference, rad
  double e = 0.0;        ///< lateral deviation, m

  Eigen::Vector4d vector() const { return {beta, yawRate, dPsi, e}; }
  static LpvState fromVector(const Eigen::Vector4d& x) { return {x(0), x(1), x(2), x(3)}; }
};

struct ControlInput {
  double deltaF = 0.0;
  double deltaR = 0.0;
  double dPsiRef = 0.0;  ///< reference yaw rate disturbance, rad/s
};

struct LpvModel {
  Matrix4d A = Matrix4d::Zero();
  Matrix43d B = Matrix43d::Zero();
  double speed = 0.0;         ///< speed the matrices were evaluated at
  bool speedClamped = false;  ///< requested speed was below kLpvSpeedFloor
};

/// Continuous-time LPV single-track matrices A(v), B(v). The third input
/// column is the reference yaw-rate disturbance.
LpvModel lpvMatrices(const VehicleParams& p, double speed);

/// Output map y = C x with y = (beta, yawRate, dPsi, e, eFront, eRear); the
/// contour rows are the small-angle form of e +/- l sin(dPsi).
Matrix64d outputMatrix(const VehicleParams& p);

struct DiscreteModel {
  Eigen::MatrixXd Ad;
  Eigen::MatrixXd Bd;
};

/// Zero-order-hold discretization via the exponential of [[A, B], [0, 0]] Ts.
DiscreteModel discretize(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double Ts);

/// Matrix exponential by scaling and squaring with a Taylor series truncated
/// once a term's norm drops below 1e-14.
Eigen::MatrixXd expm(const Eigen::MatrixXd& M);

// --- double-track plant ------------------------------------------------------

/// Wheel order: front-left, front-right, rear-left, rear-right.
struct PlantState {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double vx = 0.0;  ///< body frame
  double vy = 0.0;  ///< body frame
  double yawRate = 0.0;
  std::array<double, 4> wheelAngles{0.0, 0.0, 0.0, 0.0};

  Pose2 pose() const { return {x, y, psi}; }
  double speed() const;
};

struct PlantCommand {
  double deltaF = 0.0;
  double deltaR = 0.0;
  std::array<double, 4> wheelTorques{0.0, 0.0, 0.0, 0.0};  ///< N m
  double maxRateF = 1.0;  ///< actuator slew limit, rad/s
  double maxRateR = 1.0;
};

/// One RK4 step of the nonlinear double-track model. Lateral tire forces are
/// linear in slip angle and clipped at mu*Fz with a static axle-load split;
/// steering follows rate-limited first-order lags. Requires 0 < dt <= 2 ms.
PlantState plantStep(const PlantState& state, const PlantCommand& cmd, double dt, const VehicleParams& p);

/// Corners of the oriented vehicle rectangle, counter-clockwise.
Polygon vehicleContour(const Pose2& pose, const VehicleParams& p);

/// True iff the vehicle rectangle touches any (un-inflated) obstacle.
bool contourCollides(const PlantState& state, const VehicleParams& p, const PolygonalWorld& world);
bool contourCollides(const Pose2& pose, const VehicleParams& p, const PolygonalWorld& world);

}  // namespace lpvplan
