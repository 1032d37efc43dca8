#include "lpvplan/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lpvplan {

void VehicleParams::validate() const {
  const double fields[] = {mass,       yawInertia,   lF,           lR,          corneringStiffnessF,
                           corneringStiffnessR, trackWidth, halfWidth, frontOverhang, rearOverhang,
                           wheelRadius, friction,     steerLag,     steerStop};
  for (double f : fields) {
    if (!(f > 0.0) || !std::isfinite(f)) throw std::invalid_argument("vehicle parameters must be finite and > 0");
  }
}

VehicleParams presetMax() {
  VehicleParams p;
  p.mass = 25.0;
  p.yawInertia = 1.8;
  p.lF = 0.28;
  p.lR = 0.28;
  p.corneringStiffnessF = 1500.0;
  p.corneringStiffnessR = 1500.0;
  p.trackWidth = 0.38;
  p.halfWidth = 0.22;
  p.frontOverhang = 0.12;
  p.rearOverhang = 0.12;
  p.wheelRadius = 0.07;
  p.friction = 1.0;
  p.steerLag = 0.05;
  p.steerStop = 0.6;
  return p;
}

VehicleParams presetMobile() {
  VehicleParams p;
  p.mass = 1500.0;
  p.yawInertia = 2400.0;
  p.lF = 1.25;
  p.lR = 1.35;
  p.corneringStiffnessF = 7.0e4;
  p.corneringStiffnessR = 7.0e4;
  p.trackWidth = 1.55;
  p.halfWidth = 0.9;
  p.frontOverhang = 0.7;
  p.rearOverhang = 0.6;
  p.wheelRadius = 0.31;
  p.friction = 1.0;
  p.steerLag = 0.05;
  p.steerStop = 0.6;
  return p;
}

VehicleParams vehiclePreset(std::string_view name) {
  if (name == "MAX") return presetMax();
  if (name == "MOBILE") return presetMobile();
  throw std::invalid_argument("unknown vehicle preset '" + std::string(name) + "'");
}

LpvModel lpvMatrices(const VehicleParams& p, double speed) {
  LpvModel model;
  model.speedClamped = !(speed >= kLpvSpeedFloor);
  const double v = model.speedClamped ? kLpvSpeedFloor : speed;
  model.speed = v;
  const double m = p.mass;
  const double jz = p.yawInertia;
  const double cf = p.corneringStiffnessF;
  const double cr = p.corneringStiffnessR;
  const double lf = p.lF;
  const double lr = p.lR;

  Matrix4d& A = model.A;
  A(0, 0) = -(cf + cr) / (m * v);
  A(0, 1) = (cr * lr - cf * lf) / (m * v * v) - 1.0;
  A(1, 0) = -(cf * lf - cr * lr) / jz;
  A(1, 1) = -(cf * lf * lf + cr * lr * lr) / (jz * v);
  A(2, 1) = 1.0;
  A(3, 0) = v;
  A(3, 2) = v;

  Matrix43d& B = model.B;
  B(0, 0) = cf / (m * v);
  B(0, 1) = cr / (m * v);
  B(1, 0) = cf * lf / jz;
  // The rear lateral force acts behind the CoG, so rear steering yaws the
  // vehicle opposite to front steering.
  B(1, 1) = -cr * lr / jz;
  B(2, 2) = -1.0;
  return model;
}

Matrix64d outputMatrix(const VehicleParams& p) {
  Matrix64d C = Matrix64d::Zero();
  C.topRows<4>().setIdentity();
  C(4, 2) = p.lF;
  C(4, 3) = 1.0;
  C(5, 2) = -p.lR;
  C(5, 3) = 1.0;
  return C;
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& M) {
  const Eigen::Index n = M.rows();
  const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Eigen::MatrixXd X = M / std::ldexp(1.0, squarings);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k < 60; ++k) {
    term = term * X / static_cast<double>(k);
    sum += term;
    if (term.norm() < 1e-14) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

DiscreteModel discretize(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double Ts) {
  if (!(Ts > 0.0)) throw std::invalid_argument("sample time must be positive");
  if (A.rows() != A.cols() || B.rows() != A.rows()) throw std::invalid_argument("inconsistent A/B dimensions");
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + m, n + m);
  M.topLeftCorner(n, n) = A * Ts;
  M.topRightCorner(n, m) = B * Ts;
  const Eigen::MatrixXd E = expm(M);
  return {E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

double PlantState::speed() const { return std::hypot(vx, vy); }

namespace {

constexpr double kGravity = 9.81;
// Longitudinal wheel speed below which slip angles are evaluated at this
// floor; keeps the tire law bounded near standstill.
constexpr double kSlipSpeedFloor = 0.1;

struct Derivative {
  double x, y, psi, vx, vy, r, dF, dR;
};

struct Integrated {
  double x, y, psi, vx, vy, r, dF, dR;
};

double actuatorRate(double angle, double target, double maxRate, const VehicleParams& p) {
  const double goal = std::clamp(target, -p.steerStop, p.steerStop);
  double rate = (goal - angle) / p.steerLag;
  rate = std::clamp(rate, -maxRate, maxRate);
  if ((angle >= p.steerStop && rate > 0.0) || (angle <= -p.steerStop && rate < 0.0)) rate = 0.0;
  return rate;
}

Derivative dynamics(const Integrated& s, const PlantCommand& cmd, const VehicleParams& p) {
  const double wheelbase = p.wheelbase();
  const double fzFront = 0.5 * p.mass * kGravity * p.lR / wheelbase;
  const double fzRear = 0.5 * p.mass * kGravity * p.lF / wheelbase;
  const double halfTrack = 0.5 * p.trackWidth;
  struct Wheel {
    double x, y, delta, stiffness, fz;
  };
  const Wheel wheels[4] = {
      {p.lF, halfTrack, s.dF, 0.5 * p.corneringStiffnessF, fzFront},
      {p.lF, -halfTrack, s.dF, 0.5 * p.corneringStiffnessF, fzFront},
      {-p.lR, halfTrack, s.dR, 0.5 * p.corneringStiffnessR, fzRear},
      {-p.lR, -halfTrack, s.dR, 0.5 * p.corneringStiffnessR, fzRear},
  };
  double fxSum = 0.0;
  double fySum = 0.0;
  double mz = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Wheel& w = wheels[i];
    const double vwx = s.vx - s.r * w.y;
    const double vwy = s.vy + s.r * w.x;
    const double c = std::cos(w.delta);
    const double sn = std::sin(w.delta);
    const double along = c * vwx + sn * vwy;
    const double across = -sn * vwx + c * vwy;
    const double slip = -std::atan(across / std::max(along, kSlipSpeedFloor));
    const double limit = p.friction * w.fz;
    const double fyWheel = std::clamp(w.stiffness * slip, -limit, limit);
    const double fxWheel = std::clamp(cmd.wheelTorques[i] / p.wheelRadius, -limit, limit);
    const double fx = fxWheel * c - fyWheel * sn;
    const double fy = fxWheel * sn + fyWheel * c;
    fxSum += fx;
    fySum += fy;
    mz += w.x * fy - w.y * fx;
  }
  Derivative d{};
  d.x = s.vx * std::cos(s.psi) - s.vy * std::sin(s.psi);
  d.y = s.vx * std::sin(s.psi) + s.vy * std::cos(s.psi);
  d.psi = s.r;
  d.vx = fxSum / p.mass + s.r * s.vy;
  d.vy = fySum / p.mass - s.r * s.vx;
  d.r = mz / p.yawInertia;
  d.dF = actuatorRate(s.dF, cmd.deltaF, cmd.maxRateF, p);
  d.dR = actuatorRate(s.dR, cmd.deltaR, cmd.maxRateR, p);
  return d;
}

Integrated advance(const Integrated& s, const Derivative& d, double h) {
  return {s.x + h * d.x,   s.y + h * d.y, s.psi + h * d.psi, s.vx + h * d.vx,
          s.vy + h * d.vy, s.r + h * d.r, s.dF + h * d.dF,   s.dR + h * d.dR};
}

}  // namespace

PlantState plantStep(const PlantState& state, const PlantCommand& cmd, double dt, const VehicleParams& p) {
  if (!(dt > 0.0 && dt <= 2e-3 + 1e-15)) throw std::invalid_argument("plant step must lie in (0, 2 ms]");
  const Integrated s0{state.x,  state.y,       state.psi,           state.vx,
                      state.vy, state.yawRate, state.wheelAngles[0], state.wheelAngles[2]};
  const Derivative k1 = dynamics(s0, cmd, p);
  const Derivative k2 = dynamics(advance(s0, k1, 0.5 * dt), cmd, p);
  const Derivative k3 = dynamics(advance(s0, k2, 0.5 * dt), cmd, p);
  const Derivative k4 = dynamics(advance(s0, k3, dt), cmd, p);
  Derivative avg{};
  avg.x = (k1.x + 2 * k2.x + 2 * k3.x + k4.x) / 6.0;
  avg.y = (k1.y + 2 * k2.y + 2 * k3.y + k4.y) / 6.0;
  avg.psi = (k1.psi + 2 * k2.psi + 2 * k3.psi + k4.psi) / 6.0;
  avg.vx = (k1.vx + 2 * k2.vx + 2 * k3.vx + k4.vx) / 6.0;
  avg.vy = (k1.vy + 2 * k2.vy + 2 * k3.vy + k4.vy) / 6.0;
  avg.r = (k1.r + 2 * k2.r + 2 * k3.r + k4.r) / 6.0;
  avg.dF = (k1.dF + 2 * k2.dF + 2 * k3.dF + k4.dF) / 6.0;
  avg.dR = (k1.dR + 2 * k2.dR + 2 * k3.dR + k4.dR) / 6.0;
  const Integrated s1 = advance(s0, avg, dt);

  PlantState out;
  out.x = s1.x;
  out.y = s1.y;
  out.psi = s1.psi;
  out.vx = s1.vx;
  out.vy = s1.vy;
  out.yawRate = s1.r;
  const double dF = std::clamp(s1.dF, -p.steerStop, p.steerStop);
  const double dR = std::clamp(s1.dR, -p.steerStop, p.steerStop);
  out.wheelAngles = {dF, dF, dR, dR};
  return out;
}

Polygon vehicleContour(const Pose2& pose, const VehicleParams& p) {
  const double front = p.lF + p.frontOverhang;
  const double rear = -(p.lR + p.rearOverhang);
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  auto place = [&](double lx, double ly) { return Vec2(pose.x + c * lx - s * ly, pose.y + s * lx + c * ly); };
  return {place(rear, -p.halfWidth), place(front, -p.halfWidth), place(front, p.halfWidth),
          place(rear, p.halfWidth)};
}

bool contourCollides(const Pose2& pose, const VehicleParams& p, const PolygonalWorld& world) {
  const Polygon body = vehicleContour(pose, p);
  for (const auto& poly : world.obstacles()) {
    if (polygonsOverlap(body, poly)) return true;
  }
  return false;
}

bool contourCollides(const PlantState& state, const VehicleParams& p, const PolygonalWorld& world) {
  return contourCollides(Pose2(state.x, state.y, state.psi), p, world);
}

}  // namespace lpvplan
