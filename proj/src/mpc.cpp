#include "lpvplan/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lpvplan/errors.hpp"

namespace lpvplan {

void MpcConfig::validate() const {
  if (horizon < 2) throw std::invalid_argument("MPC horizon must be >= 2");
  if (!(Ts > 0.0)) throw std::invalid_argument("MPC sample time must be positive");
  if (!(slackWeight >= 0.0)) throw std::invalid_argument("slack weight must be >= 0");
  if (maxSolveIterations < 1) throw std::invalid_argument("maxSolveIterations must be >= 1");
  if (!(kktTolerance > 0.0)) throw std::invalid_argument("kktTolerance must be positive");
  tactical.validate();
}

Prediction buildPrediction(const Eigen::MatrixXd& Ad, const Eigen::MatrixXd& Bd, const Eigen::MatrixXd& C,
                           int horizon) {
  const Eigen::Index nx = Ad.rows();
  const Eigen::Index ny = C.rows();
  if (Ad.cols() != nx || Bd.rows() != nx || Bd.cols() != 3 || C.cols() != nx) {
    throw std::invalid_argument("buildPrediction: inconsistent matrix dimensions");
  }
  if (horizon < 1) throw std::invalid_argument("buildPrediction: horizon must be >= 1");
  Prediction pred;
  pred.horizon = horizon;
  pred.Phi = Eigen::MatrixXd::Zero(ny * horizon, nx);
  pred.Gamma = Eigen::MatrixXd::Zero(ny * horizon, 2 * horizon);
  pred.GammaD = Eigen::MatrixXd::Zero(ny * horizon, horizon);

  // powers[k] = C * Ad^k
  std::vector<Eigen::MatrixXd> powers(horizon + 1);
  powers[0] = C;
  for (int k = 1; k <= horizon; ++k) powers[k] = powers[k - 1] * Ad;
  const Eigen::MatrixXd Bu = Bd.leftCols(2);
  const Eigen::VectorXd bd = Bd.col(2);
  for (int i = 0; i < horizon; ++i) {
    pred.Phi.middleRows(ny * i, ny) = powers[i + 1];
    for (int j = 0; j <= i; ++j) {
      pred.Gamma.block(ny * i, 2 * j, ny, 2) = powers[i - j] * Bu;
      pred.GammaD.block(ny * i, j, ny, 1) = powers[i - j] * bd;
    }
  }
  return pred;
}

Eigen::VectorXd predictOutputs(const Prediction& pred, const Eigen::Vector4d& x0, const Eigen::VectorXd& U,
                               const Eigen::VectorXd& D) {
  return pred.Phi * x0 + pred.Gamma * U + pred.GammaD * D;
}

namespace {

void checkHorizonData(const Prediction& pred, const HorizonData& data) {
  const int p = pred.horizon;
  if (data.disturbance.size() != p) throw std::invalid_argument("disturbance must have p entries");
  if (data.references.rows() != p || data.references.cols() != kTrackedOutputs) {
    throw std::invalid_argument("references must be p x 4");
  }
}

Eigen::VectorXd freeResponse(const Prediction& pred, const HorizonData& data) {
  return pred.Phi * data.x0 + pred.GammaD * data.disturbance;
}

}  // namespace

QuadraticCost buildCost(const Prediction& pred, const HorizonData& data, const TacticalParameters& tactical,
                        double slackWeight) {
  checkHorizonData(pred, data);
  const int p = pred.horizon;
  const int nz = decisionSize(p);
  const int nu = 2 * p;
  QuadraticCost cost;
  cost.H = Eigen::MatrixXd::Zero(nz, nz);
  cost.g = Eigen::VectorXd::Zero(nz);

  // Output tracking.
  const double wy[kTrackedOutputs] = {tactical.outputWeights.beta, tactical.outputWeights.yawRate,
                                      tactical.outputWeights.dPsi, tactical.outputWeights.e};
  const Eigen::VectorXd free = freeResponse(pred, data);
  Eigen::VectorXd wsq = Eigen::VectorXd::Zero(kOutputs * p);
  Eigen::VectorXd target = Eigen::VectorXd::Zero(kOutputs * p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < kTrackedOutputs; ++j) {
      const int r = kOutputs * i + j;
      wsq(r) = wy[j] * wy[j];
      target(r) = data.references(i, j) - free(r);
    }
  }
  const Eigen::MatrixXd WG = wsq.asDiagonal() * pred.Gamma;
  cost.H.topLeftCorner(nu, nu) += 2.0 * pred.Gamma.transpose() * WG;
  cost.g.head(nu) += -2.0 * WG.transpose() * target;
  cost.constant += target.dot(wsq.asDiagonal() * target);

  // Absolute steering (target series zero) and input changes.
  const double wu[2] = {tactical.inputWeights.front, tactical.inputWeights.rear};
  const double wd[2] = {tactical.rateWeights.front, tactical.rateWeights.rear};
  for (int i = 0; i < p; ++i) {
    for (int a = 0; a < 2; ++a) {
      const int k = inputIndex(i, a);
      cost.H(k, k) += 2.0 * wu[a] * wu[a];
      const double w2 = wd[a] * wd[a];
      cost.H(k, k) += 2.0 * w2;
      if (i == 0) {
        cost.g(k) += -2.0 * w2 * data.uPrev(a);
        cost.constant += w2 * data.uPrev(a) * data.uPrev(a);
      } else {
        const int km = inputIndex(i - 1, a);
        cost.H(km, km) += 2.0 * w2;
        cost.H(k, km) -= 2.0 * w2;
        cost.H(km, k) -= 2.0 * w2;
      }
    }
  }

  for (int i = 0; i < p; ++i) {
    const int k = slackIndex(p, i);
    cost.H(k, k) += 2.0 * slackWeight;
  }
  return cost;
}

namespace {

class RowBuilder {
 public:
  explicit RowBuilder(int nz) : nz_(nz) {}

  Eigen::RowVectorXd& add(double rhs, bool soft) {
    rows_.emplace_back(Eigen::RowVectorXd::Zero(nz_));
    rhs_.push_back(rhs);
    soft_.push_back(soft);
    return rows_.back();
  }

  ConstraintRows finish() const {
    ConstraintRows out;
    const auto m = static_cast<Eigen::Index>(rows_.size());
    out.G.resize(m, nz_);
    out.h.resize(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      out.G.row(r) = rows_[r];
      out.h(r) = rhs_[r];
    }
    out.soft = soft_;
    return out;
  }

 private:
  int nz_;
  std::vector<Eigen::RowVectorXd> rows_;
  std::vector<double> rhs_;
  std::vector<bool> soft_;
};

}  // namespace

ConstraintRows buildConstraints(const Prediction& pred, const HorizonData& data, const Corridor& corridor,
                                const TacticalParameters& tactical, double Ts) {
  checkHorizonData(pred, data);
  const int p = pred.horizon;
  if (corridor.steps() < static_cast<std::size_t>(p)) throw std::invalid_argument("corridor shorter than horizon");
  const int nz = decisionSize(p);
  const int nu = 2 * p;
  const Eigen::VectorXd free = freeResponse(pred, data);
  RowBuilder rows(nz);

  auto outputRows = [&](int step, int output, double lo, double hi, bool soft) {
    const int r = kOutputs * step + output;
    const Eigen::RowVectorXd gammaRow = pred.Gamma.row(r);
    if (std::isfinite(hi)) {
      auto& row = rows.add(hi - free(r), soft);
      row.head(nu) = gammaRow;
      if (soft) row(slackIndex(p, step)) = -1.0;
    }
    if (std::isfinite(lo)) {
      auto& row = rows.add(-lo + free(r), soft);
      row.head(nu) = -gammaRow;
      if (soft) row(slackIndex(p, step)) = -1.0;
    }
  };

  for (int i = 0; i < p; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const bool spatialSoft = corridor.hard.size() <= k || !corridor.hard[k];
    outputRows(i, 0, tactical.beta.min, tactical.beta.max, true);
    outputRows(i, 1, tactical.yawRate.min, tactical.yawRate.max, true);
    outputRows(i, 3, corridor.center.lower[k], corridor.center.upper[k], spatialSoft);
    outputRows(i, 4, corridor.front.lower[k], corridor.front.upper[k], spatialSoft);
    outputRows(i, 5, corridor.rear.lower[k], corridor.rear.upper[k], spatialSoft);
  }

  const Interval angle[2] = {tactical.deltaF, tactical.deltaR};
  const Interval rate[2] = {tactical.rateF, tactical.rateR};
  for (int i = 0; i < p; ++i) {
    for (int a = 0; a < 2; ++a) {
      const int k = inputIndex(i, a);
      // A box that shrank below the applied angle (degradation) is widened to
      // what the rate limit can reach by this step.
      const double reach = Ts * static_cast<double>(i + 1);
      const double hi = std::max(angle[a].max, data.uPrev(a) + rate[a].min * reach);
      const double lo = std::min(angle[a].min, data.uPrev(a) + rate[a].max * reach);
      if (std::isfinite(hi)) rows.add(hi, false)(k) = 1.0;
      if (std::isfinite(lo)) rows.add(-lo, false)(k) = -1.0;
      // (u_i - u_{i-1}) / Ts within the rate bounds; u_{-1} is the applied input.
      const double prev = i == 0 ? data.uPrev(a) : 0.0;
      if (std::isfinite(rate[a].max)) {
        auto& row = rows.add(rate[a].max * Ts + prev, false);
        row(k) = 1.0;
        if (i > 0) row(inputIndex(i - 1, a)) = -1.0;
      }
      if (std::isfinite(rate[a].min)) {
        auto& row = rows.add(-rate[a].min * Ts - prev, false);
        row(k) = -1.0;
        if (i > 0) row(inputIndex(i - 1, a)) = 1.0;
      }
    }
  }
  for (int i = 0; i < p; ++i) rows.add(0.0, false)(slackIndex(p, i)) = -1.0;
  return rows.finish();
}

PlanResult planStep(const PlanRequest& request, const VehicleParams& vehicle, const MpcConfig& cfg) {
  const int p = cfg.horizon;
  const LpvModel model = lpvMatrices(vehicle, request.speed);
  const DiscreteModel disc = discretize(model.A, model.B, cfg.Ts);
  const Prediction pred = buildPrediction(disc.Ad, disc.Bd, outputMatrix(vehicle), p);

  HorizonData data;
  data.x0 = request.x0.vector();
  data.disturbance = request.disturbance;
  data.references = request.references;
  data.uPrev = {request.uPrev.deltaF, request.uPrev.deltaR};

  const QuadraticCost cost = buildCost(pred, data, cfg.tactical, cfg.slackWeight);
  const ConstraintRows cons = buildConstraints(pred, data, request.corridor, cfg.tactical, cfg.Ts);
  QpProblem qp{cost.H, cost.g, cons.G, cons.h};
  const QpSolution sol = solveQp(qp, {cfg.maxSolveIterations, cfg.kktTolerance});

  PlanResult out;
  out.report = sol.report;
  out.speedClamped = model.speedClamped;
  PlannedTrajectory& traj = out.trajectory;
  traj.t0 = request.t0;
  traj.Ts = cfg.Ts;
  traj.feasible = sol.report.status == SolveStatus::Optimal;
  traj.objective = cost.evaluate(sol.z);
  traj.validUntil = request.t0 + p * cfg.Ts;
  Eigen::Vector4d x = data.x0;
  traj.states.push_back(LpvState::fromVector(x));
  for (int i = 0; i < p; ++i) {
    const Eigen::Vector3d u(sol.z(inputIndex(i, 0)), sol.z(inputIndex(i, 1)), data.disturbance(i));
    x = disc.Ad * x + disc.Bd * u;
    traj.states.push_back(LpvState::fromVector(x));
    traj.inputs.push_back({u(0), u(1)});
  }
  traj.slackMax = sol.z.tail(p).maxCoeff();
  traj.slackMax = std::max(traj.slackMax, 0.0);
  return out;
}

PlannedTrajectory shiftedTail(const PlannedTrajectory& buffer, double now) {
  PlannedTrajectory out = buffer;
  const auto steps = static_cast<long>(buffer.inputs.size());
  if (now > buffer.validUntil + 1e-9) {
    out.t0 = now;
    out.states = {buffer.states.back()};
    out.inputs = {buffer.inputs.back()};
    out.feasible = false;
    out.emergencyStop = true;
    return out;
  }
  long idx = std::lround((now - buffer.t0) / buffer.Ts);
  idx = std::clamp(idx, 0L, steps);
  out.t0 = buffer.t0 + static_cast<double>(idx) * buffer.Ts;
  out.states.assign(buffer.states.begin() + idx, buffer.states.end());
  if (idx < steps) {
    out.inputs.assign(buffer.inputs.begin() + idx, buffer.inputs.end());
  } else {
    out.inputs = {buffer.inputs.back()};
  }
  return out;
}

PlannedTrajectory FallbackBuffer::select(const SolveReport& current, const PlannedTrajectory& candidate, double now) {
  if (current.status == SolveStatus::Optimal) {
    PlannedTrajectory stored = candidate;
    stored.feasible = true;
    stored.validUntil = now + static_cast<double>(candidate.inputs.size()) * candidate.Ts;
    buffer_ = stored;
    return stored;
  }
  if (!buffer_) throw NoFallbackAvailable("optimization failed and no feasible trajectory is buffered");
  return shiftedTail(*buffer_, now);
}

std::optional<RelaxationRequest> requestRelaxation(const SolveReport& report, const Corridor& corridor) {
  if (report.status == SolveStatus::Infeasible && corridor.level == RelaxationLevel::Normal) {
    return RelaxationRequest{};
  }
  return std::nullopt;
}

std::optional<RelaxationRequest> RelaxationMonitor::update(const SolveReport& report, const Corridor& corridor) {
  if (report.status == SolveStatus::Optimal) {
    escalated_ = false;
    return std::nullopt;
  }
  auto req = requestRelaxation(report, corridor);
  if (!req || escalated_) return std::nullopt;
  escalated_ = true;
  ++requests_;
  return req;
}

}  // namespace lpvplan
