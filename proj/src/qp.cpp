#include "lpvplan/qp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace lpvplan {

const char* statusName(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return "Optimal";
    case SolveStatus::Infeasible:
      return "Infeasible";
    case SolveStatus::IterationLimit:
      return "IterationLimit";
  }
  return "?";
}

double KktResiduals::max() const { return std::max({stationarity, primal, dual, complementarity}); }

namespace {

double infNorm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

void checkDimensions(const QpProblem& qp) {
  const Eigen::Index n = qp.g.size();
  const Eigen::Index m = qp.h.size();
  if (qp.H.rows() != n || qp.H.cols() != n) throw std::invalid_argument("QP: H must be n x n");
  if (qp.G.rows() != m || (m > 0 && qp.G.cols() != n)) throw std::invalid_argument("QP: G must be m x n");
}

// Largest step in (0, 1] keeping v + a*dv >= 0.
double maxStep(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
  }
  return a;
}

struct NormalEquations {
  Eigen::LDLT<Eigen::MatrixXd> ldlt;

  bool factor(const Eigen::MatrixXd& K) {
    ldlt.compute(K);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0.0).all()) return true;
    const double scale = 1.0 + K.diagonal().cwiseAbs().maxCoeff();
    Eigen::MatrixXd reg = K;
    for (double delta = 1e-12; delta <= 1e-4; delta *= 100.0) {
      reg.diagonal() = K.diagonal().array() + delta * scale;
      ldlt.compute(reg);
      if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) return true;
    }
    return false;
  }
};

QpSolution solveUnconstrained(const QpProblem& qp, const QpSettings& settings) {
  QpSolution sol;
  sol.multipliers.resize(0);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(qp.H);
  Eigen::VectorXd z;
  if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 1e-14 * (1.0 + qp.H.norm())).all()) {
    z = ldlt.solve(-qp.g);
  } else {
    z = qp.H.completeOrthogonalDecomposition().solve(-qp.g);
  }
  sol.z = z;
  sol.objective = qp.objective(z);
  sol.report.iterations = 0;
  sol.report.kktResiduals = kktResiduals(qp, z, sol.multipliers);
  sol.report.status =
      sol.report.kktResiduals.max() <= settings.tolerance ? SolveStatus::Optimal : SolveStatus::IterationLimit;
  return sol;
}

// min t  s.t.  Gz - t <= h, t >= 0. Returns the minimal uniform violation.
double minimalViolation(const QpProblem& qp, const QpSettings& settings, bool& solved);

QpSolution interiorPoint(const QpProblem& qp, const QpSettings& settings, bool allowPhaseOne) {
  const Eigen::Index m = qp.h.size();
  const Eigen::MatrixXd& G = qp.G;
  const Eigen::VectorXd& h = qp.h;

  // Starting point: regularized least-squares fit of Gz = h, then shift the
  // slacks and multipliers into the interior (Mehrotra's heuristic).
  Eigen::MatrixXd K0 = qp.H + G.transpose() * G;
  K0.diagonal().array() += 1e-8 * (1.0 + K0.diagonal().cwiseAbs().maxCoeff());
  Eigen::VectorXd z = K0.ldlt().solve(-qp.g + G.transpose() * h);
  Eigen::VectorXd s = h - G * z;
  Eigen::VectorXd lam = Eigen::VectorXd::Ones(m);
  const double ds = std::max(-1.5 * s.minCoeff(), 0.0);
  s.array() += ds;
  const double sl = s.dot(lam);
  if (sl > 0.0) {
    s.array() += 0.5 * sl / lam.sum();
    lam.array() += 0.5 * sl / s.sum();
  }
  s = s.cwiseMax(1e-2);
  lam = lam.cwiseMax(1e-2);

  QpSolution best;
  best.z = z;
  best.multipliers = lam;
  best.report.kktResiduals = kktResiduals(qp, z, lam);
  double bestMerit = best.report.kktResiduals.max();

  const double gScale = 1.0 + infNorm(qp.g);
  const double gMax = 1.0 + (m > 0 ? G.cwiseAbs().maxCoeff() : 0.0);
  const double hMax = 1.0 + infNorm(h);

  NormalEquations normal;
  int stalled = 0;
  int iter = 0;
  SolveStatus status = SolveStatus::IterationLimit;
  for (; iter < settings.maxIterations; ++iter) {
    const Eigen::VectorXd rd = qp.H * z + qp.g + G.transpose() * lam;
    const Eigen::VectorXd rp = G * z + s - h;
    const double mu = s.dot(lam) / static_cast<double>(m);

    const KktResiduals res = kktResiduals(qp, z, lam);
    if (res.max() < bestMerit) {
      bestMerit = res.max();
      best.z = z;
      best.multipliers = lam;
      best.report.kktResiduals = res;
    }
    if (res.max() <= settings.tolerance && infNorm(rp) <= settings.tolerance * hMax) {
      status = SolveStatus::Optimal;
      break;
    }

    // Farkas: y >= 0 with G'y = 0 and h'y < 0 proves {Gz <= h} empty.
    const double lamSum = lam.sum();
    if (lamSum > 1e6 * gScale) {
      const Eigen::VectorXd y = lam / lamSum;
      const double hy = h.dot(y);
      if (hy < -1e-9 * hMax && infNorm(G.transpose() * y) <= 1e-9 * gMax * std::abs(hy) / hMax) {
        status = SolveStatus::Infeasible;
        break;
      }
    }

    const Eigen::VectorXd w = lam.cwiseQuotient(s);
    Eigen::MatrixXd K = qp.H + G.transpose() * w.asDiagonal() * G;
    if (!normal.factor(K)) break;

    auto direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dz, Eigen::VectorXd& dl, Eigen::VectorXd& dsv) {
      const Eigen::VectorXd rhs = -rd - G.transpose() * (w.cwiseProduct(rp) - rc.cwiseQuotient(s));
      dz = normal.ldlt.solve(rhs);
      dl = w.cwiseProduct(G * dz + rp) - rc.cwiseQuotient(s);
      dsv = -(rc + s.cwiseProduct(dl)).cwiseQuotient(lam);
    };

    Eigen::VectorXd dzA, dlA, dsA;
    const Eigen::VectorXd rcAff = s.cwiseProduct(lam);
    direction(rcAff, dzA, dlA, dsA);
    const double aAff = std::min(maxStep(s, dsA), maxStep(lam, dlA));
    const double muAff = (s + aAff * dsA).dot(lam + aAff * dlA) / static_cast<double>(m);
    const double sigma = std::pow(std::clamp(muAff / mu, 0.0, 1.0), 3);

    Eigen::VectorXd dz, dl, dsv;
    const Eigen::VectorXd rc = rcAff + dsA.cwiseProduct(dlA) - Eigen::VectorXd::Constant(m, sigma * mu);
    direction(rc, dz, dl, dsv);
    const double aMax = std::min(maxStep(s, dsv), maxStep(lam, dl));
    const double a = std::min(1.0, 0.995 * aMax);

    z += a * dz;
    s += a * dsv;
    lam += a * dl;
    s = s.cwiseMax(1e-300);
    lam = lam.cwiseMax(1e-300);

    stalled = a < 1e-8 ? stalled + 1 : 0;
    if (stalled >= 3) break;
  }

  QpSolution sol;
  sol.report.iterations = std::min(iter + 1, settings.maxIterations);
  if (status == SolveStatus::Optimal) {
    sol.z = z;
    sol.multipliers = lam;
    sol.report.kktResiduals = kktResiduals(qp, z, lam);
  } else {
    sol.z = best.z;
    sol.multipliers = best.multipliers;
    sol.report.kktResiduals = best.report.kktResiduals;
  }
  if (status == SolveStatus::IterationLimit && allowPhaseOne && sol.report.kktResiduals.primal > settings.tolerance) {
    bool solved = false;
    const double violation = minimalViolation(qp, settings, solved);
    if (solved && violation > std::sqrt(settings.tolerance) * hMax) status = SolveStatus::Infeasible;
  }
  sol.report.status = status;
  sol.objective = qp.objective(sol.z);
  return sol;
}

double minimalViolation(const QpProblem& qp, const QpSettings& settings, bool& solved) {
  const Eigen::Index n = qp.g.size();
  const Eigen::Index m = qp.h.size();
  QpProblem p1;
  p1.H = Eigen::MatrixXd::Zero(n + 1, n + 1);
  p1.H.topLeftCorner(n, n).diagonal().setConstant(1e-10);
  p1.g = Eigen::VectorXd::Zero(n + 1);
  p1.g(n) = 1.0;
  p1.G = Eigen::MatrixXd::Zero(m + 1, n + 1);
  p1.G.topLeftCorner(m, n) = qp.G;
  p1.G.block(0, n, m, 1).setConstant(-1.0);
  p1.G(m, n) = -1.0;
  p1.h = Eigen::VectorXd::Zero(m + 1);
  p1.h.head(m) = qp.h;
  QpSettings s = settings;
  s.maxIterations = std::max(settings.maxIterations, 200);
  const QpSolution sol = interiorPoint(p1, s, false);
  solved = sol.report.status == SolveStatus::Optimal;
  return sol.z(n);
}

}  // namespace

KktResiduals kktResiduals(const QpProblem& qp, const Eigen::VectorXd& z, const Eigen::VectorXd& multipliers) {
  KktResiduals r;
  const Eigen::VectorXd Hz = qp.H * z;
  Eigen::VectorXd Gtl = Eigen::VectorXd::Zero(z.size());
  Eigen::VectorXd Gz;
  if (qp.h.size() > 0) {
    Gtl = qp.G.transpose() * multipliers;
    Gz = qp.G * z;
  }
  r.stationarity = infNorm(Hz + qp.g + Gtl) / (1.0 + std::max({infNorm(Hz), infNorm(qp.g), infNorm(Gtl)}));
  if (qp.h.size() > 0) {
    const Eigen::VectorXd slack = qp.h - Gz;
    r.primal = infNorm((-slack).cwiseMax(0.0)) / (1.0 + std::max(infNorm(Gz), infNorm(qp.h)));
    r.dual = infNorm((-multipliers).cwiseMax(0.0));
    r.complementarity = infNorm(multipliers.cwiseProduct(slack)) / (1.0 + std::abs(qp.objective(z)));
  }
  return r;
}

QpSolution solveQp(const QpProblem& qp, const QpSettings& settings) {
  checkDimensions(qp);
  const auto t0 = std::chrono::steady_clock::now();
  QpSolution sol = qp.h.size() == 0 ? solveUnconstrained(qp, settings) : interiorPoint(qp, settings, true);
  sol.report.solveTime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

}  // namespace lpvplan
