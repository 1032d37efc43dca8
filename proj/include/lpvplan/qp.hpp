#pragma once

#include <Eigen/Core>

namespace lpvplan {

/// min 1/2 z'Hz + g'z  s.t.  Gz <= h, with H symmetric positive semidefinite.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;

  Eigen::Index variables() const { return g.size(); }
  Eigen::Index constraints() const { return h.size(); }
  double objective(const Eigen::VectorXd& z) const { return 0.5 * z.dot(H * z) + g.dot(z); }
};

enum class SolveStatus { Optimal, Infeasible, IterationLimit };

const char* statusName(SolveStatus status);

/// Scaled KKT residuals (infinity norms):
///   stationarity    |Hz + g + G'l| / (1 + max(|Hz|, |g|, |G'l|))
///   primal          |max(Gz - h, 0)| / (1 + max(|Gz|, |h|))
///   dual            |min(l, 0)|
///   complementarity max_i |l_i (h - Gz)_i| / (1 + |objective|)
struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;

  double max() const;
};

struct SolveReport {
  SolveStatus status = SolveStatus::IterationLimit;
  KktResiduals kktResiduals;
  int iterations = 0;
  double solveTime = 0.0;  ///< seconds, wall clock
};

struct QpSettings {
  int maxIterations = 100;
  double tolerance = 1e-8;
};

struct QpSolution {
  Eigen::VectorXd z;
  Eigen::VectorXd multipliers;
  double objective = 0.0;
  SolveReport report;
};

KktResiduals kktResiduals(const QpProblem& qp, const Eigen::VectorXd& z, const Eigen::VectorXd& multipliers);

/// Primal-dual interior point method with Mehrotra predictor-corrector steps
/// on the dense normal equations. Infeasibility is reported when a Farkas
/// certificate appears in the multipliers or when a phase-one problem
/// confirms a positive minimal constraint violation. Deterministic.
QpSolution solveQp(const QpProblem& qp, const QpSettings& settings = {});

}  // namespace lpvplan
