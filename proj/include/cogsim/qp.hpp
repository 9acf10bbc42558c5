#pragma once

#include <Eigen/Core>

namespace cogsim {

/// Convex quadratic program
///   min 0.5 x'Hx + c'x + constant
///   s.t. Aeq x = beq,  Ain x <= bin,  lower <= x <= upper.
/// H must be symmetric positive semidefinite; bounds vectors may be empty
/// (unbounded) and individual entries may be +-infinity.
struct QpProblem {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  double constant = 0.0;
  Eigen::MatrixXd eq_matrix;  // may have zero rows
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd in_matrix;  // may have zero rows
  Eigen::VectorXd in_rhs;
  Eigen::VectorXd lower;  // may be empty
  Eigen::VectorXd upper;  // may be empty
};

enum class QpStatus { optimal, infeasible, iteration_limit };

struct QpSolution {
  Eigen::VectorXd values;
  double objective = 0.0;
  QpStatus status = QpStatus::infeasible;
  int iterations = 0;
};

/// Dual active-set solve (Goldfarb-Idnani). Starts from the unconstrained
/// minimizer, adds equalities, then admits violated inequalities one at a
/// time, taking primal/dual steps until all constraints hold. A semidefinite
/// Hessian is handled by proximal iteration on a regularized copy, which
/// converges to an optimizer of the original program.
QpSolution solve_qp(const QpProblem& qp, double tol = 1e-9);

}  // namespace cogsim
