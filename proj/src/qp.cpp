#include "cogsim/qp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <vector>

#include "cogsim/errors.hpp"

namespace cogsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Internal constraint form: normal' x >= level. Rows are normalized on
// ingestion so tolerances act on geometric distances.
struct Constraint {
  Eigen::VectorXd normal;
  double level = 0.0;
  bool equality = false;
};

struct GiOutcome {
  Eigen::VectorXd x;
  QpStatus status = QpStatus::infeasible;
  int iterations = 0;
};

/// Goldfarb-Idnani dual active-set method for strictly convex QPs.
/// Maintains J = L^{-T} Q and the triangular factor R of the active normals
/// in the metric of the Hessian; constraints enter one at a time with primal
/// steps along z (null-space direction) and dual steps along r.
class GiSolver {
 public:
  GiSolver(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::VectorXd& c,
           const std::vector<Constraint>& constraints, double tol)
      : constraints_(constraints), tol_(tol), n_(static_cast<int>(c.size())) {
    x_ = -llt.solve(c);
    j_ = llt.matrixU().solve(Eigen::MatrixXd::Identity(n_, n_));
    r_.setZero(n_, n_);
    d_.setZero(n_);
  }

  GiOutcome run() {
    const int m = static_cast<int>(constraints_.size());
    const int max_iter = 50 * (n_ + m + 2);
    GiOutcome out;

    // Equalities first; their multipliers may take any sign and they are
    // never eligible to leave the active set.
    for (int i = 0; i < m; ++i) {
      if (!constraints_[i].equality) {
        continue;
      }
      const Eigen::VectorXd& np = constraints_[i].normal;
      compute_directions(np);
      const double denom = z_.dot(np);
      const double slack = np.dot(x_) - constraints_[i].level;
      if (denom > dependence_threshold()) {
        const double t2 = -slack / denom;
        x_ += t2 * z_;
        for (int k = 0; k < iq_; ++k) {
          u_[k] -= t2 * r_sol_[k];
        }
        if (!add_active(i, t2)) {
          throw SolverError("qp equality factor update failed");
        }
        ++eq_active_;
      } else if (std::abs(slack) > 1e-7) {
        out.status = QpStatus::infeasible;
        out.x = x_;
        return out;
      }
      // Dependent but consistent equalities are skipped.
    }

    int iterations = 0;
    for (;;) {
      if (++iterations > max_iter) {
        out.status = QpStatus::iteration_limit;
        break;
      }
      const int ip = most_violated();
      if (ip < 0) {
        out.status = QpStatus::optimal;
        break;
      }
      const Eigen::VectorXd& np = constraints_[ip].normal;
      double u_plus = 0.0;
      bool resolved = false;
      while (!resolved) {
        if (++iterations > max_iter) {
          out.status = QpStatus::iteration_limit;
          out.x = x_;
          out.iterations = iterations;
          return out;
        }
        compute_directions(np);
        const double denom = z_.dot(np);
        const bool z_nonzero = denom > dependence_threshold();

        double t1 = kInf;
        int blocking = -1;
        for (int k = eq_active_; k < iq_; ++k) {
          if (r_sol_[k] > 1e-12) {
            const double t = u_[k] / r_sol_[k];
            if (t < t1) {
              t1 = t;
              blocking = k;
            }
          }
        }
        const double slack = np.dot(x_) - constraints_[ip].level;
        const double t2 = z_nonzero ? -slack / denom : kInf;
        const double t = std::min(t1, t2);

        if (t >= kInf) {
          out.status = QpStatus::infeasible;
          out.x = x_;
          out.iterations = iterations;
          return out;
        }
        if (!z_nonzero) {
          // Dual step only: shrink multipliers until one hits zero.
          for (int k = 0; k < iq_; ++k) {
            u_[k] -= t * r_sol_[k];
          }
          u_plus += t;
          drop_active(blocking);
          continue;
        }
        x_ += t * z_;
        for (int k = 0; k < iq_; ++k) {
          u_[k] -= t * r_sol_[k];
        }
        u_plus += t;
        if (t2 <= t1) {
          if (!add_active(ip, u_plus)) {
            // Numerically dependent after a full step: accept and move on.
          }
          resolved = true;
        } else {
          drop_active(blocking);
        }
      }
    }
    out.x = x_;
    out.iterations = iterations;
    return out;
  }

 private:
  double dependence_threshold() const {
    return 1e-12 * (1.0 + d_.squaredNorm());
  }

  void compute_directions(const Eigen::VectorXd& np) {
    d_ = j_.transpose() * np;
    z_ = j_.rightCols(n_ - iq_) * d_.tail(n_ - iq_);
    r_sol_.resize(iq_);
    if (iq_ > 0) {
      r_sol_ = r_.topLeftCorner(iq_, iq_)
                   .triangularView<Eigen::Upper>()
                   .solve(d_.head(iq_));
    }
  }

  int most_violated() const {
    int worst = -1;
    double worst_slack = -tol_;
    for (int i = 0; i < static_cast<int>(constraints_.size()); ++i) {
      if (constraints_[i].equality || active_flag_[i]) {
        continue;
      }
      const double slack = constraints_[i].normal.dot(x_) - constraints_[i].level;
      if (slack < worst_slack) {
        worst_slack = slack;
        worst = i;
      }
    }
    return worst;
  }

  bool add_active(int index, double multiplier) {
    // Rotate the null-space components of d into slot iq_.
    for (int j = n_ - 1; j >= iq_ + 1; --j) {
      const double a = d_(j - 1);
      const double b = d_(j);
      const double h = std::hypot(a, b);
      if (h == 0.0) {
        continue;
      }
      const double c = a / h;
      const double s = b / h;
      d_(j - 1) = h;
      d_(j) = 0.0;
      for (int k = 0; k < n_; ++k) {
        const double t1 = j_(k, j - 1);
        const double t2 = j_(k, j);
        j_(k, j - 1) = c * t1 + s * t2;
        j_(k, j) = -s * t1 + c * t2;
      }
    }
    r_.col(iq_).head(iq_ + 1) = d_.head(iq_ + 1);
    const bool independent = std::abs(d_(iq_)) > 1e-12 * r_norm_;
    r_norm_ = std::max(r_norm_, std::abs(d_(iq_)));
    ++iq_;
    active_.push_back(index);
    active_flag_[static_cast<std::size_t>(index)] = true;
    u_.push_back(multiplier);
    return independent;
  }

  void drop_active(int position) {
    active_flag_[static_cast<std::size_t>(active_[position])] = false;
    for (int i = position; i < iq_ - 1; ++i) {
      active_[i] = active_[i + 1];
      u_[i] = u_[i + 1];
      r_.col(i) = r_.col(i + 1);
    }
    active_.pop_back();
    u_.pop_back();
    r_.col(iq_ - 1).setZero();
    --iq_;
    for (int j = position; j < iq_; ++j) {
      const double a = r_(j, j);
      const double b = r_(j + 1, j);
      const double h = std::hypot(a, b);
      if (h == 0.0) {
        continue;
      }
      const double c = a / h;
      const double s = b / h;
      for (int k = j; k < iq_; ++k) {
        const double t1 = r_(j, k);
        const double t2 = r_(j + 1, k);
        r_(j, k) = c * t1 + s * t2;
        r_(j + 1, k) = -s * t1 + c * t2;
      }
      for (int k = 0; k < n_; ++k) {
        const double t1 = j_(k, j);
        const double t2 = j_(k, j + 1);
        j_(k, j) = c * t1 + s * t2;
        j_(k, j + 1) = -s * t1 + c * t2;
      }
    }
  }

 public:
  void reserve_flags(std::size_t m) { active_flag_.assign(m, false); }

 private:
  const std::vector<Constraint>& constraints_;
  double tol_;
  int n_;
  int iq_ = 0;
  int eq_active_ = 0;
  double r_norm_ = 1.0;
  Eigen::VectorXd x_, d_, z_;
  Eigen::VectorXd r_sol_;
  Eigen::MatrixXd j_, r_;
  std::vector<int> active_;
  std::vector<bool> active_flag_;
  std::vector<double> u_;
};

struct Gathered {
  std::vector<Constraint> constraints;
  bool trivially_infeasible = false;  // a zero row that can never hold
};

Gathered gather_constraints(const QpProblem& qp) {
  const int n = static_cast<int>(qp.linear.size());
  Gathered out;
  const auto push_row = [&out](Eigen::VectorXd normal, double level,
                               bool equality) {
    const double norm = normal.norm();
    if (norm <= 0.0) {
      // A zero row is either vacuous or unsatisfiable by any x.
      if (!equality && level <= 1e-12) {
        return;
      }
      if (equality && std::abs(level) <= 1e-12) {
        return;
      }
      out.trivially_infeasible = true;
      return;
    }
    out.constraints.push_back(
        Constraint{normal / norm, level / norm, equality});
  };

  for (Eigen::Index i = 0; i < qp.eq_matrix.rows(); ++i) {
    push_row(qp.eq_matrix.row(i).transpose(), qp.eq_rhs(i), true);
  }
  for (Eigen::Index i = 0; i < qp.in_matrix.rows(); ++i) {
    // a'x <= b becomes (-a)'x >= -b.
    push_row(-qp.in_matrix.row(i).transpose(), -qp.in_rhs(i), false);
  }
  if (qp.lower.size() > 0) {
    for (int k = 0; k < n; ++k) {
      if (std::isfinite(qp.lower(k))) {
        Eigen::VectorXd axis = Eigen::VectorXd::Zero(n);
        axis(k) = 1.0;
        out.constraints.push_back(Constraint{axis, qp.lower(k), false});
      }
    }
  }
  if (qp.upper.size() > 0) {
    for (int k = 0; k < n; ++k) {
      if (std::isfinite(qp.upper(k))) {
        Eigen::VectorXd axis = Eigen::VectorXd::Zero(n);
        axis(k) = -1.0;
        out.constraints.push_back(Constraint{axis, -qp.upper(k), false});
      }
    }
  }
  return out;
}

GiOutcome run_gi(const Eigen::LLT<Eigen::MatrixXd>& llt,
                 const Eigen::VectorXd& c,
                 const std::vector<Constraint>& constraints, double tol) {
  GiSolver solver(llt, c, constraints, tol);
  solver.reserve_flags(constraints.size());
  return solver.run();
}

double true_objective(const QpProblem& qp, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(qp.hessian * x) + qp.linear.dot(x) + qp.constant;
}

}  // namespace

QpSolution solve_qp(const QpProblem& qp, double tol) {
  const int n = static_cast<int>(qp.linear.size());
  if (qp.hessian.rows() != n || qp.hessian.cols() != n) {
    throw InputError("qp hessian shape mismatch");
  }
  const Gathered gathered = gather_constraints(qp);
  const std::vector<Constraint>& constraints = gathered.constraints;

  QpSolution solution;
  if (gathered.trivially_infeasible) {
    solution.values = Eigen::VectorXd::Zero(n);
    solution.status = QpStatus::infeasible;
    return solution;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(qp.hessian);
  if (llt.info() == Eigen::Success && qp.hessian.diagonal().minCoeff() > 0.0) {
    GiOutcome out = run_gi(llt, qp.linear, constraints, tol);
    solution.values = out.x;
    solution.status = out.status;
    solution.iterations = out.iterations;
    solution.objective = true_objective(qp, out.x);
    return solution;
  }

  // Semidefinite Hessian: proximal iteration on H + delta*I. The fixed point
  // of x_{k+1} = argmin 0.5 x'(H+dI)x + (c - d x_k)'x solves the original QP.
  const double delta =
      1e-6 * (1.0 + qp.hessian.diagonal().cwiseAbs().maxCoeff());
  Eigen::MatrixXd regularized = qp.hessian;
  regularized.diagonal().array() += delta;
  Eigen::LLT<Eigen::MatrixXd> reg_llt(regularized);
  if (reg_llt.info() != Eigen::Success) {
    throw SolverError("qp hessian is not positive semidefinite");
  }
  Eigen::VectorXd anchor = Eigen::VectorXd::Zero(n);
  GiOutcome out;
  int total_iterations = 0;
  for (int pass = 0; pass < 300; ++pass) {
    out = run_gi(reg_llt, qp.linear - delta * anchor, constraints, tol);
    total_iterations += out.iterations;
    if (out.status != QpStatus::optimal) {
      solution.values = out.x;
      solution.status = out.status;
      solution.iterations = total_iterations;
      solution.objective = true_objective(qp, out.x);
      return solution;
    }
    const double move = (out.x - anchor).cwiseAbs().maxCoeff();
    anchor = out.x;
    if (move <= 1e-10 * (1.0 + anchor.cwiseAbs().maxCoeff())) {
      solution.values = anchor;
      solution.status = QpStatus::optimal;
      solution.iterations = total_iterations;
      solution.objective = true_objective(qp, anchor);
      return solution;
    }
  }
  solution.values = anchor;
  solution.status = QpStatus::iteration_limit;
  solution.iterations = total_iterations;
  solution.objective = true_objective(qp, anchor);
  return solution;
}

}  // namespace cogsim
