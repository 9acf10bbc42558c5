#include "cogsim/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "cogsim/errors.hpp"

namespace cogsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-6;

/// Condensed form of an instance: states eliminated through the dynamics so
/// the only decision variables are the stacked controls. Face deficits are
/// affine in the controls, which lets node relaxations drop relaxed rows
/// entirely (build_miqp guarantees big_m dominates every reachable deficit).
struct Condensed {
  int n = 0;  // dim * horizon
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  double constant = 0.0;
  Eigen::MatrixXd base_rows;  // velocity and arena rows
  Eigen::VectorXd base_rhs;
  Eigen::VectorXd lower, upper;  // control box
  Eigen::MatrixXd avoid_rows;    // one per (tau, cuboid, face), enforced form
  Eigen::VectorXd avoid_rhs;     // deficit = avoid_rows*u - avoid_rhs
  std::vector<Eigen::VectorXd> pos_free;  // per tau
  std::vector<Eigen::MatrixXd> bp;        // per tau, position response
};

Condensed condense(const MIQPInstance& inst) {
  const int d = inst.dim;
  const int t_len = inst.horizon;
  const int n = d * t_len;
  Condensed c;
  c.n = n;

  // State response to each control: x_tau = phi^tau x0 + sum_j phi^(tau-j) gamma u_j.
  std::vector<Eigen::MatrixXd> phi_pow(t_len + 1);
  phi_pow[0] = Eigen::MatrixXd::Identity(2 * d, 2 * d);
  for (int k = 1; k <= t_len; ++k) {
    phi_pow[k] = inst.phi * phi_pow[k - 1];
  }
  c.pos_free.resize(t_len);
  c.bp.resize(t_len);
  std::vector<Eigen::MatrixXd> bv(t_len);
  for (int tau = 1; tau <= t_len; ++tau) {
    const Eigen::VectorXd free_state = phi_pow[tau] * inst.x0;
    c.pos_free[tau - 1] = free_state.head(d);
    Eigen::MatrixXd bp = Eigen::MatrixXd::Zero(d, n);
    Eigen::MatrixXd bvel = Eigen::MatrixXd::Zero(d, n);
    for (int j = 1; j <= tau; ++j) {
      const Eigen::MatrixXd resp = phi_pow[tau - j] * inst.gamma;
      bp.middleCols((j - 1) * d, d) = resp.topRows(d);
      bvel.middleCols((j - 1) * d, d) = resp.bottomRows(d);
    }
    c.bp[tau - 1] = bp;
    bv[tau - 1] = bvel;
  }

  // Objective in the controls.
  c.hessian = Eigen::MatrixXd::Zero(n, n);
  c.linear = Eigen::VectorXd::Zero(n);
  c.constant = 0.0;
  for (int tau = 1; tau <= t_len; ++tau) {
    const Eigen::VectorXd offset = c.pos_free[tau - 1] - inst.goal_centroid;
    c.hessian += 2.0 * inst.kappa_goal * c.bp[tau - 1].transpose() * c.bp[tau - 1];
    c.linear += 2.0 * inst.kappa_goal * c.bp[tau - 1].transpose() * offset;
    c.constant += inst.kappa_goal * offset.squaredNorm();
  }
  // Difference operator for the smoothness term.
  Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(n, n);
  for (int tau = 1; tau <= t_len; ++tau) {
    diff.block((tau - 1) * d, (tau - 1) * d, d, d).setIdentity();
    if (tau >= 2) {
      diff.block((tau - 1) * d, (tau - 2) * d, d, d) =
          -Eigen::MatrixXd::Identity(d, d);
    }
  }
  c.hessian += 2.0 * inst.kappa_smooth * diff.transpose() * diff;
  Eigen::VectorXd d0 = Eigen::VectorXd::Zero(n);
  d0.head(d) = inst.u_prev;
  c.linear += -2.0 * inst.kappa_smooth * (diff.transpose() * d0);
  c.constant += inst.kappa_smooth * d0.squaredNorm();

  // Velocity box and arena rows.
  const int n_base = t_len * (2 * d + 2 * d);
  c.base_rows = Eigen::MatrixXd::Zero(n_base, n);
  c.base_rhs = Eigen::VectorXd::Zero(n_base);
  int row = 0;
  for (int tau = 1; tau <= t_len; ++tau) {
    const Eigen::VectorXd free_state = phi_pow[tau] * inst.x0;
    const Eigen::VectorXd vel_free = free_state.tail(d);
    for (int k = 0; k < d; ++k) {
      c.base_rows.row(row) = bv[tau - 1].row(k);
      c.base_rhs(row++) = inst.agent.v_max - vel_free(k);
      c.base_rows.row(row) = -bv[tau - 1].row(k);
      c.base_rhs(row++) = inst.agent.v_max + vel_free(k);
    }
    for (const auto& face : inst.arena.faces()) {
      c.base_rows.row(row) = face.normal.transpose() * c.bp[tau - 1];
      c.base_rhs(row++) = face.offset - face.normal.dot(c.pos_free[tau - 1]);
    }
  }

  // Enforced avoidance rows, indexed like the instance binaries.
  const int n_avoid = inst.num_binary;
  c.avoid_rows = Eigen::MatrixXd::Zero(n_avoid, n);
  c.avoid_rhs = Eigen::VectorXd::Zero(n_avoid);
  for (int tau = 1; tau <= t_len; ++tau) {
    for (int i = 0; i < inst.num_cuboids; ++i) {
      const auto& faces = inst.cuboids[i].faces();
      for (int l = 0; l < 2 * d; ++l) {
        const int idx = inst.binary_index(tau, i, l);
        c.avoid_rows.row(idx) = -(faces[l].normal.transpose() * c.bp[tau - 1]);
        c.avoid_rhs(idx) = -(faces[l].offset + inst.margin) +
                           faces[l].normal.dot(c.pos_free[tau - 1]);
      }
    }
  }

  c.lower = Eigen::VectorXd::Constant(n, -inst.agent.u_max);
  c.upper = Eigen::VectorXd::Constant(n, inst.agent.u_max);
  return c;
}

/// Per-cell branching state: bit l set in fixed0/fixed1 marks a committed
/// face binary.
struct CellState {
  std::uint8_t fixed0 = 0;
  std::uint8_t fixed1 = 0;
};

struct Node {
  long id = 0;
  int depth = 0;
  double bound = -kInf;
  std::vector<CellState> cells;
};

int popcount8(std::uint8_t v) { return __builtin_popcount(v); }

QpSolution solve_node(const Condensed& c, const MIQPInstance& inst,
                      const std::vector<CellState>& cells, double /*tol*/) {
  const int faces = 2 * inst.dim;
  const int budget = inst.cell_budget();
  std::vector<int> enforced;
  for (int cell = 0; cell < static_cast<int>(cells.size()); ++cell) {
    const CellState& s = cells[cell];
    const bool exhausted = popcount8(s.fixed1) >= budget;
    for (int l = 0; l < faces; ++l) {
      const bool is0 = s.fixed0 & (1u << l);
      const bool is1 = s.fixed1 & (1u << l);
      if (is0 || (exhausted && !is1)) {
        enforced.push_back(cell * faces + l);
      }
    }
  }
  QpProblem qp;
  qp.hessian = c.hessian;
  qp.linear = c.linear;
  qp.constant = c.constant;
  qp.eq_matrix.resize(0, c.n);
  qp.eq_rhs.resize(0);
  qp.in_matrix.resize(c.base_rows.rows() + enforced.size(), c.n);
  qp.in_rhs.resize(qp.in_matrix.rows());
  qp.in_matrix.topRows(c.base_rows.rows()) = c.base_rows;
  qp.in_rhs.head(c.base_rhs.size()) = c.base_rhs;
  for (std::size_t e = 0; e < enforced.size(); ++e) {
    qp.in_matrix.row(c.base_rows.rows() + e) = c.avoid_rows.row(enforced[e]);
    qp.in_rhs(c.base_rows.rows() + e) = c.avoid_rhs(enforced[e]);
  }
  qp.lower = c.lower;
  qp.upper = c.upper;
  QpSolution sol = solve_qp(qp);
  if (sol.status == QpStatus::iteration_limit) {
    throw SolverError("node relaxation hit the qp iteration limit");
  }
  return sol;
}

/// Assignment in the instance layout from a condensed control vector:
/// states via exact replay, binaries implied by the face deficits.
Eigen::VectorXd expand_assignment(const MIQPInstance& inst, const Condensed& c,
                                  const Eigen::VectorXd& controls,
                                  const std::vector<CellState>& cells) {
  const int d = inst.dim;
  Eigen::VectorXd z(inst.num_continuous + inst.num_binary);
  Eigen::VectorXd x = inst.x0;
  for (int tau = 1; tau <= inst.horizon; ++tau) {
    const Eigen::VectorXd u = controls.segment((tau - 1) * d, d);
    x = inst.phi * x + inst.gamma * u;
    z.segment(inst.state_offset(tau), 2 * d) = x;
    z.segment(inst.control_offset(tau), d) = u;
  }
  const int faces = 2 * d;
  for (int cell = 0; cell < static_cast<int>(cells.size()); ++cell) {
    for (int l = 0; l < faces; ++l) {
      const int idx = cell * faces + l;
      const double deficit = c.avoid_rows.row(idx).dot(controls) - c.avoid_rhs(idx);
      bool one;
      if (cells[cell].fixed0 & (1u << l)) {
        one = false;
      } else if (cells[cell].fixed1 & (1u << l)) {
        one = true;
      } else {
        one = deficit > kFeasTol;
      }
      z(inst.num_continuous + idx) = one ? 1.0 : 0.0;
    }
  }
  return z;
}

double assignment_objective(const MIQPInstance& inst, const Eigen::VectorXd& z) {
  const Eigen::VectorXd cont = z.head(inst.num_continuous);
  return 0.5 * cont.dot(inst.hessian * cont) + inst.linear.dot(cont) +
         inst.constant;
}

void trace_line(std::vector<std::string>* trace, const std::string& line) {
  if (trace != nullptr) {
    trace->push_back(line);
  }
}

}  // namespace

BnbResult branch_and_bound(const MIQPInstance& inst, const BnbBudget& budget,
                           const Eigen::VectorXd* warm_start,
                           std::vector<std::string>* trace) {
  const auto start_time = std::chrono::steady_clock::now();
  const auto elapsed = [&start_time] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_time)
        .count();
  };

  const Condensed c = condense(inst);
  const int faces = 2 * inst.dim;
  const int cell_count = inst.horizon * inst.num_cuboids;
  const int cell_budget = inst.cell_budget();

  BnbResult result;
  result.bound = -kInf;

  double inc_obj = kInf;
  Eigen::VectorXd inc_assignment;
  bool have_incumbent = false;
  if (warm_start != nullptr) {
    try {
      decode(inst, *warm_start);
      inc_assignment = *warm_start;
      inc_obj = assignment_objective(inst, *warm_start);
      have_incumbent = true;
      trace_line(trace, "warm_start objective=" + std::to_string(inc_obj));
    } catch (const DecodeError&) {
      // Stale warm starts are simply discarded.
    }
  }

  std::vector<Node> open;
  long next_id = 0;
  open.push_back(Node{next_id++, 0, -kInf,
                      std::vector<CellState>(cell_count, CellState{})});

  const auto gap_abs = [&inc_obj, &budget] {
    return budget.gap_tolerance * std::max(1.0, std::abs(inc_obj));
  };

  long solved = 0;
  bool budget_hit = false;
  while (!open.empty()) {
    if (solved >= budget.node_limit ||
        (budget.time_limit_s > 0.0 && elapsed() > budget.time_limit_s)) {
      budget_hit = true;
      break;
    }
    // Node selection: dive before the first incumbent, best bound afterwards.
    std::size_t pick = 0;
    if (!have_incumbent) {
      for (std::size_t i = 1; i < open.size(); ++i) {
        if (open[i].depth > open[pick].depth ||
            (open[i].depth == open[pick].depth && open[i].id > open[pick].id)) {
          pick = i;
        }
      }
    } else {
      for (std::size_t i = 1; i < open.size(); ++i) {
        if (open[i].bound < open[pick].bound ||
            (open[i].bound == open[pick].bound && open[i].id < open[pick].id)) {
          pick = i;
        }
      }
    }
    Node node = std::move(open[pick]);
    open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));

    if (have_incumbent && node.bound >= inc_obj - gap_abs()) {
      trace_line(trace, "node=" + std::to_string(node.id) + " action=prune");
      continue;
    }

    QpSolution relax = solve_node(c, inst, node.cells, budget.gap_tolerance);
    ++solved;
    if (relax.status == QpStatus::infeasible) {
      trace_line(trace,
                 "node=" + std::to_string(node.id) + " action=infeasible");
      continue;
    }
    node.bound = std::max(node.bound, relax.objective);
    if (have_incumbent && relax.objective >= inc_obj - gap_abs()) {
      trace_line(trace, "node=" + std::to_string(node.id) +
                            " bound=" + std::to_string(node.bound) +
                            " action=prune");
      continue;
    }

    // Integral feasibility: every cell must escape through a face whose
    // binary is not committed to 1; otherwise branch on the deepest
    // violation (the most fractional implied binary).
    int branch_cell = -1;
    int branch_face = -1;
    double worst_deficit = -kInf;
    for (int cell = 0; cell < cell_count && branch_cell < 0; ++cell) {
      const CellState& s = node.cells[cell];
      if (s.fixed0 != 0) {
        continue;  // an enforced face always escapes
      }
      bool escaped = false;
      for (int l = 0; l < faces; ++l) {
        if (s.fixed1 & (1u << l)) {
          continue;
        }
        const int idx = cell * faces + l;
        const double deficit =
            c.avoid_rows.row(idx).dot(relax.values) - c.avoid_rhs(idx);
        if (deficit <= kFeasTol) {
          escaped = true;
          break;
        }
      }
      if (escaped) {
        continue;
      }
      for (int l = 0; l < faces; ++l) {
        if ((s.fixed1 | s.fixed0) & (1u << l)) {
          continue;
        }
        const int idx = cell * faces + l;
        const double deficit =
            c.avoid_rows.row(idx).dot(relax.values) - c.avoid_rhs(idx);
        if (deficit > worst_deficit) {
          worst_deficit = deficit;
          branch_cell = cell;
          branch_face = l;
        }
      }
    }

    if (branch_cell < 0) {
      // Integral: candidate incumbent.
      Eigen::VectorXd z = expand_assignment(inst, c, relax.values, node.cells);
      const double obj = assignment_objective(inst, z);
      if (!have_incumbent || obj < inc_obj) {
        inc_obj = obj;
        inc_assignment = std::move(z);
        have_incumbent = true;
        trace_line(trace, "node=" + std::to_string(node.id) +
                              " action=incumbent objective=" +
                              std::to_string(obj));
      }
      continue;
    }

    const int tau = branch_cell / std::max(1, inst.num_cuboids) + 1;
    const int cuboid = branch_cell % std::max(1, inst.num_cuboids);
    trace_line(trace, "node=" + std::to_string(node.id) +
                          " bound=" + std::to_string(node.bound) +
                          " action=branch tau=" + std::to_string(tau) +
                          " cuboid=" + std::to_string(cuboid) +
                          " face=" + std::to_string(branch_face));

    // Child with the face relaxed (binary = 1) unless the cell budget is
    // spent; child with the face enforced (binary = 0) is pushed last so the
    // dive visits it first.
    if (popcount8(node.cells[branch_cell].fixed1) + 1 <= cell_budget) {
      Node child1;
      child1.id = next_id++;
      child1.depth = node.depth + 1;
      child1.bound = node.bound;
      child1.cells = node.cells;
      child1.cells[branch_cell].fixed1 |= (1u << branch_face);
      open.push_back(std::move(child1));
    }
    Node child0;
    child0.id = next_id++;
    child0.depth = node.depth + 1;
    child0.bound = node.bound;
    child0.cells = node.cells;
    child0.cells[branch_cell].fixed0 |= (1u << branch_face);
    open.push_back(std::move(child0));
  }

  result.nodes_explored = solved;
  result.wall_time_s = elapsed();
  double open_bound = kInf;
  for (const auto& node : open) {
    open_bound = std::min(open_bound, node.bound);
  }
  if (have_incumbent) {
    result.has_incumbent = true;
    result.incumbent = inc_assignment;
    result.objective = inc_obj;
    result.bound = std::min(inc_obj, open_bound);
    result.status =
        budget_hit ? BnbStatus::feasible_budget_hit : BnbStatus::optimal;
  } else {
    result.status =
        budget_hit ? BnbStatus::feasible_budget_hit : BnbStatus::infeasible;
    result.bound = open.empty() ? kInf : open_bound;
  }
  return result;
}

BnbResult brute_force(const MIQPInstance& inst, long pattern_limit,
                      bool full_space) {
  const auto start_time = std::chrono::steady_clock::now();
  const int faces = 2 * inst.dim;
  const int cell_count = inst.horizon * inst.num_cuboids;
  const long per_cell = (1L << faces) - 1;  // all-ones violates cardinality

  double pattern_count = 1.0;
  for (int cell = 0; cell < cell_count; ++cell) {
    pattern_count *= static_cast<double>(per_cell);
    if (pattern_count > static_cast<double>(pattern_limit)) {
      throw InputError("brute_force pattern count exceeds the limit");
    }
  }

  const Condensed c = condense(inst);

  BnbResult result;
  double best_obj = kInf;
  Eigen::VectorXd best_assignment;
  bool have_best = false;
  long solved = 0;

  std::vector<int> masks(cell_count, 0);
  bool done = false;
  while (!done) {
    // Current pattern: bit l of masks[cell] is the binary for that face.
    QpSolution sol;
    if (full_space) {
      QpProblem qp;
      qp.hessian = inst.hessian;
      qp.linear = inst.linear;
      qp.constant = inst.constant;
      qp.eq_matrix = inst.eq_matrix;
      qp.eq_rhs = inst.eq_rhs;
      std::vector<Eigen::VectorXd> rows;
      std::vector<double> rhs;
      for (const auto& row : inst.rows) {
        if (row.kind == IneqRow::Kind::cardinality) {
          continue;  // satisfied by construction of the pattern
        }
        Eigen::VectorXd dense = Eigen::VectorXd::Zero(inst.num_continuous);
        for (const auto& [col, coeff] : row.terms) {
          dense(col) = coeff;
        }
        double bound = row.rhs;
        if (row.kind == IneqRow::Kind::big_m) {
          const int cell = (row.tau - 1) * inst.num_cuboids + row.cuboid;
          const int bit = (masks[cell] >> row.face) & 1;
          bound += inst.big_m * bit;
        }
        rows.push_back(std::move(dense));
        rhs.push_back(bound);
      }
      qp.in_matrix.resize(static_cast<Eigen::Index>(rows.size()),
                          inst.num_continuous);
      qp.in_rhs.resize(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        qp.in_matrix.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
        qp.in_rhs(static_cast<Eigen::Index>(r)) = rhs[r];
      }
      qp.lower = inst.lower;
      qp.upper = inst.upper;
      sol = solve_qp(qp);
    } else {
      std::vector<CellState> cells(cell_count);
      for (int cell = 0; cell < cell_count; ++cell) {
        cells[cell].fixed1 = static_cast<std::uint8_t>(masks[cell]);
        cells[cell].fixed0 = static_cast<std::uint8_t>(~masks[cell] &
                                                       ((1 << faces) - 1));
      }
      sol = solve_node(c, inst, cells, 1e-9);
    }
    ++solved;
    if (sol.status == QpStatus::optimal && sol.objective < best_obj - 1e-12) {
      best_obj = sol.objective;
      have_best = true;
      if (full_space) {
        best_assignment.resize(inst.num_continuous + inst.num_binary);
        best_assignment.head(inst.num_continuous) = sol.values;
        for (int cell = 0; cell < cell_count; ++cell) {
          for (int l = 0; l < faces; ++l) {
            best_assignment(inst.num_continuous + cell * faces + l) =
                (masks[cell] >> l) & 1;
          }
        }
      } else {
        std::vector<CellState> cells(cell_count);
        for (int cell = 0; cell < cell_count; ++cell) {
          cells[cell].fixed1 = static_cast<std::uint8_t>(masks[cell]);
          cells[cell].fixed0 = static_cast<std::uint8_t>(~masks[cell] &
                                                         ((1 << faces) - 1));
        }
        best_assignment = expand_assignment(inst, c, sol.values, cells);
        // Keep the committed pattern rather than the implied one.
        for (int cell = 0; cell < cell_count; ++cell) {
          for (int l = 0; l < faces; ++l) {
            best_assignment(inst.num_continuous + cell * faces + l) =
                (masks[cell] >> l) & 1;
          }
        }
      }
    }
    // Odometer over patterns, skipping the all-ones mask per cell.
    done = true;
    for (int cell = 0; cell < cell_count; ++cell) {
      if (masks[cell] + 1 < per_cell) {
        ++masks[cell];
        done = false;
        break;
      }
      masks[cell] = 0;
    }
    if (cell_count == 0) {
      done = true;
    }
  }

  result.nodes_explored = solved;
  result.wall_time_s = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start_time)
                           .count();
  if (have_best) {
    result.has_incumbent = true;
    result.incumbent = best_assignment;
    result.objective = best_obj;
    result.bound = best_obj;
    result.status = BnbStatus::optimal;
  } else {
    result.status = BnbStatus::infeasible;
    result.bound = kInf;
  }
  return result;
}

}  // namespace cogsim
