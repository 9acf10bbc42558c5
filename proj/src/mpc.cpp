#include "cogsim/mpc.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "cogsim/errors.hpp"

namespace cogsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-6;

/// min over the arena box of normal' p, the support value used to bound the
/// worst face deficit.
double arena_support_min(const Cuboid& arena, const Eigen::VectorXd& normal) {
  const Eigen::VectorXd lo = arena.lower();
  const Eigen::VectorXd hi = arena.upper();
  double value = 0.0;
  for (int k = 0; k < normal.size(); ++k) {
    value += std::min(normal(k) * lo(k), normal(k) * hi(k));
  }
  return value;
}

}  // namespace

void MpcConfig::validate() const {
  if (horizon < 1) {
    throw ConfigError("mpc horizon must be at least 1");
  }
  if (!(kappa_goal >= 0.0) || !(kappa_smooth >= 0.0) ||
      (kappa_goal == 0.0 && kappa_smooth == 0.0)) {
    throw ConfigError("mpc weights must be non-negative and not both zero");
  }
  if (!(big_m > 0.0)) {
    throw ConfigError("mpc big_m must be positive");
  }
  if (!(strict_margin > 0.0)) {
    throw ConfigError("mpc strict_margin must be positive");
  }
  if (goal_centroid.size() == 0) {
    throw ConfigError("mpc goal_centroid is unset");
  }
}

std::string IneqRow::describe() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::big_m:
      out << "big_m tau=" << tau << " cuboid=" << cuboid << " face=" << face;
      break;
    case Kind::cardinality:
      out << "cardinality tau=" << tau << " cuboid=" << cuboid;
      break;
    case Kind::arena:
      out << "arena tau=" << tau << " face=" << face;
      break;
  }
  return out.str();
}

int MIQPInstance::state_offset(int tau) const { return (tau - 1) * 2 * dim; }

int MIQPInstance::control_offset(int tau) const {
  return horizon * 2 * dim + (tau - 1) * dim;
}

int MIQPInstance::binary_index(int tau, int cuboid, int face) const {
  return ((tau - 1) * num_cuboids + cuboid) * 2 * dim + face;
}

MIQPInstance build_miqp(const AgentState& state, std::span<const Cuboid> avoid,
                        const MpcConfig& cfg, const AgentParams& agent,
                        const Cuboid& arena, const Eigen::VectorXd& u_prev) {
  cfg.validate();
  agent.validate();
  if (!state.position.allFinite() || !state.velocity.allFinite()) {
    throw InputError("build_miqp state must be finite");
  }
  if (u_prev.size() != agent.dim) {
    throw InputError("build_miqp u_prev dimension mismatch");
  }

  MIQPInstance inst;
  inst.dim = agent.dim;
  inst.horizon = cfg.horizon;
  inst.num_cuboids = static_cast<int>(avoid.size());
  const int d = inst.dim;
  const int t_len = inst.horizon;
  const int nx = 2 * d;
  inst.num_continuous = t_len * (nx + d);
  inst.num_binary = t_len * inst.num_cuboids * 2 * d;

  auto [phi, gamma] = build_matrices(agent);
  inst.phi = phi;
  inst.gamma = gamma;
  inst.x0 = state.stacked();
  inst.u_prev = u_prev;
  inst.big_m = cfg.big_m;
  inst.margin = cfg.strict_margin;
  inst.kappa_goal = cfg.kappa_goal;
  inst.kappa_smooth = cfg.kappa_smooth;
  inst.goal_centroid = cfg.goal_centroid;
  inst.cuboids.assign(avoid.begin(), avoid.end());
  inst.arena = arena;
  inst.agent = agent;

  // Objective over the continuous block.
  inst.hessian = Eigen::MatrixXd::Zero(inst.num_continuous, inst.num_continuous);
  inst.linear = Eigen::VectorXd::Zero(inst.num_continuous);
  inst.constant = 0.0;
  for (int tau = 1; tau <= t_len; ++tau) {
    const int px = inst.state_offset(tau);
    for (int k = 0; k < d; ++k) {
      inst.hessian(px + k, px + k) += 2.0 * cfg.kappa_goal;
      inst.linear(px + k) += -2.0 * cfg.kappa_goal * cfg.goal_centroid(k);
    }
    inst.constant += cfg.kappa_goal * cfg.goal_centroid.squaredNorm();
  }
  for (int tau = 1; tau <= t_len; ++tau) {
    const int uc = inst.control_offset(tau);
    for (int k = 0; k < d; ++k) {
      inst.hessian(uc + k, uc + k) += 2.0 * cfg.kappa_smooth;
    }
    if (tau == 1) {
      for (int k = 0; k < d; ++k) {
        inst.linear(uc + k) += -2.0 * cfg.kappa_smooth * u_prev(k);
      }
      inst.constant += cfg.kappa_smooth * u_prev.squaredNorm();
    } else {
      const int up = inst.control_offset(tau - 1);
      for (int k = 0; k < d; ++k) {
        inst.hessian(up + k, up + k) += 2.0 * cfg.kappa_smooth;
        inst.hessian(uc + k, up + k) += -2.0 * cfg.kappa_smooth;
        inst.hessian(up + k, uc + k) += -2.0 * cfg.kappa_smooth;
      }
    }
  }

  // Dynamics equalities: x_tau - Phi x_{tau-1} - Gamma u_tau = 0.
  inst.eq_matrix = Eigen::MatrixXd::Zero(t_len * nx, inst.num_continuous);
  inst.eq_rhs = Eigen::VectorXd::Zero(t_len * nx);
  for (int tau = 1; tau <= t_len; ++tau) {
    const int row = (tau - 1) * nx;
    inst.eq_matrix.block(row, inst.state_offset(tau), nx, nx) =
        Eigen::MatrixXd::Identity(nx, nx);
    inst.eq_matrix.block(row, inst.control_offset(tau), nx, d) = -gamma;
    if (tau == 1) {
      inst.eq_rhs.segment(row, nx) = phi * inst.x0;
    } else {
      inst.eq_matrix.block(row, inst.state_offset(tau - 1), nx, nx) = -phi;
    }
  }

  // Big-M sufficiency: a relaxed face row must never bind anywhere in the
  // arena, and the summed worst deficits of a cell must stay under M so one
  // unit of cardinality budget always absorbs them.
  for (const auto& cuboid : inst.cuboids) {
    if (cuboid.dim() != d) {
      throw InputError("avoidance cuboid dimension mismatch");
    }
    double cell_deficit_sum = 0.0;
    for (const auto& face : cuboid.faces()) {
      const double worst =
          face.offset + cfg.strict_margin - arena_support_min(arena, face.normal);
      if (worst > cfg.big_m) {
        throw ConfigError("big_m too small for the arena: face deficit " +
                          std::to_string(worst));
      }
      cell_deficit_sum += std::max(0.0, worst);
    }
    if (cell_deficit_sum > cfg.big_m) {
      throw ConfigError("big_m too small for the arena: cell deficit sum " +
                        std::to_string(cell_deficit_sum));
    }
  }

  // Avoidance rows -dot(alpha, p_tau) - M b <= -(beta + margin), one
  // cardinality row per (tau, cuboid), then arena membership per step.
  for (int tau = 1; tau <= t_len; ++tau) {
    const int px = inst.state_offset(tau);
    for (int i = 0; i < inst.num_cuboids; ++i) {
      const auto& faces = inst.cuboids[i].faces();
      for (int l = 0; l < 2 * d; ++l) {
        IneqRow row;
        row.kind = IneqRow::Kind::big_m;
        row.tau = tau;
        row.cuboid = i;
        row.face = l;
        for (int k = 0; k < d; ++k) {
          if (faces[l].normal(k) != 0.0) {
            row.terms.emplace_back(px + k, -faces[l].normal(k));
          }
        }
        row.rhs = -(faces[l].offset + cfg.strict_margin);
        inst.rows.push_back(std::move(row));
      }
      IneqRow card;
      card.kind = IneqRow::Kind::cardinality;
      card.tau = tau;
      card.cuboid = i;
      card.rhs = inst.cell_budget();
      inst.rows.push_back(std::move(card));
    }
    for (int l = 0; l < 2 * d; ++l) {
      const auto& face = inst.arena.faces()[l];
      IneqRow row;
      row.kind = IneqRow::Kind::arena;
      row.tau = tau;
      row.face = l;
      for (int k = 0; k < d; ++k) {
        if (face.normal(k) != 0.0) {
          row.terms.emplace_back(px + k, face.normal(k));
        }
      }
      row.rhs = face.offset;
      inst.rows.push_back(std::move(row));
    }
  }

  // Velocities and controls are boxed; positions are left to the arena rows.
  inst.lower = Eigen::VectorXd::Constant(inst.num_continuous, -kInf);
  inst.upper = Eigen::VectorXd::Constant(inst.num_continuous, kInf);
  for (int tau = 1; tau <= t_len; ++tau) {
    const int vx = inst.state_offset(tau) + d;
    const int uc = inst.control_offset(tau);
    for (int k = 0; k < d; ++k) {
      inst.lower(vx + k) = -agent.v_max;
      inst.upper(vx + k) = agent.v_max;
      inst.lower(uc + k) = -agent.u_max;
      inst.upper(uc + k) = agent.u_max;
    }
  }
  return inst;
}

std::pair<std::vector<AgentState>, std::vector<ControlInput>> decode(
    const MIQPInstance& inst, const Eigen::VectorXd& assignment) {
  if (assignment.size() != inst.num_continuous + inst.num_binary) {
    throw InputError("decode assignment has wrong length");
  }
  const int d = inst.dim;

  std::vector<int> binaries(inst.num_binary, 0);
  for (int b = 0; b < inst.num_binary; ++b) {
    const double v = assignment(inst.num_continuous + b);
    if (std::abs(v) <= 1e-5) {
      binaries[b] = 0;
    } else if (std::abs(v - 1.0) <= 1e-5) {
      binaries[b] = 1;
    } else {
      throw DecodeError("binary variable " + std::to_string(b) +
                        " is fractional: " + std::to_string(v));
    }
  }

  // Controls, then the exact dynamics replay.
  std::vector<ControlInput> controls;
  controls.reserve(inst.horizon);
  for (int tau = 1; tau <= inst.horizon; ++tau) {
    Eigen::VectorXd u = assignment.segment(inst.control_offset(tau), d);
    if (u.cwiseAbs().maxCoeff() > inst.agent.u_max + kFeasTol) {
      throw DecodeError("control bound violated at tau=" + std::to_string(tau));
    }
    controls.push_back(ControlInput{clamp_force(u, inst.agent)});
  }
  const AgentState start = AgentState::from_stacked(inst.x0);
  std::vector<AgentState> trajectory = rollout(start, controls, inst.agent);

  for (int tau = 1; tau <= inst.horizon; ++tau) {
    const Eigen::VectorXd stated =
        assignment.segment(inst.state_offset(tau), 2 * d);
    const double gap =
        (stated - trajectory[tau - 1].stacked()).cwiseAbs().maxCoeff();
    if (gap > kFeasTol) {
      throw DecodeError("dynamics replay mismatch at tau=" +
                        std::to_string(tau) + " (gap=" + std::to_string(gap) +
                        ")");
    }
    if (trajectory[tau - 1].velocity.cwiseAbs().maxCoeff() >
        inst.agent.v_max + kFeasTol) {
      throw DecodeError("velocity bound violated at tau=" + std::to_string(tau));
    }
  }

  // Row-by-row feasibility with the replayed states.
  auto position = [&](int tau) { return trajectory[tau - 1].position; };
  for (const auto& row : inst.rows) {
    double lhs = 0.0;
    switch (row.kind) {
      case IneqRow::Kind::big_m: {
        const auto& face = inst.cuboids[row.cuboid].faces()[row.face];
        lhs = -face.normal.dot(position(row.tau)) -
              inst.big_m *
                  binaries[inst.binary_index(row.tau, row.cuboid, row.face)];
        break;
      }
      case IneqRow::Kind::cardinality: {
        for (int l = 0; l < 2 * d; ++l) {
          lhs += binaries[inst.binary_index(row.tau, row.cuboid, l)];
        }
        break;
      }
      case IneqRow::Kind::arena: {
        lhs = inst.arena.faces()[row.face].normal.dot(position(row.tau));
        break;
      }
    }
    if (lhs > row.rhs + kFeasTol) {
      throw DecodeError("infeasible assignment at row [" + row.describe() +
                        "]");
    }
  }

  // Clearance: every planned position escapes every cuboid through at least
  // one face by the configured margin.
  for (int tau = 1; tau <= inst.horizon; ++tau) {
    for (int i = 0; i < inst.num_cuboids; ++i) {
      double best = -kInf;
      for (const auto& face : inst.cuboids[i].faces()) {
        best = std::max(best, face.normal.dot(position(tau)) - face.offset);
      }
      if (best < inst.margin - kFeasTol) {
        throw DecodeError("position at tau=" + std::to_string(tau) +
                          " lacks clearance from cuboid " + std::to_string(i));
      }
    }
  }

  return {std::move(trajectory), std::move(controls)};
}

double objective_value(std::span<const AgentState> trajectory,
                       std::span<const ControlInput> controls,
                       const Eigen::VectorXd& u_prev, const MpcConfig& cfg) {
  cfg.validate();
  if (trajectory.size() != controls.size() ||
      static_cast<int>(trajectory.size()) != cfg.horizon) {
    throw InputError("objective_value lengths must match the horizon");
  }
  double goal_term = 0.0;
  double smooth_term = 0.0;
  Eigen::VectorXd prev = u_prev;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    goal_term += (trajectory[i].position - cfg.goal_centroid).squaredNorm();
    smooth_term += (controls[i].force - prev).squaredNorm();
    prev = controls[i].force;
  }
  return cfg.kappa_goal * goal_term + cfg.kappa_smooth * smooth_term;
}

std::string MIQPInstance::debug_dump() const {
  std::ostringstream out;
  char buffer[64];
  const auto fmt = [&buffer](double v) {
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return std::string(buffer);
  };
  out << "miqp dim=" << dim << " horizon=" << horizon
      << " cuboids=" << num_cuboids << " continuous=" << num_continuous
      << " binary=" << num_binary << "\n";
  out << "objective constant " << fmt(constant) << "\n";
  for (int i = 0; i < hessian.rows(); ++i) {
    for (int j = 0; j < hessian.cols(); ++j) {
      if (hessian(i, j) != 0.0) {
        out << "H " << i << " " << j << " " << fmt(hessian(i, j)) << "\n";
      }
    }
  }
  for (int i = 0; i < linear.size(); ++i) {
    if (linear(i) != 0.0) {
      out << "c " << i << " " << fmt(linear(i)) << "\n";
    }
  }
  for (int r = 0; r < eq_matrix.rows(); ++r) {
    out << "eq " << r << " :";
    for (int j = 0; j < eq_matrix.cols(); ++j) {
      if (eq_matrix(r, j) != 0.0) {
        out << " " << j << ":" << fmt(eq_matrix(r, j));
      }
    }
    out << " = " << fmt(eq_rhs(r)) << "\n";
  }
  for (const auto& row : rows) {
    out << "row [" << row.describe() << "] :";
    for (const auto& [col, coeff] : row.terms) {
      out << " " << col << ":" << fmt(coeff);
    }
    out << " <= " << fmt(row.rhs) << "\n";
  }
  for (int i = 0; i < lower.size(); ++i) {
    if (std::isfinite(lower(i)) || std::isfinite(upper(i))) {
      out << "bound " << i << " [" << fmt(lower(i)) << ", " << fmt(upper(i))
          << "]\n";
    }
  }
  return out.str();
}

}  // namespace cogsim
