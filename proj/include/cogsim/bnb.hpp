#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "cogsim/mpc.hpp"
#include "cogsim/qp.hpp"

namespace cogsim {

struct BnbBudget {
  double gap_tolerance = 1e-4;  // relative
  long node_limit = 1000000;    // relaxations solved
  double time_limit_s = 0.0;    // 0 disables; wall-clock limits are
                                // nondeterministic, keep off for goldens
};

enum class BnbStatus { optimal, feasible_budget_hit, infeasible };

struct BnbResult {
  bool has_incumbent = false;
  Eigen::VectorXd incumbent;  // continuous block then binaries
  double objective = 0.0;     // incumbent objective when present
  double bound = 0.0;         // global lower bound
  BnbStatus status = BnbStatus::infeasible;
  long nodes_explored = 0;
  double wall_time_s = 0.0;
};

/// Exact solve of the instance by branch and bound over the face binaries.
/// Node relaxations are condensed QPs over the controls (states eliminated
/// through the dynamics); branching picks the most fractional implied binary,
/// node selection dives depth-first until the first incumbent and follows
/// best-bound afterwards. Fully deterministic for a given instance.
/// warm_start, when given, seeds the incumbent with a known-feasible
/// assignment; trace, when given, collects one line per node event.
BnbResult branch_and_bound(const MIQPInstance& instance,
                           const BnbBudget& budget = {},
                           const Eigen::VectorXd* warm_start = nullptr,
                           std::vector<std::string>* trace = nullptr);

/// Exhaustive oracle: enumerates every cardinality-feasible binary
/// assignment, solves each QP, and returns the best. Refuses when the pattern
/// count exceeds pattern_limit. With full_space=true each pattern is solved
/// on the raw variables with explicit dynamics equalities, independently of
/// the condensed path.
BnbResult brute_force(const MIQPInstance& instance, long pattern_limit,
                      bool full_space = false);

}  // namespace cogsim
