#include "cogsim/lqr.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cstring>
#include <map>
#include <mutex>
#include <vector>

#include "cogsim/errors.hpp"

namespace cogsim {

namespace {

bool approximately_symmetric(const Eigen::MatrixXd& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + m.cwiseAbs().maxCoeff());
}

// Byte-level fingerprint of the problem data for the gain cache.
std::string fingerprint(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& gamma,
                        const Eigen::MatrixXd& q, const Eigen::MatrixXd& r) {
  std::string key;
  auto append = [&key](const Eigen::MatrixXd& m) {
    const auto rows = static_cast<std::int32_t>(m.rows());
    const auto cols = static_cast<std::int32_t>(m.cols());
    key.append(reinterpret_cast<const char*>(&rows), sizeof(rows));
    key.append(reinterpret_cast<const char*>(&cols), sizeof(cols));
    key.append(reinterpret_cast<const char*>(m.data()), sizeof(double) * m.size());
  };
  append(phi);
  append(gamma);
  append(q);
  append(r);
  return key;
}

std::mutex gain_cache_mutex;
std::map<std::string, Eigen::MatrixXd> gain_cache;

}  // namespace

LqrConfig LqrConfig::diagonal(double q, double r, int dim) {
  LqrConfig cfg;
  cfg.q_weight = q * Eigen::MatrixXd::Identity(2 * dim, 2 * dim);
  cfg.r_weight = r * Eigen::MatrixXd::Identity(dim, dim);
  return cfg;
}

void LqrConfig::validate() const {
  if (q_weight.size() == 0 || r_weight.size() == 0) {
    throw ConfigError("lqr weights are unset");
  }
  if (!approximately_symmetric(q_weight) || !approximately_symmetric(r_weight)) {
    throw ConfigError("lqr weights must be symmetric");
  }
  Eigen::LDLT<Eigen::MatrixXd> q_ldlt(q_weight);
  if (q_ldlt.info() != Eigen::Success || (q_ldlt.vectorD().array() < -1e-12).any()) {
    throw ConfigError("lqr q_weight must be positive semidefinite");
  }
  Eigen::LLT<Eigen::MatrixXd> r_llt(r_weight);
  if (r_llt.info() != Eigen::Success) {
    throw ConfigError("lqr r_weight must be positive definite");
  }
  if (!(riccati_tolerance > 0.0) || riccati_max_iter <= 0) {
    throw ConfigError("lqr riccati settings must be positive");
  }
}

Eigen::MatrixXd riccati_solution(const Eigen::MatrixXd& phi,
                                 const Eigen::MatrixXd& gamma,
                                 const LqrConfig& cfg) {
  cfg.validate();
  const Eigen::MatrixXd& q = cfg.q_weight;
  const Eigen::MatrixXd& r = cfg.r_weight;
  if (phi.rows() != phi.cols() || gamma.rows() != phi.rows() ||
      q.rows() != phi.rows() || r.rows() != gamma.cols()) {
    throw InputError("riccati matrix dimensions are inconsistent");
  }
  Eigen::MatrixXd p = q;
  for (int iter = 0; iter < cfg.riccati_max_iter; ++iter) {
    const Eigen::MatrixXd gtp_phi = gamma.transpose() * p * phi;
    const Eigen::MatrixXd s = r + gamma.transpose() * p * gamma;
    const Eigen::MatrixXd k = s.ldlt().solve(gtp_phi);
    Eigen::MatrixXd next =
        q + phi.transpose() * p * phi - gtp_phi.transpose() * k;
    next = 0.5 * (next + next.transpose());
    const double diff = (next - p).cwiseAbs().maxCoeff();
    p = next;
    if (diff < cfg.riccati_tolerance) {
      return p;
    }
  }
  throw SolverError("riccati recursion did not converge");
}

Eigen::MatrixXd lqr_gain(const Eigen::MatrixXd& phi,
                         const Eigen::MatrixXd& gamma, const LqrConfig& cfg) {
  const std::string key = fingerprint(phi, gamma, cfg.q_weight, cfg.r_weight);
  {
    std::lock_guard<std::mutex> lock(gain_cache_mutex);
    auto it = gain_cache.find(key);
    if (it != gain_cache.end()) {
      return it->second;
    }
  }
  const Eigen::MatrixXd p = riccati_solution(phi, gamma, cfg);
  const Eigen::MatrixXd gtp = gamma.transpose() * p;
  const Eigen::MatrixXd k = (cfg.r_weight + gtp * gamma).ldlt().solve(gtp * phi);
  std::lock_guard<std::mutex> lock(gain_cache_mutex);
  gain_cache.emplace(key, k);
  return k;
}

TrackResult track(const ReferencePath& path, const AgentState& state,
                  const AgentParams& params, const LqrConfig& cfg) {
  params.validate();
  if (path.waypoints.empty()) {
    throw InputError("track needs a nonempty path");
  }
  const auto [phi, gamma] = build_matrices(params);
  const Eigen::MatrixXd k = lqr_gain(phi, gamma, cfg);
  const std::size_t n = path.waypoints.size();

  std::vector<Eigen::VectorXd> references(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd ref(2 * params.dim);
    Eigen::VectorXd velocity = Eigen::VectorXd::Zero(params.dim);
    if (i + 1 < n) {
      velocity = (path.waypoints[i + 1] - path.waypoints[i]) / params.dt;
    }
    ref << path.waypoints[i], velocity;
    references[i] = ref;
  }

  TrackResult result;
  result.trajectory.reserve(n);
  result.controls.reserve(n);
  AgentState current = state;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd error = current.stacked() - references[i];
    ControlInput u{clamp_force(-k * error, params)};
    current = step(current, u, params);
    result.controls.push_back(std::move(u));
    result.trajectory.push_back(current);
  }
  return result;
}

}  // namespace cogsim
