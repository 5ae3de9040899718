#pragma once

// Synchronous-round execution of the push-sum rescaled projected method with
// either the two-point zeroth-order oracle or exact subgradients.
//
// One round t -> t+1, from the round-t snapshot (x_t, phi_t):
//   phi_{t+1} = A_t phi_t
//   B_t       = diag(phi_{t+1})^{-1} A_t diag(phi_t)
//   x_{i,t+1} = P( sum_j B_t(i,j) x_{j,t} - alpha_t / phi_{i,t+1} * g_i )
// where g_i is the oracle output at x_{i,t} and P projects onto (1 - xi) Omega
// (zeroth order) or Omega (subgradient).

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pushsum/core.hpp"
#include "pushsum/geometry.hpp"
#include "pushsum/graph.hpp"
#include "pushsum/objective.hpp"
#include "pushsum/rng.hpp"

namespace pushsum {

enum class Algorithm { zeroth_order, subgradient };

inline const char* to_string(Algorithm a) {
  return a == Algorithm::zeroth_order ? "zo" : "subgrad";
}

/// alpha_t = scale / sqrt(t + 1).
struct StepRule {
  double scale = 1.0;

  double at(Round t) const { return scale / std::sqrt(static_cast<double>(t) + 1.0); }

  /// 1/(m sqrt(t+1)) for the zeroth-order method, 1/sqrt(t+1) for subgradients.
  static StepRule default_for(Algorithm a, Eigen::Index m) {
    return {a == Algorithm::zeroth_order ? 1.0 / static_cast<double>(m) : 1.0};
  }
};

struct RunConfig {
  Algorithm algorithm = Algorithm::zeroth_order;
  Round horizon = 0;
  StepRule step;
  SmoothingParams smoothing;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  std::optional<Vector> start;  // default: Chebyshev centre of Omega
  bool record_zeta = false;
  bool check_invariants = true;

  double shrink() const { return algorithm == Algorithm::zeroth_order ? smoothing.xi : 0.0; }
};

struct NetworkState {
  Round t = 0;
  Matrix x;    // row i is x_{i,t}
  Vector phi;  // phi_{i,t}

  Vector node(std::size_t i) const { return x.row(static_cast<Eigen::Index>(i)).transpose(); }
};

/// Worst values seen by the per-round checks.
struct InvariantSummary {
  Round rounds = 0;
  double column_sum_error = 0.0;
  double row_sum_error = 0.0;
  double phi_sum_error = 0.0;
  double phi_min = std::numeric_limits<double>::infinity();
  double phi_max = -std::numeric_limits<double>::infinity();
  double phi_lower_bound = 0.0;
  double phi_upper_bound = 0.0;
  double oracle_norm_ratio = 0.0;  // max ||g|| / (m G), zeroth order only
  double max_abs_coordinate = 0.0;

  void merge(const InvariantSummary& o) {
    rounds = std::max(rounds, o.rounds);
    column_sum_error = std::max(column_sum_error, o.column_sum_error);
    row_sum_error = std::max(row_sum_error, o.row_sum_error);
    phi_sum_error = std::max(phi_sum_error, o.phi_sum_error);
    phi_min = std::min(phi_min, o.phi_min);
    phi_max = std::max(phi_max, o.phi_max);
    phi_lower_bound = o.phi_lower_bound;
    phi_upper_bound = o.phi_upper_bound;
    oracle_norm_ratio = std::max(oracle_norm_ratio, o.oracle_norm_ratio);
    max_abs_coordinate = std::max(max_abs_coordinate, o.max_abs_coordinate);
  }
};

struct Trajectory {
  std::vector<Matrix> x;      // x[t] row i = x_{i,t}, t = 0..T
  std::vector<Vector> phi;    // phi[t](i) = phi_{i,t}
  Matrix node_cost;           // (T+1) x n, F_t(x_{j,t})
  std::vector<Matrix> zeta;   // zeta[t] row i = zeta_{i,t} (when recorded)
  InvariantSummary invariants;

  Round horizon() const { return x.empty() ? 0 : x.size() - 1; }
  std::size_t nodes() const { return x.empty() ? 0 : static_cast<std::size_t>(x.front().rows()); }
};

/// Tolerances for the per-round checks.
struct Tolerances {
  double column_sum = 1e-12;
  double row_sum = 1e-12;
  double phi_sum = 1e-10;
  double feasibility = 1e-9;
  double oracle_slack = 1e-9;
  double divergence = 1e6;
};

/// phi_{i,0} = 1, x_{i,0} = projection of the configured start (default: the
/// Chebyshev centre) onto (1 - xi) Omega.
inline NetworkState init(std::size_t n, const ConvexSet& set, const RunConfig& config) {
  const Vector start = config.start.value_or(set.center());
  require_dimension(start.size(), set.dimension(), "init(start)");
  const Vector x0 = set.project(start, config.shrink());
  NetworkState s;
  s.t = 0;
  s.x = x0.transpose().replicate(static_cast<Eigen::Index>(n), 1);
  s.phi = Vector::Ones(static_cast<Eigen::Index>(n));
  return s;
}

class Engine {
 public:
  Engine(const GraphSchedule& schedule, const OnlineCost& cost, const ConvexSet& set,
         RunConfig config, Tolerances tol = {})
      : schedule_(schedule), cost_(cost), set_(set), config_(std::move(config)), tol_(tol) {
    if (schedule_.nodes() != cost_.nodes()) {
      throw std::invalid_argument("Engine: schedule and cost disagree on node count");
    }
    require_dimension(set_.dimension(), cost_.dimension(), "Engine(set)");
    if (config_.algorithm == Algorithm::zeroth_order) config_.smoothing.validate(set_);
    const auto [lo, hi] = schedule_.phi_bounds();
    summary_.phi_lower_bound = lo;
    summary_.phi_upper_bound = hi;
    if (config_.check_invariants) {
      for (std::size_t k = 0; k < schedule_.weights().size(); ++k) {
        const WeightMatrix& w = schedule_.weights()[k];
        summary_.column_sum_error = std::max(summary_.column_sum_error, w.column_sum_error());
        if (auto bad = check_weights(w, schedule_.graphs()[k], tol_.column_sum)) {
          throw InvariantViolation("column-stochasticity", "graph " + std::to_string(k) + ": " + *bad);
        }
      }
    }
    streams_.reserve(schedule_.nodes());
    for (std::size_t i = 0; i < schedule_.nodes(); ++i) {
      streams_.push_back(make_stream(config_.seed, config_.trial, "zeta", i));
    }
  }

  const RunConfig& config() const noexcept { return config_; }
  const InvariantSummary& invariants() const noexcept { return summary_; }

  NetworkState initial_state() {
    NetworkState s = init(schedule_.nodes(), set_, config_);
    observe_phi(s.phi);
    return s;
  }

  /// Advances `state` from round t to t+1. `order` permutes the per-node update
  /// sequence; results never depend on it because every node reads only the
  /// round-t snapshot and draws from its own stream. `zeta_out`, when given,
  /// receives the directions used this round.
  void step(NetworkState& state, std::span<const std::size_t> order = {}, Matrix* zeta_out = nullptr) {
    const Round t = state.t;
    const std::size_t n = schedule_.nodes();
    const auto nn = static_cast<Eigen::Index>(n);
    const Eigen::Index m = cost_.dimension();
    const WeightMatrix& a = schedule_.weights_at(t);

    Vector phi_next = a.a * state.phi;
    Matrix b = build_row_stochastic(a, state.phi, phi_next);
    if (config_.check_invariants) check_mixing(phi_next, b, t);

    const Matrix mixed = b * state.x;
    const double alpha = config_.step.at(t);
    const double shrink = config_.shrink();
    const bool zo = config_.algorithm == Algorithm::zeroth_order;
    const double oracle_cap = static_cast<double>(m) * cost_.lipschitz();

    std::vector<std::size_t> seq(order.begin(), order.end());
    if (seq.empty()) {
      seq.resize(n);
      std::iota(seq.begin(), seq.end(), std::size_t{0});
    } else if (seq.size() != n) {
      throw std::invalid_argument("Engine::step: order must list every node once");
    }

    Matrix next(nn, m);
    if (zeta_out) zeta_out->resize(nn, m);
    for (std::size_t i : seq) {
      const auto ii = static_cast<Eigen::Index>(i);
      const Vector xi = state.x.row(ii).transpose();
      Vector g;
      if (zo) {
        const Vector zeta = sample_sphere(streams_[i], m);
        if (zeta_out) zeta_out->row(ii) = zeta.transpose();
        g = zo_gradient(cost_, set_, i, t, xi, zeta, config_.smoothing.mu);
        if (config_.check_invariants && oracle_cap > 0.0) {
          const double ratio = g.norm() / oracle_cap;
          summary_.oracle_norm_ratio = std::max(summary_.oracle_norm_ratio, ratio);
          if (g.norm() > oracle_cap + tol_.oracle_slack) {
            throw InvariantViolation("oracle-norm-bound",
                                     "||g|| = " + std::to_string(g.norm()) + " > m*G = " +
                                         std::to_string(oracle_cap) + " at node " +
                                         std::to_string(i) + ", round " + std::to_string(t));
          }
        }
      } else {
        g = cost_.subgradient(i, t, xi);
      }
      const Vector target = mixed.row(ii).transpose() - (alpha / phi_next(ii)) * g;
      next.row(ii) = set_.project(target, shrink).transpose();
    }

    if (config_.check_invariants) check_state(next, shrink, t);
    state.x = std::move(next);
    state.phi = std::move(phi_next);
    state.t = t + 1;
    observe_phi(state.phi);
    summary_.rounds = state.t;
  }

  /// Rounds 0..T: the initial state plus T synchronous updates.
  Trajectory run() {
    Trajectory traj;
    const Round horizon = config_.horizon;
    const std::size_t n = schedule_.nodes();
    traj.x.reserve(horizon + 1);
    traj.phi.reserve(horizon + 1);
    traj.node_cost.resize(static_cast<Eigen::Index>(horizon + 1), static_cast<Eigen::Index>(n));

    NetworkState s = initial_state();
    auto record = [&](const NetworkState& st) {
      for (std::size_t j = 0; j < n; ++j) {
        traj.node_cost(static_cast<Eigen::Index>(st.t), static_cast<Eigen::Index>(j)) =
            cost_.global_value(st.t, st.node(j));
      }
      traj.x.push_back(st.x);
      traj.phi.push_back(st.phi);
    };
    record(s);
    Matrix zeta;
    for (Round t = 0; t < horizon; ++t) {
      step(s, {}, config_.record_zeta ? &zeta : nullptr);
      if (config_.record_zeta) traj.zeta.push_back(zeta);
      record(s);
    }
    traj.invariants = summary_;
    return traj;
  }

 private:
  void observe_phi(const Vector& phi) {
    summary_.phi_min = std::min(summary_.phi_min, phi.minCoeff());
    summary_.phi_max = std::max(summary_.phi_max, phi.maxCoeff());
    if (config_.check_invariants &&
        (phi.minCoeff() < summary_.phi_lower_bound || phi.maxCoeff() > summary_.phi_upper_bound)) {
      throw InvariantViolation("phi-bounds", "phi outside [" + std::to_string(summary_.phi_lower_bound) +
                                                 ", " + std::to_string(summary_.phi_upper_bound) + "]");
    }
  }

  void check_mixing(const Vector& phi_next, const Matrix& b, Round t) {
    const double n = static_cast<double>(schedule_.nodes());
    const double sum_err = std::abs(phi_next.sum() - n);
    const double row_err = (b.rowwise().sum().array() - 1.0).abs().maxCoeff();
    summary_.phi_sum_error = std::max(summary_.phi_sum_error, sum_err);
    summary_.row_sum_error = std::max(summary_.row_sum_error, row_err);
    if (sum_err > tol_.phi_sum) {
      throw InvariantViolation("phi-conservation", "|sum(phi) - n| = " + std::to_string(sum_err) +
                                                       " at round " + std::to_string(t));
    }
    if (row_err > tol_.row_sum) {
      throw InvariantViolation("row-stochasticity", "row sum error " + std::to_string(row_err) +
                                                        " at round " + std::to_string(t));
    }
  }

  void check_state(const Matrix& x, double shrink, Round t) {
    const double big = x.cwiseAbs().maxCoeff();
    summary_.max_abs_coordinate = std::max(summary_.max_abs_coordinate, big);
    if (!(big <= tol_.divergence)) {
      throw InvariantViolation("divergence-guard", "|x| = " + std::to_string(big) + " at round " +
                                                       std::to_string(t + 1));
    }
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (!set_.contains(x.row(i).transpose(), shrink, tol_.feasibility)) {
        throw InvariantViolation("feasibility", "node " + std::to_string(i) + " left the set at round " +
                                                    std::to_string(t + 1));
      }
    }
  }

  const GraphSchedule& schedule_;
  const OnlineCost& cost_;
  const ConvexSet& set_;
  RunConfig config_;
  Tolerances tol_;
  std::vector<Rng> streams_;
  InvariantSummary summary_;
};

inline Trajectory run(const RunConfig& config, const GraphSchedule& schedule, const OnlineCost& cost,
                      const ConvexSet& set) {
  return Engine(schedule, cost, set, config).run();
}

}  // namespace pushsum
