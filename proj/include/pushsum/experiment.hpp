#pragma once

// Turns an ExperimentConfig into concrete objects and runs multi-trial
// experiments. Trials run on a small worker pool; every trial owns its cost
// instance and RNG streams, and results are stored by trial index, so output
// never depends on the number of workers.

#include <algorithm>
#include <atomic>
#include <exception>
#include <memory>
#include <thread>
#include <vector>

#include "pushsum/benchmark.hpp"
#include "pushsum/config.hpp"
#include "pushsum/engine.hpp"
#include "pushsum/geometry.hpp"
#include "pushsum/graph.hpp"
#include "pushsum/objective.hpp"
#include "pushsum/problems/quartic.hpp"
#include "pushsum/problems/sparse.hpp"
#include "pushsum/problems/tracking.hpp"

namespace pushsum {

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline ConvexSet build_set(const SetConfig& c) {
  try {
    ConvexSet s = c.kind == "box"    ? ConvexSet::box(to_vector(c.lo), to_vector(c.hi))
                  : c.kind == "ball" ? ConvexSet::ball(to_vector(c.center), c.radius)
                                     : throw ConfigError("config: set kind must be box or ball");
    return s.with_radii(c.r_inner, c.R_outer);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config [set]: ") + e.what());
  }
}

inline GraphSchedule build_schedule(const GraphConfig& c) {
  if (c.nodes == 0) throw ConfigError("config: [graph].nodes must be positive");
  try {
    const SchedulePolicy policy = c.policy == "cyclic" ? SchedulePolicy::cyclic : SchedulePolicy::sequence;
    if (!c.generator.empty()) {
      Digraph g;
      if (c.generator == "complete") {
        g = complete_graph(c.nodes);
      } else if (c.generator == "ring") {
        g = directed_ring(c.nodes);
      } else if (c.generator == "random") {
        Rng rng = make_stream(c.graph_seed, 0, "graph");
        g = random_strongly_connected(c.nodes, c.density, rng);
      } else {
        throw ConfigError("config: unknown graph generator '" + c.generator + "'");
      }
      return GraphSchedule::derived({g}, {}, policy, c.b_window);
    }
    if (c.graphs.empty()) throw ConfigError("config: [graph] needs edge lists or a generator");

    std::vector<std::string> names;
    for (const auto& [name, edges] : c.graphs) names.push_back(name);
    std::vector<Digraph> graphs;
    std::vector<WeightMatrix> weights;
    for (const std::string& name : names) {
      std::vector<Edge> edges;
      for (const auto& [from, to] : c.graphs.at(name)) {
        if (from < 1 || to < 1 || from > c.nodes || to > c.nodes) {
          throw ConfigError("config: graph '" + name + "' edge [" + std::to_string(from) + "," +
                            std::to_string(to) + "] outside 1.." + std::to_string(c.nodes));
        }
        edges.push_back({from - 1, to - 1});
      }
      graphs.emplace_back(c.nodes, std::move(edges));
      if (auto it = c.weights.find(name); it != c.weights.end()) {
        const auto& rows = it->second;
        Matrix a(static_cast<Eigen::Index>(rows.size()),
                 static_cast<Eigen::Index>(rows.empty() ? 0 : rows.front().size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (rows[i].size() != rows.front().size()) throw ConfigError("config: ragged weight matrix");
          for (std::size_t j = 0; j < rows[i].size(); ++j) {
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
          }
        }
        weights.push_back(weights_from_matrix(std::move(a)));
      } else {
        weights.push_back(build_column_stochastic(graphs.back()));
      }
    }
    for (const auto& [name, m] : c.weights) {
      if (!c.graphs.contains(name)) throw ConfigError("config: weights for unknown graph '" + name + "'");
    }
    std::vector<std::size_t> order;
    for (const std::string& name : c.order) {
      auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) throw ConfigError("config: order names unknown graph '" + name + "'");
      order.push_back(static_cast<std::size_t>(it - names.begin()));
    }
    return GraphSchedule(std::move(graphs), std::move(weights), std::move(order), policy, c.b_window, c.wrap);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config [graph]: ") + e.what());
  }
}

/// Radius of a ball about the origin containing Omega.
inline double origin_radius(const ConvexSet& set) {
  if (set.kind() == SetKind::ball) return set.center().norm() + set.radius();
  return set.lo().cwiseAbs().cwiseMax(set.hi().cwiseAbs()).norm();
}

/// Cost instance for one trial. Random problem data comes from the
/// (seed, trial, "problem") stream; `rounds` bounds pre-generated data.
inline std::unique_ptr<OnlineCost> build_cost(const ExperimentConfig& c, const ConvexSet& set,
                                              std::uint64_t trial, Round rounds) {
  Rng rng = make_stream(c.seed, trial, "problem");
  std::unique_ptr<OnlineCost> cost;
  if (c.problem == "quartic") {
    cost = std::make_unique<QuarticProblem>();
  } else if (c.problem == "tracking") {
    TrackingParams p;
    p.nodes = c.graph.nodes;
    p.omega = c.tracking.omega;
    p.sample_rate = c.tracking.sample_rate;
    p.amplitude_max = c.tracking.amplitude_max;
    cost = std::make_unique<TrackingProblem>(p, rng, origin_radius(set));
  } else {
    SparseParams p;
    p.nodes = c.sparse.nodes;
    p.rows = static_cast<Eigen::Index>(c.sparse.rows);
    p.dimension = static_cast<Eigen::Index>(c.sparse.dimension);
    p.noise_sd = c.sparse.noise_sd;
    p.gamma_reg = c.sparse.gamma_reg;
    p.sigma_reg = c.sparse.sigma_reg;
    cost = std::make_unique<SparseRecoveryProblem>(p, rng, rounds, origin_radius(set));
  }
  if (cost->nodes() != c.graph.nodes) {
    throw ConfigError("config: problem has " + std::to_string(cost->nodes()) + " nodes, graph has " +
                      std::to_string(c.graph.nodes));
  }
  if (cost->dimension() != set.dimension()) {
    throw ConfigError("config: problem dimension " + std::to_string(cost->dimension()) +
                      " differs from set dimension " + std::to_string(set.dimension()));
  }
  return cost;
}

inline ClairvoyantMode clairvoyant_mode(const ExperimentConfig& c) {
  if (c.clairvoyant.mode) {
    return *c.clairvoyant.mode == "analytic" ? ClairvoyantMode::analytic : ClairvoyantMode::iterative;
  }
  return c.problem == "sparse" ? ClairvoyantMode::iterative : ClairvoyantMode::analytic;
}

/// Derived run parameters for horizon T (the defaults that the manifest echoes).
struct DerivedParams {
  Round horizon = 0;
  double step_scale = 1.0;
  SmoothingParams smoothing;
  Eigen::Index dimension = 0;
};

inline DerivedParams derive(const ExperimentConfig& c, const ConvexSet& set, Round horizon,
                            bool horizon_smoothing = false) {
  DerivedParams d;
  d.horizon = horizon;
  d.dimension = set.dimension();
  d.step_scale = c.algorithm.step_scale.value_or(StepRule::default_for(c.algorithm.kind, d.dimension).scale);
  const SmoothingParams th = SmoothingParams::for_horizon(set, horizon);
  d.smoothing.mu = horizon_smoothing ? th.mu : c.algorithm.mu.value_or(th.mu);
  d.smoothing.xi = horizon_smoothing ? th.xi : c.algorithm.xi.value_or(th.xi);
  return d;
}

struct TrialResult {
  RegretReport report;
  InvariantSummary invariants;
  double lipschitz = 0.0;
  double clairvoyant_residual = 0.0;
  double audit_worst = -std::numeric_limits<double>::infinity();
  std::size_t audits = 0;
  Trajectory trajectory;  // kept only when requested
};

struct ExperimentResult {
  ExperimentConfig config;
  DerivedParams params;
  std::vector<TrialResult> trials;
  RegretReport aggregate;
  InvariantSummary invariants;
  PerronDiagnostic perron;
  std::vector<Vector> phi;  // trial independent
  bool joint_connectivity = true;
  double gamma_floor = 0.0;
};

struct RunOptions {
  std::size_t jobs = 1;
  bool keep_trajectories = false;
  bool horizon_smoothing = false;  // mu, xi from the horizon regardless of config
};

/// Runs every trial. Throws ConfigError, InvariantViolation or NonConvergence.
inline ExperimentResult run_experiment(const ExperimentConfig& c, Round horizon, const RunOptions& opt = {}) {
  const ConvexSet set = build_set(c.set);
  const GraphSchedule schedule = build_schedule(c.graph);

  ExperimentResult res;
  res.config = c;
  res.config.horizon = horizon;
  res.params = derive(c, set, horizon, opt.horizon_smoothing);
  res.gamma_floor = schedule.gamma_floor();

  const Round check = std::max<Round>(schedule.b_window(), std::min<Round>(horizon, 10000));
  res.joint_connectivity = check_joint_connectivity(schedule, check);
  if (!res.joint_connectivity) {
    throw InvariantViolation("joint-connectivity", "union of " + std::to_string(schedule.b_window()) +
                                                       " consecutive graphs is not strongly connected");
  }

  RunConfig rc;
  rc.algorithm = c.algorithm.kind;
  rc.horizon = horizon;
  rc.step = StepRule{res.params.step_scale};
  rc.smoothing = res.params.smoothing;
  rc.seed = c.seed;
  if (rc.algorithm == Algorithm::zeroth_order) {
    try {
      rc.smoothing.validate(set);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config [algorithm]: ") + e.what());
    }
  }

  const ClairvoyantMode mode = clairvoyant_mode(c);
  const SolverBudget budget{c.clairvoyant.iterations, c.clairvoyant.tol};

  res.trials.resize(c.trials);
  std::vector<std::exception_ptr> errors(c.trials);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= c.trials) return;
      try {
        TrialResult& tr = res.trials[k];
        auto cost = build_cost(c, set, k, horizon + 2);
        tr.lipschitz = cost->lipschitz();
        const Clairvoyant clair = compute_clairvoyant(*cost, set, horizon + 2, mode, budget);
        if (mode == ClairvoyantMode::iterative) {
          for (double r : clair.residuals) tr.clairvoyant_residual = std::max(tr.clairvoyant_residual, r);
          if (!clair.converged) {
            throw NonConvergence("clairvoyant solver residual " + std::to_string(tr.clairvoyant_residual) +
                                 " above 10*tol in trial " + std::to_string(k));
          }
        }
        if (c.clairvoyant.audit_every > 0) {
          Rng audit = make_stream(c.seed, k, "audit");
          for (Round t = 0; t <= horizon; t += c.clairvoyant.audit_every) {
            const double w = audit_clairvoyant(*cost, set, t, clair.minimizers[t], audit,
                                               c.clairvoyant.audit_samples);
            tr.audit_worst = std::max(tr.audit_worst, w);
            ++tr.audits;
            if (w > c.clairvoyant.audit_tol) {
              throw InvariantViolation("clairvoyant-audit", "F_t(x*) exceeds a sampled F_t(x) by " +
                                                                std::to_string(w) + " at round " +
                                                                std::to_string(t));
            }
          }
        }
        RunConfig trial_rc = rc;
        trial_rc.trial = k;
        Engine engine(schedule, *cost, set, trial_rc);
        Trajectory traj = engine.run();
        tr.invariants = traj.invariants;
        tr.report = regret_report(traj, clair);
        if (opt.keep_trajectories) tr.trajectory = std::move(traj);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(opt.jobs, c.trials));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<RegretReport> reports;
  reports.reserve(res.trials.size());
  for (const TrialResult& tr : res.trials) {
    reports.push_back(tr.report);
    res.invariants.merge(tr.invariants);
  }
  res.aggregate = aggregate(reports);
  res.phi = phi_history(schedule, horizon);
  if (horizon > 0) res.perron = estimate_perron(schedule, res.phi);
  return res;
}

/// One row of sweep.csv.
struct SweepRow {
  Round horizon = 0;
  double max_avg_regret = 0.0;
  double min_avg_regret = 0.0;
  double network_avg_regret = 0.0;
};

/// Runs the experiment at every horizon with mu = r/sqrt(T+1), xi = 1/sqrt(T+1).
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& c, const std::vector<Round>& horizons,
                                       std::size_t jobs = 1) {
  if (horizons.empty()) throw ConfigError("sweep: empty horizon list");
  std::vector<SweepRow> rows;
  for (Round T : horizons) {
    if (T == 0) throw ConfigError("sweep: horizons must be positive");
    RunOptions opt;
    opt.jobs = jobs;
    opt.horizon_smoothing = true;
    const ExperimentResult r = run_experiment(c, T, opt);
    const auto last = static_cast<Eigen::Index>(T);
    rows.push_back({T, r.aggregate.max_avg(last), r.aggregate.min_avg(last), r.aggregate.network_avg(last)});
  }
  return rows;
}

}  // namespace pushsum
