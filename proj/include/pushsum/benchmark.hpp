#pragma once

// Clairvoyant minimisers, dynamic regret, path variation, consensus and Perron
// diagnostics, and multi-trial aggregation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "pushsum/core.hpp"
#include "pushsum/engine.hpp"
#include "pushsum/geometry.hpp"
#include "pushsum/graph.hpp"
#include "pushsum/objective.hpp"

namespace pushsum {

// ---- clairvoyant -----------------------------------------------------------

/// The quartic benchmark's closed-form minimiser (-2, arctan(t / 10)).
inline Vector clairvoyant_quartic(double t) { return Vector{{-2.0, std::atan(t / 10.0)}}; }

enum class ClairvoyantMode { analytic, iterative };

struct SolverBudget {
  std::size_t iterations = 5000;
  double tol = 1e-8;
};

struct IterativeResult {
  Vector x;
  double residual = 0.0;  // proximal-gradient mapping norm at x
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

inline Vector soft_threshold(const Vector& v, double k) {
  return v.unaryExpr([k](double a) { return a > k ? a - k : (a < -k ? a + k : 0.0); });
}

/// prox of s*w*||.||_1 + indicator(Omega). Exact for boxes and for balls
/// centred at the origin.
inline Vector prox(const ConvexSet& set, const Vector& v, double s, double w) {
  return set.project(w > 0.0 ? soft_threshold(v, s * w) : v);
}

inline double largest_eigenvalue(const Matrix& h) {
  Vector v = Vector::Ones(h.rows()).normalized();
  double lambda = 0.0;
  for (int k = 0; k < 500; ++k) {
    Vector hv = h * v;
    const double nrm = hv.norm();
    if (nrm == 0.0) return 0.0;
    const double next = v.dot(hv);
    v = hv / nrm;
    if (std::abs(next - lambda) <= 1e-12 * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

}  // namespace detail

/// Accelerated proximal gradient (FISTA with gradient restart) on
/// F_t = smooth + w ||x||_1 over Omega. Step 1/L with L from power iteration
/// when the smooth part is quadratic, backtracking otherwise. Stops once the
/// gradient-mapping norm drops below budget.tol.
inline IterativeResult clairvoyant_iterative(const OnlineCost& cost, const ConvexSet& set, Round t,
                                             const SolverBudget& budget,
                                             std::optional<Vector> warm = std::nullopt) {
  const double w = cost.global_l1_weight(t);
  auto smooth = [&](const Vector& x) { return cost.global_value(t, x) - w * x.lpNorm<1>(); };
  auto grad = [&](const Vector& x) { return cost.global_smooth_gradient(t, x); };

  double lip = 1.0;
  bool fixed_step = false;
  if (auto h = cost.global_hessian(t)) {
    lip = std::max(detail::largest_eigenvalue(*h), 1e-12);
    fixed_step = true;
  }

  Vector x = set.project(warm.value_or(set.center()));
  Vector y = x;
  double momentum = 1.0;
  auto mapping_norm = [&](const Vector& z) {
    const double s = 1.0 / lip;
    return (z - detail::prox(set, z - s * grad(z), s, w)).norm() / s;
  };

  IterativeResult out;
  for (std::size_t k = 0; k < budget.iterations; ++k) {
    const Vector gy = grad(y);
    Vector next;
    if (fixed_step) {
      next = detail::prox(set, y - gy / lip, 1.0 / lip, w);
    } else {
      const double fy = smooth(y);
      for (;;) {
        next = detail::prox(set, y - gy / lip, 1.0 / lip, w);
        const Vector d = next - y;
        if (smooth(next) <= fy + gy.dot(d) + 0.5 * lip * d.squaredNorm() + 1e-15 * std::abs(fy)) break;
        lip *= 2.0;
      }
    }
    const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    // restart when the momentum direction opposes the gradient step
    if ((y - next).dot(next - x) > 0.0) {
      momentum = 1.0;
      y = next;
    } else {
      y = next + ((momentum - 1.0) / next_momentum) * (next - x);
      momentum = next_momentum;
    }
    x = std::move(next);
    out.iterations = k + 1;
    if ((k & 7) == 7 || k + 1 == budget.iterations) {
      if (mapping_norm(x) < budget.tol) break;
    }
  }
  out.x = x;
  out.residual = mapping_norm(x);
  out.converged = out.residual <= 10.0 * budget.tol;
  return out;
}

/// Componentwise l1 optimality residual of x for smooth + w ||x||_1 when the
/// set constraint is inactive.
inline double l1_kkt_residual(const OnlineCost& cost, Round t, const Vector& x) {
  const Vector g = cost.global_smooth_gradient(t, x);
  const double w = cost.global_l1_weight(t);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double r = x(k) != 0.0 ? std::abs(g(k) + w * (x(k) > 0.0 ? 1.0 : -1.0))
                                 : std::max(0.0, std::abs(g(k)) - w);
    worst = std::max(worst, r);
  }
  return worst;
}

/// Per-round minimisers x*_t and optimal values F_t(x*_t).
struct Clairvoyant {
  ClairvoyantMode mode = ClairvoyantMode::analytic;
  std::vector<Vector> minimizers;
  std::vector<double> values;
  std::vector<double> residuals;  // iterative mode only
  bool converged = true;

  Round rounds() const { return minimizers.size(); }
};

/// Minimisers for t = 0..rounds-1. Iterative solves are warm-started from the
/// previous round.
inline Clairvoyant compute_clairvoyant(const OnlineCost& cost, const ConvexSet& set, Round rounds,
                                       ClairvoyantMode mode, const SolverBudget& budget = {}) {
  Clairvoyant c;
  c.mode = mode;
  c.minimizers.reserve(rounds);
  c.values.reserve(rounds);
  std::optional<Vector> warm;
  for (Round t = 0; t < rounds; ++t) {
    Vector x;
    if (mode == ClairvoyantMode::analytic) {
      auto a = cost.analytic_minimizer(t);
      if (!a) throw std::invalid_argument("compute_clairvoyant: cost has no analytic minimiser");
      x = std::move(*a);
    } else {
      IterativeResult r = clairvoyant_iterative(cost, set, t, budget, warm);
      c.residuals.push_back(r.residual);
      c.converged = c.converged && r.converged;
      x = std::move(r.x);
      warm = x;
    }
    c.values.push_back(cost.global_value(t, x));
    c.minimizers.push_back(std::move(x));
  }
  return c;
}

/// Largest F_t(x*) - F_t(x) over `samples` uniform points of Omega; the
/// clairvoyant passes when this is <= tol.
inline double audit_clairvoyant(const OnlineCost& cost, const ConvexSet& set, Round t,
                                const Vector& xstar, Rng& rng, std::size_t samples = 100) {
  const double fstar = cost.global_value(t, xstar);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples; ++k) {
    worst = std::max(worst, fstar - cost.global_value(t, set.sample(rng)));
  }
  return worst;
}

// ---- regret ----------------------------------------------------------------

/// Running R_j(t) = sum_{s<=t} F_s(x_{j,s}) - F_s(x*_s), t = 0..T.
inline Vector dynamic_regret(const Trajectory& traj, const Clairvoyant& clair, std::size_t j) {
  const Round T = traj.horizon();
  if (clair.rounds() < T + 1) throw std::invalid_argument("dynamic_regret: clairvoyant too short");
  Vector r(static_cast<Eigen::Index>(T + 1));
  double acc = 0.0;
  for (Round t = 0; t <= T; ++t) {
    acc += traj.node_cost(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) - clair.values[t];
    r(static_cast<Eigen::Index>(t)) = acc;
  }
  return r;
}

/// C_T = sum_{t=0}^{T} ||x*_{t+1} - x*_t||; needs minimisers up to T+1.
inline double path_variation(const Clairvoyant& clair, Round T) {
  if (clair.rounds() < T + 2) throw std::invalid_argument("path_variation: need x* up to T+1");
  double c = 0.0;
  for (Round t = 0; t <= T; ++t) c += (clair.minimizers[t + 1] - clair.minimizers[t]).norm();
  return c;
}

/// max_{i,k} ||x_i - x_k|| over the rows of x.
inline double disagreement(const Matrix& x) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index k = i + 1; k < x.rows(); ++k) worst = std::max(worst, (x.row(i) - x.row(k)).norm());
  return worst;
}

/// max_i ||x_i - sum_k pi_k x_k||.
inline double consensus_error(const Matrix& x, const Vector& pi) {
  const Eigen::RowVectorXd bar = pi.transpose() * x;
  return (x.rowwise() - bar).rowwise().norm().maxCoeff();
}

inline double average_at(double cumulative, Round t) {
  return cumulative / static_cast<double>(std::max<Round>(t, 1));
}

/// Regret statistics of one trial, or of several after `aggregate`.
struct RegretReport {
  std::size_t trials = 1;
  Matrix cumulative;       // (T+1) x n, R_j(t) (trial mean after aggregation)
  Vector path_variation;   // C_t, t = 0..T
  Vector disagreement;     // max_{i,k} ||x_{i,t} - x_{k,t}||
  Vector max_avg;          // max_j R_j(t)/t (trial mean)
  Vector min_avg;          // min_j R_j(t)/t (trial mean)
  Vector network_avg;      // (1/n) sum_j R_j(t)/t (trial mean)
  Vector max_avg_worst;    // max over trials of max_j R_j(t)/t
  Vector min_avg_best;     // min over trials of min_j R_j(t)/t

  Round horizon() const { return static_cast<Round>(cumulative.rows()) - 1; }
};

inline RegretReport regret_report(const Trajectory& traj, const Clairvoyant& clair) {
  const Round T = traj.horizon();
  const std::size_t n = traj.nodes();
  const auto rows = static_cast<Eigen::Index>(T + 1);
  RegretReport rep;
  rep.cumulative.resize(rows, static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) rep.cumulative.col(static_cast<Eigen::Index>(j)) = dynamic_regret(traj, clair, j);

  rep.path_variation.resize(rows);
  double c = 0.0;
  for (Round t = 0; t <= T; ++t) {
    if (t + 1 < clair.rounds()) c += (clair.minimizers[t + 1] - clair.minimizers[t]).norm();
    rep.path_variation(static_cast<Eigen::Index>(t)) = c;
  }

  rep.disagreement.resize(rows);
  rep.max_avg.resize(rows);
  rep.min_avg.resize(rows);
  rep.network_avg.resize(rows);
  for (Round t = 0; t <= T; ++t) {
    const auto r = static_cast<Eigen::Index>(t);
    rep.disagreement(r) = disagreement(traj.x[t]);
    rep.max_avg(r) = average_at(rep.cumulative.row(r).maxCoeff(), t);
    rep.min_avg(r) = average_at(rep.cumulative.row(r).minCoeff(), t);
    rep.network_avg(r) = average_at(rep.cumulative.row(r).mean(), t);
  }
  rep.max_avg_worst = rep.max_avg;
  rep.min_avg_best = rep.min_avg;
  return rep;
}

/// Trial means of every curve, plus extremes across trials.
inline RegretReport aggregate(std::span<const RegretReport> trials) {
  if (trials.empty()) throw std::invalid_argument("aggregate: no trials");
  RegretReport out = trials.front();
  if (trials.size() == 1) return out;
  for (const RegretReport& r : trials.subspan(1)) {
    if (r.cumulative.rows() != out.cumulative.rows() || r.cumulative.cols() != out.cumulative.cols()) {
      throw std::invalid_argument("aggregate: trials differ in shape");
    }
    out.cumulative += r.cumulative;
    out.path_variation += r.path_variation;
    out.disagreement += r.disagreement;
    out.max_avg += r.max_avg;
    out.min_avg += r.min_avg;
    out.network_avg += r.network_avg;
    out.max_avg_worst = out.max_avg_worst.cwiseMax(r.max_avg_worst);
    out.min_avg_best = out.min_avg_best.cwiseMin(r.min_avg_best);
  }
  std::size_t total = 0;
  for (const RegretReport& r : trials) total += r.trials;
  const double k = static_cast<double>(trials.size());
  out.cumulative /= k;
  out.path_variation /= k;
  out.disagreement /= k;
  out.max_avg /= k;
  out.min_avg /= k;
  out.network_avg /= k;
  out.trials = total;
  return out;
}

// ---- Perron diagnostic -----------------------------------------------------

struct PerronDiagnostic {
  std::vector<Vector> pi;  // pi_t, t = 0..T
  Vector residual;         // residual(t) = max_i |phi_{i,t+1}/n - pi_{i,t+1}|, t = 0..T-1
  double slope = 0.0;      // fitted log-residual slope per round of distance T-t-1
  double log_constant = 0.0;
  bool exact = false;           // residual vanished to round-off everywhere
  bool low_confidence = false;  // window shorter than B * n

  double rate() const { return std::exp(slope); }
};

/// Least-squares slope and intercept of y against x.
inline std::pair<double, double> linear_fit(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {slope, my - slope * mx};
}

/// pi_T is uniform and pi_t^T = pi_{t+1}^T B_t backwards, i.e. pi_t is the
/// column-average of B(T:t) = B_{T-1}...B_t, which tends to the common row of
/// the backward product. `b` holds B_0..B_{T-1}; `phi` holds phi_0..phi_T.
inline PerronDiagnostic perron_from_matrices(std::span<const Matrix> b, std::span<const Vector> phi,
                                             std::size_t b_window = 1, double floor = 1e-13) {
  const Round T = b.size();
  if (phi.size() != T + 1) throw std::invalid_argument("perron: need T+1 phi vectors");
  if (T == 0) throw std::invalid_argument("perron: empty window");
  const Eigen::Index n = phi.front().size();
  PerronDiagnostic d;
  d.pi.resize(T + 1);
  d.pi[T] = Vector::Constant(n, 1.0 / static_cast<double>(n));
  for (Round t = T; t-- > 0;) {
    Vector p = b[t].transpose() * d.pi[t + 1];
    d.pi[t] = p / p.sum();
  }
  d.residual.resize(static_cast<Eigen::Index>(T));
  const double nn = static_cast<double>(n);
  for (Round t = 0; t < T; ++t) {
    d.residual(static_cast<Eigen::Index>(t)) = (phi[t + 1] / nn - d.pi[t + 1]).cwiseAbs().maxCoeff();
  }
  std::vector<double> xs, ys;
  for (Round t = 0; t < T; ++t) {
    const double r = d.residual(static_cast<Eigen::Index>(t));
    if (r > floor) {
      xs.push_back(static_cast<double>(T - t - 1));
      ys.push_back(std::log(r));
    }
  }
  if (xs.size() < 2) {
    d.exact = true;
    d.slope = -std::numeric_limits<double>::infinity();
  } else {
    std::tie(d.slope, d.log_constant) = linear_fit(xs, ys);
  }
  d.low_confidence = T < b_window * static_cast<std::size_t>(n);
  return d;
}

/// Rebuilds B_t from the schedule and the recorded phi history.
inline std::vector<Matrix> row_stochastic_history(const GraphSchedule& schedule,
                                                  std::span<const Vector> phi) {
  std::vector<Matrix> b;
  if (phi.empty()) return b;
  b.reserve(phi.size() - 1);
  for (Round t = 0; t + 1 < phi.size(); ++t) {
    b.push_back(build_row_stochastic(schedule.weights_at(t), phi[t], phi[t + 1]));
  }
  return b;
}

inline PerronDiagnostic estimate_perron(const GraphSchedule& schedule, std::span<const Vector> phi) {
  const std::vector<Matrix> b = row_stochastic_history(schedule, phi);
  return perron_from_matrices(b, phi, schedule.b_window());
}

/// phi_t = A_{t-1} ... A_0 1 for t = 0..T; trial independent.
inline std::vector<Vector> phi_history(const GraphSchedule& schedule, Round T) {
  std::vector<Vector> phi;
  phi.reserve(T + 1);
  phi.push_back(Vector::Ones(static_cast<Eigen::Index>(schedule.nodes())));
  for (Round t = 0; t < T; ++t) phi.push_back(schedule.weights_at(t).a * phi.back());
  return phi;
}

/// Slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < x.size(); ++k) {
    lx.push_back(std::log(x[k]));
    ly.push_back(std::log(y[k]));
  }
  return linear_fit(lx, ly).first;
}

}  // namespace pushsum
