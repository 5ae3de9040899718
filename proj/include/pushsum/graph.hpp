#pragma once

// Time-varying directed communication graphs and their mixing matrices.
//
// Node indices are 0-based throughout the library. Edge (from, to) means
// `to` receives from `from`. Every node implicitly hears itself.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pushsum/core.hpp"
#include "pushsum/rng.hpp"

namespace pushsum {

struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class Digraph {
 public:
  Digraph() = default;

  /// Throws std::invalid_argument on out-of-range endpoints, duplicate edges or
  /// explicit self-loops.
  Digraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    if (n_ == 0) throw std::invalid_argument("Digraph: node count must be positive");
    std::sort(edges_.begin(), edges_.end());
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      const Edge& e = edges_[k];
      if (e.from >= n_ || e.to >= n_) {
        throw std::invalid_argument("Digraph: edge (" + std::to_string(e.from) + "," +
                                    std::to_string(e.to) + ") out of range");
      }
      if (e.from == e.to) throw std::invalid_argument("Digraph: explicit self-loop");
      if (k > 0 && edges_[k - 1] == e) throw std::invalid_argument("Digraph: duplicate edge");
    }
  }

  std::size_t size() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  bool has_edge(std::size_t from, std::size_t to) const {
    return std::binary_search(edges_.begin(), edges_.end(), Edge{from, to});
  }

  /// |N_j^-|: out-neighbours of j including j itself.
  std::size_t out_degree_with_self(std::size_t j) const {
    return 1 + static_cast<std::size_t>(std::count_if(
                   edges_.begin(), edges_.end(), [j](const Edge& e) { return e.from == j; }));
  }

  Digraph merged(const Digraph& other) const {
    if (other.n_ != n_) throw std::invalid_argument("Digraph::merged: node count mismatch");
    std::set<Edge> all(edges_.begin(), edges_.end());
    all.insert(other.edges_.begin(), other.edges_.end());
    return Digraph(n_, {all.begin(), all.end()});
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
};

namespace detail {

inline std::size_t reach_count(std::size_t n, const std::vector<Edge>& edges, bool reverse) {
  std::vector<std::vector<std::size_t>> adj(n);
  for (const Edge& e : edges) {
    if (reverse) {
      adj[e.to].push_back(e.from);
    } else {
      adj[e.from].push_back(e.to);
    }
  }
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count;
}

}  // namespace detail

inline bool is_strongly_connected(const Digraph& g) {
  const std::size_t n = g.size();
  if (n <= 1) return true;
  return detail::reach_count(n, g.edges(), false) == n &&
         detail::reach_count(n, g.edges(), true) == n;
}

/// Column-stochastic mixing matrix. a(i, j) weighs information flowing j -> i.
struct WeightMatrix {
  Matrix a;
  double gamma_floor = 0.0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(a.rows()); }

  /// Largest |column sum - 1|.
  double column_sum_error() const {
    return (a.colwise().sum().array() - 1.0).abs().maxCoeff();
  }
};

/// Smallest strictly positive entry.
inline double min_positive_weight(const Matrix& a) {
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (a(i, j) > 0.0) m = std::min(m, a(i, j));
    }
  }
  return m;
}

/// Out-degree rule: a(i, j) = 1/|N_j^-| for every edge j -> i, remainder of
/// column j on the diagonal.
inline WeightMatrix build_column_stochastic(const Digraph& g) {
  const std::size_t n = g.size();
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<std::size_t> out(n, 1);
  for (const Edge& e : g.edges()) ++out[e.from];
  for (const Edge& e : g.edges()) {
    a(static_cast<Eigen::Index>(e.to), static_cast<Eigen::Index>(e.from)) =
        1.0 / static_cast<double>(out[e.from]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != j) off += a(static_cast<Eigen::Index>(i), jj);
    }
    a(jj, jj) = 1.0 - off;
  }
  WeightMatrix w{std::move(a), 0.0};
  w.gamma_floor = min_positive_weight(w.a);
  return w;
}

/// Wraps a user-supplied matrix. Nothing is normalised; stochasticity and the
/// sparsity pattern are checked by `check_weights` and by the engine.
inline WeightMatrix weights_from_matrix(Matrix a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("weight matrix must be square");
  if ((a.array() < 0.0).any()) throw std::invalid_argument("weight matrix has negative entries");
  WeightMatrix w{std::move(a), 0.0};
  w.gamma_floor = min_positive_weight(w.a);
  return w;
}

/// Returns a description of the first violated WeightMatrix invariant, if any.
inline std::optional<std::string> check_weights(const WeightMatrix& w, const Digraph& g,
                                                double tol = 1e-12) {
  if (w.size() != g.size()) return "weight matrix size differs from node count";
  const double err = w.column_sum_error();
  if (!(err <= tol)) {
    return "column sums deviate from 1 by " + std::to_string(err);
  }
  const auto n = static_cast<Eigen::Index>(w.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && w.a(i, j) > 0.0 &&
          !g.has_edge(static_cast<std::size_t>(j), static_cast<std::size_t>(i))) {
        return "positive weight a(" + std::to_string(i) + "," + std::to_string(j) +
               ") without edge";
      }
    }
  }
  return std::nullopt;
}

/// b(i, j) = a(i, j) * phi[j] / phi_next[i]. Row-stochastic whenever
/// phi_next = A * phi and A is column-stochastic.
inline Matrix build_row_stochastic(const WeightMatrix& w, const Vector& phi, const Vector& phi_next) {
  const auto n = static_cast<Eigen::Index>(w.size());
  require_dimension(phi.size(), n, "build_row_stochastic(phi)");
  require_dimension(phi_next.size(), n, "build_row_stochastic(phi_next)");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(phi_next(i) > 0.0)) {
      throw InvariantViolation("phi-positivity",
                               "phi_next[" + std::to_string(i) + "] = " + std::to_string(phi_next(i)));
    }
  }
  return phi_next.cwiseInverse().asDiagonal() * w.a * phi.asDiagonal();
}

enum class SchedulePolicy { cyclic, sequence };

/// The sequence {G_t, A_t}. Cyclic schedules repeat `order`; sequence
/// schedules follow `order` round by round and either wrap (`wrap = true`) or
/// reject rounds past the end.
class GraphSchedule {
 public:
  GraphSchedule(std::vector<Digraph> graphs, std::vector<WeightMatrix> weights,
                std::vector<std::size_t> order, SchedulePolicy policy, std::size_t b_window,
                bool wrap = true)
      : graphs_(std::move(graphs)),
        weights_(std::move(weights)),
        order_(std::move(order)),
        policy_(policy),
        b_window_(b_window),
        wrap_(wrap) {
    if (graphs_.empty()) throw std::invalid_argument("GraphSchedule: no graphs");
    if (weights_.size() != graphs_.size()) {
      throw std::invalid_argument("GraphSchedule: one weight matrix per graph required");
    }
    if (order_.empty()) {
      for (std::size_t k = 0; k < graphs_.size(); ++k) order_.push_back(k);
    }
    for (std::size_t k : order_) {
      if (k >= graphs_.size()) throw std::invalid_argument("GraphSchedule: order index out of range");
    }
    for (const Digraph& g : graphs_) {
      if (g.size() != graphs_.front().size()) {
        throw std::invalid_argument("GraphSchedule: graphs disagree on node count");
      }
    }
    if (b_window_ == 0) throw std::invalid_argument("GraphSchedule: B window must be positive");
    gamma_floor_ = std::numeric_limits<double>::infinity();
    for (const WeightMatrix& w : weights_) gamma_floor_ = std::min(gamma_floor_, w.gamma_floor);
  }

  /// Weights derived by the out-degree rule.
  static GraphSchedule derived(std::vector<Digraph> graphs, std::vector<std::size_t> order,
                               SchedulePolicy policy, std::size_t b_window, bool wrap = true) {
    std::vector<WeightMatrix> w;
    w.reserve(graphs.size());
    for (const Digraph& g : graphs) w.push_back(build_column_stochastic(g));
    return GraphSchedule(std::move(graphs), std::move(w), std::move(order), policy, b_window, wrap);
  }

  static GraphSchedule constant(const Digraph& g) {
    return derived({g}, {}, SchedulePolicy::cyclic, 1);
  }

  std::size_t nodes() const noexcept { return graphs_.front().size(); }
  std::size_t b_window() const noexcept { return b_window_; }
  SchedulePolicy policy() const noexcept { return policy_; }
  double gamma_floor() const noexcept { return gamma_floor_; }
  const std::vector<Digraph>& graphs() const noexcept { return graphs_; }
  const std::vector<WeightMatrix>& weights() const noexcept { return weights_; }

  std::size_t index_at(Round t) const {
    if (policy_ == SchedulePolicy::sequence && !wrap_ && t >= order_.size()) {
      throw std::out_of_range("GraphSchedule: round " + std::to_string(t) +
                              " beyond explicit round list of length " +
                              std::to_string(order_.size()));
    }
    return order_[t % order_.size()];
  }

  const Digraph& graph_at(Round t) const { return graphs_[index_at(t)]; }
  const WeightMatrix& weights_at(Round t) const { return weights_[index_at(t)]; }

  /// Worst-case bounds on phi: [gamma^{2(n-1)B}, n - gamma^{2(n-1)B}].
  /// A single node keeps phi = 1, where the closed form degenerates.
  std::pair<double, double> phi_bounds() const {
    if (nodes() == 1) return {1.0, 1.0};
    const double n = static_cast<double>(nodes());
    const double e = 2.0 * (n - 1.0) * static_cast<double>(b_window_);
    const double g = std::pow(gamma_floor_, e);
    return {g, n - g};
  }

 private:
  std::vector<Digraph> graphs_;
  std::vector<WeightMatrix> weights_;
  std::vector<std::size_t> order_;
  SchedulePolicy policy_;
  std::size_t b_window_;
  bool wrap_;
  double gamma_floor_ = 0.0;
};

inline const Digraph& graph_at(const GraphSchedule& schedule, Round t) { return schedule.graph_at(t); }

/// True iff every window of B consecutive graphs starting in [0, horizon - B]
/// has a strongly connected union.
inline bool check_joint_connectivity(const GraphSchedule& schedule, Round horizon) {
  const std::size_t b = schedule.b_window();
  if (horizon < b) throw std::invalid_argument("check_joint_connectivity: horizon < B window");
  for (Round start = 0; start + b <= horizon; ++start) {
    Digraph u = schedule.graph_at(start);
    for (Round l = 1; l < b; ++l) u = u.merged(schedule.graph_at(start + l));
    if (!is_strongly_connected(u)) return false;
  }
  return true;
}

// ---- generators ------------------------------------------------------------

inline Digraph complete_graph(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) e.push_back({i, j});
  return Digraph(n, std::move(e));
}

inline Digraph directed_ring(std::size_t n) {
  std::vector<Edge> e;
  if (n > 1) {
    for (std::size_t i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
  }
  return Digraph(n, std::move(e));
}

/// Random strongly connected digraph: a randomly permuted directed ring plus
/// each remaining ordered pair independently with probability `density`.
inline Digraph random_strongly_connected(std::size_t n, double density, Rng& rng) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::set<Edge> e;
  if (n > 1) {
    for (std::size_t k = 0; k < n; ++k) e.insert({perm[k], perm[(k + 1) % n]});
  }
  std::bernoulli_distribution coin(std::clamp(density, 0.0, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && coin(rng)) e.insert({i, j});
  return Digraph(n, {e.begin(), e.end()});
}

}  // namespace pushsum
