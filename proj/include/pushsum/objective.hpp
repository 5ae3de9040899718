#pragma once

// Online cost families and the two-point zeroth-order oracle.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "pushsum/core.hpp"
#include "pushsum/geometry.hpp"
#include "pushsum/rng.hpp"

namespace pushsum {

/// Per-round local costs f_{i,t}. Round data is frozen once generated, so
/// `value` and `subgradient` are pure in (i, t, x).
class OnlineCost {
 public:
  virtual ~OnlineCost() = default;

  virtual std::string name() const = 0;
  virtual std::size_t nodes() const = 0;
  virtual Eigen::Index dimension() const = 0;

  /// Bandit query f_{i,t}(x).
  virtual double value(std::size_t i, Round t, const Vector& x) const = 0;
  /// Some g in the subdifferential of f_{i,t} at x.
  virtual Vector subgradient(std::size_t i, Round t, const Vector& x) const = 0;

  /// F_t(x) = sum_i f_{i,t}(x).
  virtual double global_value(Round t, const Vector& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes(); ++i) s += value(i, t, x);
    return s;
  }

  virtual Vector global_subgradient(Round t, const Vector& x) const {
    Vector g = Vector::Zero(dimension());
    for (std::size_t i = 0; i < nodes(); ++i) g += subgradient(i, t, x);
    return g;
  }

  // Composite view F_t = smooth_t + w_t * ||x||_1 used by the clairvoyant solver.

  virtual Vector global_smooth_gradient(Round t, const Vector& x) const {
    return global_subgradient(t, x);
  }
  virtual double global_l1_weight(Round /*t*/) const { return 0.0; }
  /// Hessian of the smooth part when it is quadratic.
  virtual std::optional<Matrix> global_hessian(Round /*t*/) const { return std::nullopt; }
  /// Closed-form arg min over the problem's own domain, when known.
  virtual std::optional<Vector> analytic_minimizer(Round /*t*/) const { return std::nullopt; }

  /// G with ||g_{i,t}(x)|| <= G over the feasible set.
  double lipschitz() const noexcept { return lipschitz_; }
  void set_lipschitz(double g) { lipschitz_ = g; }

 protected:
  double lipschitz_ = 0.0;
};

struct SmoothingParams {
  double mu = 1e-3;
  double xi = 0.02;

  /// mu in (0, r_inner * xi] and xi in (0, 1).
  void validate(const ConvexSet& set) const {
    if (!(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("smoothing: xi must lie in (0, 1)");
    if (!(mu > 0.0)) throw std::invalid_argument("smoothing: mu must be positive");
    if (mu > set.r_inner() * xi * (1.0 + 1e-12)) {
      throw std::invalid_argument("smoothing: mu = " + std::to_string(mu) + " exceeds r*xi = " +
                                  std::to_string(set.r_inner() * xi));
    }
  }

  /// mu = r / sqrt(T + 1), xi = 1 / sqrt(T + 1).
  static SmoothingParams for_horizon(const ConvexSet& set, Round horizon) {
    const double s = std::sqrt(static_cast<double>(horizon) + 1.0);
    return {set.r_inner() / s, 1.0 / s};
  }
};

/// Uniform draw on the unit sphere S^{m-1} (normalised isotropic Gaussian).
inline Vector sample_sphere(Rng& rng, Eigen::Index m) {
  if (m < 1) throw std::invalid_argument("sample_sphere: m must be positive");
  std::normal_distribution<double> g(0.0, 1.0);
  Vector z(m);
  double n = 0.0;
  do {
    for (Eigen::Index k = 0; k < m; ++k) z(k) = g(rng);
    n = z.norm();
  } while (n == 0.0);
  return z / n;
}

/// Uniform draw from the unit ball B^m.
inline Vector sample_ball(Rng& rng, Eigen::Index m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::pow(u(rng), 1.0 / static_cast<double>(m)) * sample_sphere(rng, m);
}

/// (m / mu) (f_{i,t}(x + mu zeta) - f_{i,t}(x)) zeta, using exactly two value
/// queries. Throws InvariantViolation when the perturbed query point leaves
/// Omega, which means the shrink/mu coupling upstream is broken.
inline Vector zo_gradient(const OnlineCost& cost, const ConvexSet& set, std::size_t i, Round t,
                          const Vector& x, const Vector& zeta, double mu) {
  require_dimension(x.size(), cost.dimension(), "zo_gradient(x)");
  require_dimension(zeta.size(), cost.dimension(), "zo_gradient(zeta)");
  Vector probe = x + mu * zeta;
  if (!set.contains(probe, 0.0, 1e-9)) {
    throw InvariantViolation("feasibility-chain",
                             "query point x + mu*zeta left the feasible set at node " +
                                 std::to_string(i) + ", round " + std::to_string(t));
  }
  const double m = static_cast<double>(cost.dimension());
  const double diff = cost.value(i, t, probe) - cost.value(i, t, x);
  return (m / mu * diff) * zeta;
}

/// Sampled estimate of G: max subgradient norm over `samples` uniform points
/// of Omega (plus box vertices) and rounds in [0, t_max], times `margin`.
inline double estimate_lipschitz(const OnlineCost& cost, const ConvexSet& set, Round t_max, Rng& rng,
                                 std::size_t samples = 10000, double margin = 1.1) {
  std::uniform_int_distribution<Round> round(0, t_max);
  double best = 0.0;
  auto probe = [&](const Vector& x, Round t) {
    for (std::size_t i = 0; i < cost.nodes(); ++i) {
      best = std::max(best, cost.subgradient(i, t, x).norm());
    }
  };
  for (std::size_t s = 0; s < samples; ++s) probe(set.sample(rng), round(rng));
  if (set.kind() == SetKind::box && set.dimension() <= 12) {
    const Eigen::Index m = set.dimension();
    for (std::uint64_t mask = 0; mask < (1ULL << m); ++mask) {
      Vector v(m);
      for (Eigen::Index k = 0; k < m; ++k) v(k) = (mask >> k) & 1ULL ? set.hi()(k) : set.lo()(k);
      probe(v, 0);
      probe(v, t_max);
    }
  }
  return margin * best;
}

}  // namespace pushsum
