#pragma once

// Feasible sets with Euclidean projection.
//
// Shrinking is taken about the set's Chebyshev centre c:
//   (1 - xi) Omega := c + (1 - xi)(Omega - c).
// For sets centred at the origin this is the usual {(1 - xi) x : x in Omega}.
// With r_inner the radius of the largest ball about c inside Omega, every
// x in (1 - xi) Omega and ||u|| <= r_inner * xi gives x + u in Omega.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "pushsum/core.hpp"
#include "pushsum/rng.hpp"

namespace pushsum {

enum class SetKind { box, ball };

class ConvexSet {
 public:
  static ConvexSet box(Vector lo, Vector hi) {
    if (lo.size() != hi.size() || lo.size() == 0) {
      throw std::invalid_argument("box: lo/hi dimension mismatch");
    }
    if ((lo.array() > hi.array()).any()) throw std::invalid_argument("box: lo > hi");
    ConvexSet s;
    s.kind_ = SetKind::box;
    s.center_ = 0.5 * (lo + hi);
    s.lo_ = std::move(lo);
    s.hi_ = std::move(hi);
    s.r_inner_ = 0.5 * (s.hi_ - s.lo_).minCoeff();
    s.R_outer_ = 0.5 * (s.hi_ - s.lo_).norm();
    return s;
  }

  static ConvexSet ball(Vector center, double radius) {
    if (center.size() == 0) throw std::invalid_argument("ball: empty centre");
    if (!(radius > 0.0)) throw std::invalid_argument("ball: radius must be positive");
    ConvexSet s;
    s.kind_ = SetKind::ball;
    s.center_ = std::move(center);
    s.radius_ = radius;
    s.r_inner_ = radius;
    s.R_outer_ = radius;
    return s;
  }

  /// Overrides the computed radii (config `r_inner` / `R_outer`).
  ConvexSet with_radii(std::optional<double> r_inner, std::optional<double> R_outer) const {
    ConvexSet s = *this;
    if (r_inner) s.r_inner_ = *r_inner;
    if (R_outer) s.R_outer_ = *R_outer;
    if (s.r_inner_ < 0.0 || s.r_inner_ > s.R_outer_) {
      throw std::invalid_argument("ConvexSet: need 0 <= r_inner <= R_outer");
    }
    return s;
  }

  SetKind kind() const noexcept { return kind_; }
  Eigen::Index dimension() const noexcept { return center_.size(); }
  const Vector& center() const noexcept { return center_; }
  const Vector& lo() const noexcept { return lo_; }
  const Vector& hi() const noexcept { return hi_; }
  double radius() const noexcept { return radius_; }
  double r_inner() const noexcept { return r_inner_; }
  double R_outer() const noexcept { return R_outer_; }

  /// Whether a ball around the origin fits inside the set. When false the
  /// radii and shrinking refer to the Chebyshev centre instead.
  bool origin_interior() const {
    if (kind_ == SetKind::box) {
      return (lo_.array() < 0.0).all() && (hi_.array() > 0.0).all();
    }
    return center_.norm() < radius_;
  }

  /// Euclidean projection onto (1 - shrink) Omega.
  Vector project(const Vector& x, double shrink = 0.0) const {
    require_dimension(x.size(), dimension(), "ConvexSet::project");
    check_shrink(shrink);
    const double s = 1.0 - shrink;
    if (kind_ == SetKind::box) {
      Vector lo = center_ + s * (lo_ - center_);
      Vector hi = center_ + s * (hi_ - center_);
      return x.cwiseMax(lo).cwiseMin(hi);
    }
    const double rho = s * radius_;
    Vector d = x - center_;
    const double dn = d.norm();
    if (dn <= rho) return x;
    return center_ + (rho / dn) * d;
  }

  bool contains(const Vector& x, double shrink = 0.0, double tol = 1e-9) const {
    require_dimension(x.size(), dimension(), "ConvexSet::contains");
    check_shrink(shrink);
    const double s = 1.0 - shrink;
    if (kind_ == SetKind::box) {
      Vector lo = center_ + s * (lo_ - center_);
      Vector hi = center_ + s * (hi_ - center_);
      return ((x.array() >= lo.array() - tol) && (x.array() <= hi.array() + tol)).all();
    }
    return (x - center_).norm() <= s * radius_ + tol;
  }

  /// Uniform sample from (1 - shrink) Omega.
  Vector sample(Rng& rng, double shrink = 0.0) const {
    const double s = 1.0 - shrink;
    const Eigen::Index m = dimension();
    Vector x(m);
    if (kind_ == SetKind::box) {
      for (Eigen::Index k = 0; k < m; ++k) {
        std::uniform_real_distribution<double> u(center_(k) + s * (lo_(k) - center_(k)),
                                                 center_(k) + s * (hi_(k) - center_(k)));
        x(k) = u(rng);
      }
      return x;
    }
    std::normal_distribution<double> g(0.0, 1.0);
    double nrm = 0.0;
    do {
      for (Eigen::Index k = 0; k < m; ++k) x(k) = g(rng);
      nrm = x.norm();
    } while (nrm == 0.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = s * radius_ * std::pow(u(rng), 1.0 / static_cast<double>(m));
    return center_ + (r / nrm) * x;
  }

 private:
  static void check_shrink(double shrink) {
    if (!(shrink >= 0.0 && shrink < 1.0)) {
      throw std::invalid_argument("ConvexSet: shrink must lie in [0, 1)");
    }
  }

  SetKind kind_ = SetKind::box;
  Vector lo_, hi_, center_;
  double radius_ = 0.0;
  double r_inner_ = 0.0;
  double R_outer_ = 0.0;
};

inline Vector project(const ConvexSet& set, double shrink, const Vector& x) {
  return set.project(x, shrink);
}

inline bool contains(const ConvexSet& set, double shrink, const Vector& x, double tol) {
  return set.contains(x, shrink, tol);
}

}  // namespace pushsum
