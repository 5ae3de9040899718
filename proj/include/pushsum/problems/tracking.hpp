#pragma once

// Cooperative tracking of three sinusoidal targets. Target k has state
// (kappa_k sin(w_k tau + nu_k), w_k kappa_k cos(w_k tau + nu_k)) at continuous
// time tau = t / sample_rate. Node i observes y_{i,t} = C_i x*_t with a 1x6 row
// C_i and pays f_{i,t}(x) = 0.5 (C_i x - y_{i,t})^2.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "pushsum/objective.hpp"

namespace pushsum {

struct TrackingParams {
  std::size_t nodes = 6;
  std::vector<double> omega{1.0, 1.5, 2.0};
  double sample_rate = 100.0;
  double amplitude_max = 3.0;
};

class TrackingProblem final : public OnlineCost {
 public:
  /// Draws kappa ~ U[0, amplitude_max], nu ~ U[0, pi] per target and C_i with
  /// U[0, 1] entries. `domain_radius` bounds ||x|| over the feasible set and
  /// feeds the analytic G.
  TrackingProblem(const TrackingParams& params, Rng& rng, double domain_radius)
      : params_(params) {
    const std::size_t targets = params_.omega.size();
    std::uniform_real_distribution<double> amp(0.0, params_.amplitude_max);
    std::uniform_real_distribution<double> phase(0.0, std::numbers::pi);
    for (std::size_t k = 0; k < targets; ++k) {
      kappa_.push_back(amp(rng));
      nu_.push_back(phase(rng));
    }
    std::uniform_real_distribution<double> entry(0.0, 1.0);
    c_ = Matrix(static_cast<Eigen::Index>(params_.nodes), static_cast<Eigen::Index>(2 * targets));
    for (Eigen::Index i = 0; i < c_.rows(); ++i)
      for (Eigen::Index j = 0; j < c_.cols(); ++j) c_(i, j) = entry(rng);
    finish(domain_radius);
  }

  /// Fixed targets and measurement rows (one row per node).
  TrackingProblem(const TrackingParams& params, std::vector<double> kappa, std::vector<double> nu,
                  Matrix c, double domain_radius)
      : params_(params), kappa_(std::move(kappa)), nu_(std::move(nu)), c_(std::move(c)) {
    if (kappa_.size() != params_.omega.size() || nu_.size() != params_.omega.size()) {
      throw std::invalid_argument("TrackingProblem: one amplitude and phase per target");
    }
    require_dimension(c_.cols(), static_cast<Eigen::Index>(2 * params_.omega.size()),
                      "TrackingProblem(C)");
    params_.nodes = static_cast<std::size_t>(c_.rows());
    finish(domain_radius);
  }

  std::string name() const override { return "tracking"; }
  std::size_t nodes() const override { return params_.nodes; }
  Eigen::Index dimension() const override { return c_.cols(); }

  double time_of(Round t) const { return static_cast<double>(t) / params_.sample_rate; }

  /// Stacked true state x*_t.
  Vector target_state(Round t) const {
    const double tau = time_of(t);
    Vector x(dimension());
    for (std::size_t k = 0; k < kappa_.size(); ++k) {
      const double w = params_.omega[k];
      const auto r = static_cast<Eigen::Index>(2 * k);
      x(r) = kappa_[k] * std::sin(w * tau + nu_[k]);
      x(r + 1) = w * kappa_[k] * std::cos(w * tau + nu_[k]);
    }
    return x;
  }

  double measurement(std::size_t i, Round t) const {
    return c_.row(static_cast<Eigen::Index>(i)).dot(target_state(t));
  }

  double value(std::size_t i, Round t, const Vector& x) const override {
    const double r = c_.row(static_cast<Eigen::Index>(i)).dot(x) - measurement(i, t);
    return 0.5 * r * r;
  }

  Vector subgradient(std::size_t i, Round t, const Vector& x) const override {
    const auto row = c_.row(static_cast<Eigen::Index>(i));
    const double r = row.dot(x) - measurement(i, t);
    return r * row.transpose();
  }

  double global_value(Round t, const Vector& x) const override {
    return 0.5 * (c_ * (x - target_state(t))).squaredNorm();
  }

  Vector global_smooth_gradient(Round t, const Vector& x) const override {
    return c_.transpose() * (c_ * (x - target_state(t)));
  }

  std::optional<Matrix> global_hessian(Round /*t*/) const override {
    return Matrix(c_.transpose() * c_);
  }

  /// Exact when the stacked C has full column rank and the state lies in Omega.
  std::optional<Vector> analytic_minimizer(Round t) const override { return target_state(t); }

  const Matrix& measurement_matrix() const noexcept { return c_; }
  const std::vector<double>& amplitudes() const noexcept { return kappa_; }
  const std::vector<double>& phases() const noexcept { return nu_; }
  const TrackingParams& params() const noexcept { return params_; }

 private:
  void finish(double domain_radius) {
    double state_bound = 0.0;
    for (std::size_t k = 0; k < kappa_.size(); ++k) {
      const double w = params_.omega[k];
      state_bound += kappa_[k] * kappa_[k] * std::max(1.0, w * w);
    }
    state_bound = std::sqrt(state_bound);
    double g = 0.0;
    for (Eigen::Index i = 0; i < c_.rows(); ++i) {
      const double cn = c_.row(i).norm();
      g = std::max(g, cn * cn * (domain_radius + state_bound));
    }
    lipschitz_ = g;
  }

  TrackingParams params_;
  std::vector<double> kappa_, nu_;
  Matrix c_;
};

}  // namespace pushsum
