#pragma once

// Dynamic sparse recovery. Node i sees z_{i,t} = C_{i,t} w_t + noise with a
// d x m observation matrix and pays
//   f_{i,t}(x) = (1/n) (||z_{i,t} - C_{i,t} x||^2 + gamma ||x||^2 + sigma ||x||_1).
// The signal w_t starts with two unit entries; its support S_t (|S_t| = 2)
// swaps one index with probability min(1, 1/t) for t >= 1, Gaussian noise with
// standard deviation 1/max(t, 1) is added on the new support, and the result is
// renormalised.

#include <algorithm>
#include <cmath>
#include <vector>

#include "pushsum/objective.hpp"

namespace pushsum {

struct SparseParams {
  std::size_t nodes = 40;
  Eigen::Index rows = 3;        // d
  Eigen::Index dimension = 8;   // m
  double noise_sd = 0.0;        // measurement noise on z
  std::size_t support = 2;
  std::optional<double> gamma_reg;  // default 1 / (100 d^2 n)
  std::optional<double> sigma_reg;  // default 1 / (20 d)

  double gamma() const {
    const double d = static_cast<double>(rows);
    return gamma_reg.value_or(1.0 / (100.0 * d * d * static_cast<double>(nodes)));
  }
  double sigma() const { return sigma_reg.value_or(1.0 / (20.0 * static_cast<double>(rows))); }
};

class SparseRecoveryProblem final : public OnlineCost {
 public:
  /// Generates rounds 0..rounds-1 up front. `domain_radius` bounds ||x|| over
  /// the feasible set and feeds the analytic G.
  SparseRecoveryProblem(const SparseParams& params, Rng& rng, Round rounds, double domain_radius)
      : params_(params), gamma_(params.gamma()), sigma_(params.sigma()) {
    const Eigen::Index m = params_.dimension;
    const Eigen::Index d = params_.rows;
    const auto n = static_cast<Eigen::Index>(params_.nodes);
    if (m < static_cast<Eigen::Index>(params_.support) + 1 || d < 1 || n < 1 || rounds == 0) {
      throw std::invalid_argument("SparseRecoveryProblem: bad sizes");
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<Eigen::Index> idx(static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < m; ++k) idx[static_cast<std::size_t>(k)] = k;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<Eigen::Index> supp(idx.begin(), idx.begin() + static_cast<long>(params_.support));
    std::sort(supp.begin(), supp.end());

    Vector w = Vector::Zero(m);
    for (Eigen::Index k : supp) w(k) = 1.0;

    signal_.reserve(rounds);
    supports_.reserve(rounds);
    c_.reserve(rounds);
    z_.reserve(rounds);
    for (Round t = 0; t < rounds; ++t) {
      signal_.push_back(w);
      supports_.push_back(supp);

      Matrix c(n * d, m);
      for (Eigen::Index r = 0; r < c.rows(); ++r)
        for (Eigen::Index k = 0; k < m; ++k) c(r, k) = gauss(rng);
      Vector z = c * w;
      if (params_.noise_sd > 0.0) {
        for (Eigen::Index r = 0; r < z.size(); ++r) z(r) += params_.noise_sd * gauss(rng);
      }
      hessian_.push_back(c.transpose() * c);
      linear_.push_back(c.transpose() * z);
      constant_.push_back(z.squaredNorm());
      c_.push_back(std::move(c));
      z_.push_back(std::move(z));

      // transition t -> t + 1
      const double td = static_cast<double>(t);
      if (t >= 1 && unit(rng) < std::min(1.0, 1.0 / td)) {
        std::uniform_int_distribution<std::size_t> pick_out(0, supp.size() - 1);
        const std::size_t slot = pick_out(rng);
        std::vector<Eigen::Index> outside;
        for (Eigen::Index k = 0; k < m; ++k) {
          if (std::find(supp.begin(), supp.end(), k) == supp.end()) outside.push_back(k);
        }
        std::uniform_int_distribution<std::size_t> pick_in(0, outside.size() - 1);
        const Eigen::Index in = outside[pick_in(rng)];
        w(in) = w(supp[slot]);
        w(supp[slot]) = 0.0;
        supp[slot] = in;
        std::sort(supp.begin(), supp.end());
      }
      const double sd = 1.0 / std::max(td, 1.0);
      for (Eigen::Index k : supp) w(k) += sd * gauss(rng);
      w /= w.norm();
    }

    double g = 0.0;
    const double nn = static_cast<double>(params_.nodes);
    const double l1 = sigma_ * std::sqrt(static_cast<double>(m));
    for (Round t = 0; t < rounds; ++t) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double cn = c_[t].middleRows(i * d, d).norm();
        const double zn = z_[t].segment(i * d, d).norm();
        g = std::max(g, (2.0 * cn * (cn * domain_radius + zn) + 2.0 * gamma_ * domain_radius + l1) / nn);
      }
    }
    lipschitz_ = g;
  }

  std::string name() const override { return "sparse"; }
  std::size_t nodes() const override { return params_.nodes; }
  Eigen::Index dimension() const override { return params_.dimension; }
  Round rounds() const noexcept { return c_.size(); }

  double value(std::size_t i, Round t, const Vector& x) const override {
    const Round r = checked(t);
    const Eigen::Index d = params_.rows;
    const auto row = static_cast<Eigen::Index>(i) * d;
    const double res = (z_[r].segment(row, d) - c_[r].middleRows(row, d) * x).squaredNorm();
    return (res + gamma_ * x.squaredNorm() + sigma_ * x.lpNorm<1>()) /
           static_cast<double>(params_.nodes);
  }

  Vector subgradient(std::size_t i, Round t, const Vector& x) const override {
    const Round r = checked(t);
    const Eigen::Index d = params_.rows;
    const auto row = static_cast<Eigen::Index>(i) * d;
    const auto ci = c_[r].middleRows(row, d);
    Vector g = 2.0 * ci.transpose() * (ci * x - z_[r].segment(row, d)) + 2.0 * gamma_ * x +
               sigma_ * sign(x);
    return g / static_cast<double>(params_.nodes);
  }

  double global_value(Round t, const Vector& x) const override {
    const Round r = checked(t);
    const double quad = x.dot(hessian_[r] * x) - 2.0 * linear_[r].dot(x) + constant_[r];
    return quad / static_cast<double>(params_.nodes) + gamma_ * x.squaredNorm() +
           sigma_ * x.lpNorm<1>();
  }

  Vector global_smooth_gradient(Round t, const Vector& x) const override {
    const Round r = checked(t);
    return (2.0 / static_cast<double>(params_.nodes)) * (hessian_[r] * x - linear_[r]) +
           2.0 * gamma_ * x;
  }

  Vector global_subgradient(Round t, const Vector& x) const override {
    return global_smooth_gradient(t, x) + sigma_ * sign(x);
  }

  double global_l1_weight(Round /*t*/) const override { return sigma_; }

  std::optional<Matrix> global_hessian(Round t) const override {
    const Round r = checked(t);
    Matrix h = (2.0 / static_cast<double>(params_.nodes)) * hessian_[r];
    h.diagonal().array() += 2.0 * gamma_;
    return h;
  }

  /// sign with sign(0) = 0.
  static Vector sign(const Vector& x) {
    return x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
  }

  const Vector& signal(Round t) const { return signal_[checked(t)]; }
  const std::vector<Eigen::Index>& support(Round t) const { return supports_[checked(t)]; }
  const Matrix& observation(Round t) const { return c_[checked(t)]; }
  double gamma_reg() const noexcept { return gamma_; }
  double sigma_reg() const noexcept { return sigma_; }
  const SparseParams& params() const noexcept { return params_; }

 private:
  Round checked(Round t) const {
    if (t >= c_.size()) {
      throw std::out_of_range("SparseRecoveryProblem: round " + std::to_string(t) +
                              " was not generated");
    }
    return t;
  }

  SparseParams params_;
  double gamma_, sigma_;
  std::vector<Vector> signal_;
  std::vector<std::vector<Eigen::Index>> supports_;
  std::vector<Matrix> c_;
  std::vector<Vector> z_;
  std::vector<Matrix> hessian_;
  std::vector<Vector> linear_;
  std::vector<double> constant_;
};

}  // namespace pushsum
