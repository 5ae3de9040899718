#pragma once

// Six-node quartic benchmark on the box [-3, 2] x [0, 3]:
//   f_{i,t}(x) = i/84 x1^4 + (i-1)/15 (x1^2 + x2^2) + (2i+1)/4 x1 - 2(i-3)/3 h(t) x2
// with h(t) = arctan(t / 10) and i = 1..6. The sum is
//   F_t(x) = x1^4/4 + x1^2 + x2^2 + 12 x1 - 2 h(t) x2,
// minimised at (-2, h(t)).

#include <cmath>
#include <memory>

#include "pushsum/geometry.hpp"
#include "pushsum/objective.hpp"

namespace pushsum {

class QuarticProblem final : public OnlineCost {
 public:
  static constexpr std::size_t kNodes = 6;

  QuarticProblem() {
    Rng rng = make_stream(0, 0, "quartic-lipschitz");
    lipschitz_ = estimate_lipschitz(*this, domain(), 100000, rng);
  }

  static ConvexSet domain() {
    return ConvexSet::box(Vector{{-3.0, 0.0}}, Vector{{2.0, 3.0}});
  }

  static double drift(Round t) { return std::atan(static_cast<double>(t) / 10.0); }

  std::string name() const override { return "quartic"; }
  std::size_t nodes() const override { return kNodes; }
  Eigen::Index dimension() const override { return 2; }

  double value(std::size_t i, Round t, const Vector& x) const override {
    const Coeffs c = coeffs(i);
    const double x1 = x(0), x2 = x(1);
    return c.quartic * x1 * x1 * x1 * x1 + c.quad * (x1 * x1 + x2 * x2) + c.lin * x1 -
           c.drift * drift(t) * x2;
  }

  Vector subgradient(std::size_t i, Round t, const Vector& x) const override {
    const Coeffs c = coeffs(i);
    const double x1 = x(0), x2 = x(1);
    return Vector{{4.0 * c.quartic * x1 * x1 * x1 + 2.0 * c.quad * x1 + c.lin,
                   2.0 * c.quad * x2 - c.drift * drift(t)}};
  }

  std::optional<Vector> analytic_minimizer(Round t) const override {
    return Vector{{-2.0, drift(t)}};
  }

 private:
  struct Coeffs {
    double quartic, quad, lin, drift;
  };

  static Coeffs coeffs(std::size_t i) {
    const double k = static_cast<double>(i + 1);
    return {k / 84.0, (k - 1.0) / 15.0, (2.0 * k + 1.0) / 4.0, 2.0 * (k - 3.0) / 3.0};
  }
};

inline std::unique_ptr<QuarticProblem> quartic_suite() { return std::make_unique<QuarticProblem>(); }

}  // namespace pushsum
