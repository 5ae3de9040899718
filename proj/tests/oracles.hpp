#pragma once

// Reference implementations used only by tests. They are written against the
// mathematical definitions with plain loops and share no code with the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

inline Mat zeros(std::size_t n) { return Mat(n, Vec(n, 0.0)); }

/// a[i][j] = 1 / (1 + outdeg(j)) on every edge j -> i, diagonal takes the rest.
inline Mat column_stochastic(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::size_t> out(n, 1);
  for (auto [from, to] : edges) ++out[from];
  Mat a = zeros(n);
  for (auto [from, to] : edges) a[to][from] = 1.0 / static_cast<double>(out[from]);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (i != j) s += a[i][j];
    a[j][j] = 1.0 - s;
  }
  return a;
}

inline Vec mat_vec(const Mat& a, const Vec& v) {
  Vec out(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += a[i][j] * v[j];
  return out;
}

/// Left eigenvector for eigenvalue 1 of a row-stochastic matrix, by repeated
/// v <- v B from the uniform vector.
inline Vec left_perron(const Mat& b, int iterations = 20000) {
  const std::size_t n = b.size();
  Vec v(n, 1.0 / static_cast<double>(n));
  for (int k = 0; k < iterations; ++k) {
    Vec w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) w[j] += v[i] * b[i][j];
    double s = 0.0;
    for (double x : w) s += x;
    for (double& x : w) x /= s;
    v = std::move(w);
  }
  return v;
}

/// Tarjan-free strong connectivity: every node reaches and is reached by node 0.
inline bool strongly_connected(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  auto reach = [&](bool reverse) {
    std::vector<bool> seen(n, false);
    seen[0] = true;
    bool grew = true;
    while (grew) {
      grew = false;
      for (auto [a, b] : edges) {
        const std::size_t u = reverse ? b : a, v = reverse ? a : b;
        if (seen[u] && !seen[v]) seen[v] = grew = true;
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
  };
  return reach(false) && reach(true);
}

inline Vec central_difference(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    Vec p = x, m = x;
    p[k] += h;
    m[k] -= h;
    g[k] = (f(p) - f(m)) / (2.0 * h);
  }
  return g;
}

/// Uniform point in the unit ball of R^m by rejection from the cube.
inline Vec ball_point(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Vec v(m);
    double s = 0.0;
    for (double& x : v) {
      x = u(rng);
      s += x * x;
    }
    if (s <= 1.0) return v;
  }
}

/// Monte-Carlo estimate of E_v f(x + mu v), v uniform in the unit ball.
inline double smoothed_value(const std::function<double(const Vec&)>& f, const Vec& x, double mu,
                             std::mt19937_64& rng, std::size_t draws) {
  double acc = 0.0;
  for (std::size_t s = 0; s < draws; ++s) {
    Vec v = ball_point(rng, x.size());
    for (std::size_t k = 0; k < x.size(); ++k) v[k] = x[k] + mu * v[k];
    acc += f(v);
  }
  return acc / static_cast<double>(draws);
}

/// Clamp onto the box shrunk by factor (1 - xi) about its midpoint.
inline Vec clamp_shrunk_box(const Vec& x, const Vec& lo, const Vec& hi, double xi) {
  Vec out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double c = 0.5 * (lo[k] + hi[k]);
    const double l = c + (1.0 - xi) * (lo[k] - c);
    const double h = c + (1.0 - xi) * (hi[k] - c);
    out[k] = std::min(std::max(x[k], l), h);
  }
  return out;
}

/// Single-agent projected descent x <- P(x - c/sqrt(t+1) g(t, x)) for `steps` steps.
inline std::vector<Vec> projected_descent(Vec x, std::size_t steps, double scale,
                                          const std::function<Vec(std::size_t, const Vec&)>& direction,
                                          const std::function<Vec(const Vec&)>& project) {
  std::vector<Vec> path{x};
  for (std::size_t t = 0; t < steps; ++t) {
    const Vec g = direction(t, x);
    const double a = scale / std::sqrt(static_cast<double>(t) + 1.0);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] -= a * g[k];
    x = project(x);
    path.push_back(x);
  }
  return path;
}

/// Global quartic cost as printed: x1^4/4 + x1^2 + x2^2 + 12 x1 - 2 h x2.
inline double quartic_global(double x1, double x2, double t) {
  const double h = std::atan(t / 10.0);
  return 0.25 * std::pow(x1, 4) + x1 * x1 + x2 * x2 + 12.0 * x1 - 2.0 * h * x2;
}

/// Least-squares slope of y on x.
inline double slope(const Vec& x, const Vec& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  return sxy / sxx;
}

}  // namespace oracle
