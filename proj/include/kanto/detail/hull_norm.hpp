#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace kanto::detail {

struct HullPoint {
  std::vector<double> lambda;  // convex weights over the atoms
  std::vector<double> x;       // sum_k lambda_k v_k
  double gap = 0.0;            // final pairwise duality gap (in the p-th power objective)
  std::size_t iterations = 0;
};

inline std::vector<double> combine(const std::vector<std::vector<double>>& atoms, const std::vector<double>& lambda) {
  std::vector<double> x(atoms.front().size(), 0.0);
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (lambda[k] == 0.0) continue;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += lambda[k] * atoms[k][i];
  }
  return x;
}

/// Minimizes sum_i x_i^p over x in the convex hull of nonnegative atoms,
/// 1 < p < inf, by pairwise Frank-Wolfe with exact (bisection) line search.
inline HullPoint hull_min_norm(const std::vector<std::vector<double>>& atoms, double p, std::vector<double> lambda,
                               double rel_tol = 1e-15, std::size_t max_iter = 50000) {
  const std::size_t K = atoms.size();
  const std::size_t d = atoms.front().size();
  if (lambda.size() != K) {
    lambda.assign(K, 0.0);
    lambda.back() = 1.0;
  }
  std::vector<double> x = combine(atoms, lambda);
  std::vector<double> grad(d), dir(d);
  auto deriv = [&](double gamma) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double v = std::max(x[i] + gamma * dir[i], 0.0);
      if (dir[i] != 0.0 && v > 0.0) s += std::pow(v, p - 1.0) * dir[i];
    }
    return s;
  };
  HullPoint out;
  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    double scale = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      grad[i] = x[i] > 0.0 ? std::pow(x[i], p - 1.0) : 0.0;
      scale += grad[i] * x[i];
    }
    std::size_t s = 0, a = K;
    double gs = std::numeric_limits<double>::infinity(), ga = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
      double g = 0.0;
      for (std::size_t i = 0; i < d; ++i) g += grad[i] * atoms[k][i];
      if (g < gs) {
        gs = g;
        s = k;
      }
      if (lambda[k] > 0.0 && g > ga) {
        ga = g;
        a = k;
      }
    }
    out.gap = ga - gs;
    if (a == K || s == a || ga - gs <= rel_tol * std::max(scale, 1e-300)) break;
    for (std::size_t i = 0; i < d; ++i) dir[i] = atoms[s][i] - atoms[a][i];
    const double hi = lambda[a];
    double gamma;
    if (deriv(hi) <= 0.0) {
      gamma = hi;
    } else {
      double lo_g = 0.0, hi_g = hi;
      for (int b = 0; b < 80; ++b) {
        const double mid = 0.5 * (lo_g + hi_g);
        if (deriv(mid) > 0.0) {
          hi_g = mid;
        } else {
          lo_g = mid;
        }
      }
      gamma = 0.5 * (lo_g + hi_g);
    }
    if (gamma <= 0.0) break;
    lambda[a] -= gamma;
    lambda[s] += gamma;
    if (gamma == hi) lambda[a] = 0.0;
    for (std::size_t i = 0; i < d; ++i) x[i] = std::max(x[i] + gamma * dir[i], 0.0);
    if (it % 64 == 63) x = combine(atoms, lambda);
  }
  out.iterations = it;
  out.x = combine(atoms, lambda);
  out.lambda = std::move(lambda);
  return out;
}

}  // namespace kanto::detail
