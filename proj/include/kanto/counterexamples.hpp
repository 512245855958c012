#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "kanto/exponent.hpp"
#include "kanto/lattice.hpp"

namespace kanto {

struct LipCostGap {
  int n = 0;
  std::size_t volume = 0;
  double osc_norm = 0.0;     // ||delta f_n||_p
  double extreme_gap = 0.0;  // f_n(all k-1) - f_n(all 0) = |Lambda_n|^{1/q}
  bool enumerated = false;   // values above were re-derived from the full table
};

/// f_n = ((k-1) |Lambda_n|^{1/p})^{-1} sum_i sigma_i on Lambda_n in d = 1.
/// ||delta f_n||_p = 1 while the extreme pair is |Lambda_n|^{1/q} apart, so no
/// cost function can dominate every such f by a fixed amount.
inline LipCostGap lip_cost_gap(int n, const Exponent& p, int k = 2, std::size_t enumerate_up_to = 1u << 12) {
  if (p.is_one()) throw std::domain_error("lip_cost_gap needs p > 1");
  p.require_at_least_one();
  if (k < 2) throw std::domain_error("alphabet needs at least two symbols");
  if (n < 0) throw std::domain_error("n must be nonnegative");
  const std::size_t V = static_cast<std::size_t>(2 * n + 1);
  const double scale = 1.0 / (static_cast<double>(k - 1) * volume_power(V, p));
  LipCostGap out;
  out.n = n;
  out.volume = V;
  // per-site oscillation is (k-1) * scale = |Lambda|^{-1/p}
  std::vector<double> osc(V, static_cast<double>(k - 1) * scale);
  out.osc_norm = lp_norm(osc, p);
  out.extreme_gap = static_cast<double>(V) * static_cast<double>(k - 1) * scale;
  const double states = std::pow(static_cast<double>(k), static_cast<double>(V));
  if (states <= static_cast<double>(enumerate_up_to)) {
    const ConfigSpace sp(Volume::cube(1, n), k);
    const auto f = LocalFunction::from(sp, [&](std::span<const int> c) {
      double s = 0.0;
      for (int a : c) s += a;
      return s * scale;
    });
    std::vector<int> lo(V, 0), hi(V, k - 1);
    out.osc_norm = osc_norm(f, p);
    out.extreme_gap = f[sp.rank(hi)] - f[sp.rank(lo)];
    out.enumerated = true;
  }
  return out;
}

namespace detail {

/// odd magnetizations of 2L+1 fair spins: -(2L+1), ..., 2L+1
inline int dattes_sites(long long L) {
  if (L < 1) throw std::domain_error("L must be at least 1");
  if (L > 100000000LL) throw std::domain_error("L too large");
  return static_cast<int>(2 * L + 1);
}

}  // namespace detail

/// Lip_2(g_L) for g_L = sqrt(|m_L|), by the magnetization reduction: two
/// configurations with magnetizations m, m' are at Hamming distance at least
/// |m - m'|/2, and that distance is attained.
inline double dattes_lip2(long long L) {
  const int N = detail::dattes_sites(L);
  // sign changes only lengthen the path, so the maximum is over nonnegative odd pairs
  std::vector<double> root;
  for (int m = 1; m <= N; m += 2) root.push_back(std::sqrt(static_cast<double>(m)));
  std::vector<double> inv_dist(root.size());  // 1 / sqrt((m - m') / 2)
  for (std::size_t h = 1; h < root.size(); ++h) inv_dist[h] = 1.0 / std::sqrt(static_cast<double>(h));
  double best = 0.0;
  for (std::size_t a = 0; a < root.size(); ++a)
    for (std::size_t b = 0; b < a; ++b) best = std::max(best, (root[a] - root[b]) * inv_dist[a - b]);
  return best;
}

/// Same quantity by scanning every pair of configurations; L <= 4 only.
inline double dattes_lip2_exhaustive(long long L) {
  const int N = detail::dattes_sites(L);
  if (N > 9) throw std::domain_error("exhaustive scan limited to L <= 4");
  const std::uint32_t S = 1u << N;
  std::vector<double> g(S);
  for (std::uint32_t x = 0; x < S; ++x) {
    const int up = std::popcount(x);
    g[x] = std::sqrt(std::abs(2.0 * up - N));
  }
  double best = 0.0;
  for (std::uint32_t x = 0; x < S; ++x)
    for (std::uint32_t y = x + 1; y < S; ++y) {
      const double d = std::sqrt(static_cast<double>(std::popcount(x ^ y)));
      best = std::max(best, std::abs(g[x] - g[y]) / d);
    }
  return best;
}

inline constexpr long long kDattesCap = 100000;

struct DattesMoment {
  long long L = 0;
  double mean = 0.0;        // mu(g_L)
  double log_moment = 0.0;  // log mu(exp(g_L - mu(g_L)))
  double ratio_to_L_quarter = 0.0;
};

/// Exact log-moment over the 2L+2 magnetization atoms of a fair binomial.
/// Extended precision: log-gamma round-off in double reaches 1e-10 near L = 1e4.
inline DattesMoment dattes_mgf(long long L, long long cap = kDattesCap) {
  if (L > cap) throw std::domain_error("L above the binomial cap");
  using R = long double;
  const int N = detail::dattes_sites(L);
  const auto M = static_cast<std::size_t>(N) + 1;
  std::vector<R> logp(M), g(M);
  const R lgN = std::lgamma(static_cast<R>(N) + 1), ln2N = N * std::log(static_cast<R>(2));
  for (int u = 0; u <= N; ++u) {
    const auto k = static_cast<std::size_t>(u);
    logp[k] = lgN - std::lgamma(static_cast<R>(u) + 1) - std::lgamma(static_cast<R>(N - u) + 1) - ln2N;
    g[k] = std::sqrt(std::abs(2 * static_cast<R>(u) - N));
  }
  R mean = 0;
  for (std::size_t k = 0; k < M; ++k) mean += std::exp(logp[k]) * g[k];
  R top = -std::numeric_limits<R>::infinity();
  std::vector<R> e(M);
  for (std::size_t k = 0; k < M; ++k) top = std::max(top, e[k] = logp[k] + g[k] - mean);
  R acc = 0;
  for (R v : e) acc += std::exp(v - top);
  DattesMoment out;
  out.L = L;
  out.mean = static_cast<double>(mean);
  out.log_moment = std::max(0.0, static_cast<double>(top + std::log(acc)));
  out.ratio_to_L_quarter = out.log_moment / std::pow(static_cast<double>(L), 0.25);
  return out;
}

/// max_i delta_i g_L; flipping one spin moves m by 2
inline double dattes_site_oscillation(long long L) {
  const int N = detail::dattes_sites(L);
  double best = 0.0;
  for (int m = -N; m + 2 <= N; m += 2)
    best = std::max(best, std::abs(std::sqrt(std::abs(static_cast<double>(m))) - std::sqrt(std::abs(m + 2.0))));
  return best;
}

struct McDiarmidRecord {
  long long L = 0;
  double lip2 = 0.0;
  double log_moment = 0.0;
  double ratio_to_L_quarter = 0.0;
  double osc_sq = 0.0;          // ||delta g_L||_2^2
  double mcdiarmid_rhs = 0.0;   // (C/2) ||delta g_L||_2^2 with C = 1/4
  double implied_K = 0.0;       // smallest K with log_moment <= (K/2) Lip_2^2
  bool mcdiarmid_holds = true;

  nlohmann::json to_json() const {
    return {{"L", L}, {"lip2", lip2}, {"log_moment", log_moment}, {"ratio_to_L_quarter", ratio_to_L_quarter},
            {"osc_sq", osc_sq}, {"mcdiarmid_rhs", mcdiarmid_rhs}, {"implied_K", implied_K},
            {"mcdiarmid_holds", mcdiarmid_holds}};
  }
};

inline McDiarmidRecord mcdiarmid_contrast(long long L, double C = 0.25) {
  McDiarmidRecord r;
  r.L = L;
  r.lip2 = dattes_lip2(L);
  const auto m = dattes_mgf(L);
  r.log_moment = m.log_moment;
  r.ratio_to_L_quarter = m.ratio_to_L_quarter;
  const double osc = dattes_site_oscillation(L);
  r.osc_sq = static_cast<double>(detail::dattes_sites(L)) * osc * osc;
  r.mcdiarmid_rhs = 0.5 * C * r.osc_sq;
  r.implied_K = r.lip2 > 0.0 ? 2.0 * r.log_moment / (r.lip2 * r.lip2) : 0.0;
  r.mcdiarmid_holds = r.log_moment <= r.mcdiarmid_rhs + 1e-12;
  return r;
}

}  // namespace kanto
