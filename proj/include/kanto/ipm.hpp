#pragma once

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "kanto/detail/dense_lp.hpp"
#include "kanto/detail/hull_norm.hpp"
#include "kanto/transport.hpp"

namespace kanto {

/// Which inner solver evaluated alpha -> OT(d_alpha).
enum class IpmRoute { DenseLp, Flow };

inline const char* route_name(IpmRoute r) { return r == IpmRoute::DenseLp ? "lipschitz-lp" : "flow-dual"; }

struct FixedAlphaResult {
  double value = 0.0;            // (nu - mu)(f)
  LocalFunction f;               // satisfies |f(x) - f(y)| <= alpha_i across single-site-i changes
  std::vector<double> marginals; // supergradient of alpha -> OT(d_alpha)
};

struct IpmOptions {
  double tol = 1e-9;
  std::size_t max_iter = 500;
  std::size_t lp_max_rows = 1024;  // larger instances use the flow-dual route
};

namespace detail {

struct NeighbourArcs {
  std::vector<std::uint32_t> tail, head, site;
};

inline NeighbourArcs neighbour_arcs(const ConfigSpace& sp) {
  NeighbourArcs a;
  for (std::size_t x = 0; x < sp.size(); ++x)
    for (std::size_t s = 0; s < sp.sites(); ++s) {
      const int cur = sp.symbol(x, s);
      for (int b = 0; b < sp.alphabet(); ++b) {
        if (b == cur) continue;
        a.tail.push_back(static_cast<std::uint32_t>(x));
        a.head.push_back(static_cast<std::uint32_t>(sp.with_symbol(x, s, b)));
        a.site.push_back(static_cast<std::uint32_t>(s));
      }
    }
  return a;
}

inline std::size_t lipschitz_rows(const ConfigSpace& sp) {
  return sp.size() * sp.sites() * static_cast<std::size_t>(sp.alphabet() - 1);
}

}  // namespace detail

/// max (nu - mu)(f) over f with f(x) - f(y) <= alpha_i whenever x, y differ
/// exactly at site i. Restricting to single-site pairs is equivalent to all
/// ordered pairs because d_alpha is the path metric of the Hamming graph.
inline FixedAlphaResult d_p_fixed_alpha(const Measure& mu, const Measure& nu, const std::vector<double>& alpha) {
  require_same_space(mu, nu);
  const auto& sp = mu.space();
  if (alpha.size() != sp.sites()) throw std::domain_error("one weight per site required");
  for (double a : alpha)
    if (!(a >= 0.0) || !std::isfinite(a)) throw std::domain_error("site weights must be finite and nonnegative");
  const std::size_t N = sp.size();
  FixedAlphaResult out;
  if (mu.same_table(nu)) {
    out.f = LocalFunction::constant(sp, 0.0);
    out.marginals.assign(sp.sites(), 0.0);
    return out;
  }
  const auto arcs = detail::neighbour_arcs(sp);
  const std::size_t R = arcs.tail.size();
  detail::DenseLp lp(R, 2 * N);
  for (std::size_t r = 0; r < R; ++r) {
    const std::size_t x = arcs.tail[r], y = arcs.head[r];
    lp.a(r, x) = 1.0;
    lp.a(r, y) = -1.0;
    lp.a(r, N + x) = -1.0;
    lp.a(r, N + y) = 1.0;
    lp.b(r) = alpha[arcs.site[r]];
  }
  for (std::size_t x = 0; x < N; ++x) {
    lp.c(x) = nu[x] - mu[x];
    lp.c(N + x) = mu[x] - nu[x];
  }
  const auto res = lp.solve();
  std::vector<double> f(N);
  for (std::size_t x = 0; x < N; ++x) f[x] = res.x[x] - res.x[N + x];
  out.f = LocalFunction(sp, std::move(f));
  out.value = 0.0;
  for (std::size_t x = 0; x < N; ++x) out.value += (nu[x] - mu[x]) * out.f[x];
  out.marginals.assign(sp.sites(), 0.0);
  for (std::size_t r = 0; r < R; ++r) out.marginals[arcs.site[r]] += res.dual[r];
  return out;
}

struct IpmCertificate {
  Exponent p;
  double value = 0.0;        // (nu - mu)(witness), witness normalized to ||delta f||_q <= 1
  double value_upper = 0.0;  // cutting-plane model bound, >= D_p
  double gap = 0.0;
  bool converged = true;
  std::size_t iterations = 0;
  IpmRoute route = IpmRoute::DenseLp;
  std::vector<double> alpha;
  LocalFunction witness;
  double witness_norm = 0.0;  // ||delta witness||_q

  nlohmann::json to_json() const {
    return {{"p", p.to_string()},   {"value", value},         {"value_upper", value_upper},
            {"gap", gap},           {"converged", converged}, {"iterations", iterations},
            {"route", route_name(route)}, {"alpha", alpha},   {"witness_norm", witness_norm}};
  }
};

namespace detail {

/// Normalizes the witness to ||delta f||_q <= 1 and fills value and norm.
inline void attach_witness(IpmCertificate& c, const Measure& mu, const Measure& nu, const LocalFunction& f) {
  const Exponent q = c.p.conjugate();
  const double nrm = osc_norm(f, q);
  c.witness = f.scaled(1.0 / std::max(nrm, 1.0));
  c.witness_norm = osc_norm(c.witness, q);
  double v = 0.0;
  for (std::size_t x = 0; x < mu.size(); ++x) v += (nu[x] - mu[x]) * c.witness[x];
  c.value = std::max(v, 0.0);
}

}  // namespace detail

/// D_p(nu, mu) = sup { (nu - mu)(f) : ||delta f||_q <= 1 }.
inline IpmCertificate d_p(const Measure& mu, const Measure& nu, const Exponent& p, const IpmOptions& opt = {}) {
  p.require_at_least_one();
  require_same_space(mu, nu);
  const auto& sp = mu.space();
  const std::size_t n = sp.sites();
  IpmCertificate cert;
  cert.p = p;
  if (mu.same_table(nu)) {
    cert.witness = LocalFunction::constant(sp, 0.0);
    cert.alpha = align(std::vector<double>(n, 0.0), p);
    return cert;
  }
  const bool use_lp = detail::lipschitz_rows(sp) <= opt.lp_max_rows;
  cert.route = use_lp ? IpmRoute::DenseLp : IpmRoute::Flow;
  std::unique_ptr<HammingFlow> flow;
  if (!use_lp) flow = std::make_unique<HammingFlow>(mu, nu);

  auto evaluate = [&](const std::vector<double>& alpha) -> FixedAlphaResult {
    if (use_lp) return d_p_fixed_alpha(mu, nu, alpha);
    const auto s = flow->solve(alpha);
    FixedAlphaResult r;
    r.value = s.value;
    r.f = LocalFunction(sp, s.potential);
    r.marginals = s.site_flow;
    return r;
  };

  if (p.is_infinite() && use_lp) {
    // one LP: delta_i f <= alpha_i, sum alpha <= 1
    const std::size_t N = sp.size();
    const auto arcs = detail::neighbour_arcs(sp);
    const std::size_t R = arcs.tail.size();
    detail::DenseLp lp(R + 1, 2 * N + n);
    for (std::size_t r = 0; r < R; ++r) {
      const std::size_t x = arcs.tail[r], y = arcs.head[r];
      lp.a(r, x) = 1.0;
      lp.a(r, y) = -1.0;
      lp.a(r, N + x) = -1.0;
      lp.a(r, N + y) = 1.0;
      lp.a(r, 2 * N + arcs.site[r]) = -1.0;
    }
    for (std::size_t i = 0; i < n; ++i) lp.a(R, 2 * N + i) = 1.0;
    lp.b(R) = 1.0;
    for (std::size_t x = 0; x < N; ++x) {
      lp.c(x) = nu[x] - mu[x];
      lp.c(N + x) = mu[x] - nu[x];
    }
    const auto res = lp.solve();
    std::vector<double> f(N);
    for (std::size_t x = 0; x < N; ++x) f[x] = res.x[x] - res.x[N + x];
    cert.alpha.assign(res.x.begin() + static_cast<std::ptrdiff_t>(2 * N), res.x.end());
    detail::attach_witness(cert, mu, nu, LocalFunction(sp, std::move(f)));
    cert.value_upper = std::max(res.dual[R], cert.value);
    cert.gap = cert.value_upper - cert.value;
    cert.iterations = 1;
    cert.converged = cert.gap <= std::max(opt.tol, 1e-9);
    return cert;
  }

  if (p.is_one()) {
    cert.alpha.assign(n, 1.0);
    const auto r = evaluate(cert.alpha);
    detail::attach_witness(cert, mu, nu, r.f);
    // p = 1: the LP value is D_1 itself; its supergradient bounds it from above
    double up = 0.0;
    for (double v : r.marginals) up += v;
    cert.value_upper = std::max(up, cert.value);
    cert.gap = cert.value_upper - cert.value;
    cert.iterations = 1;
    cert.converged = cert.gap <= std::max(opt.tol, 1e-9);
    return cert;
  }

  // Kelley cutting planes on the concave map alpha -> OT(d_alpha) over the
  // l^q unit ball. The model max equals the l^p min-norm point of the cut
  // hull, so each step reuses the hull solver; for q = 1 that is an LP.
  std::vector<std::vector<double>> cuts;
  std::vector<double> lambda;
  std::vector<double> alpha = align(std::vector<double>(n, 1.0), p);
  double best = -1.0;
  LocalFunction best_f;
  std::vector<double> best_alpha;
  cert.converged = false;
  double model = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    cert.iterations = it + 1;
    const auto r = evaluate(alpha);
    if (r.value > best) {
      best = r.value;
      best_f = r.f;
      best_alpha = alpha;
    }
    cuts.push_back(r.marginals);
    lambda.push_back(0.0);
    if (p.is_infinite()) {
      detail::DenseLp lp(n, cuts.size());
      for (std::size_t i = 0; i < n; ++i) {
        lp.b(i) = 1.0;
        for (std::size_t k = 0; k < cuts.size(); ++k) lp.a(i, k) = cuts[k][i];
      }
      for (std::size_t k = 0; k < cuts.size(); ++k) lp.c(k) = 1.0;
      const auto res = lp.solve();
      double s = 0.0, ys = 0.0;
      for (double w : res.x) s += w;
      for (double y : res.dual) ys += y;
      model = std::min(model, 1.0 / s);
      for (std::size_t i = 0; i < n; ++i) alpha[i] = ys > 0.0 ? res.dual[i] / ys : 1.0 / static_cast<double>(n);
    } else {
      if (lambda.size() == 1) lambda[0] = 1.0;
      const auto hp = detail::hull_min_norm(cuts, p.value(), lambda);
      lambda = hp.lambda;
      model = std::min(model, lp_norm(hp.x, p));
      alpha = align(hp.x, p);
    }
    if (model - best <= opt.tol) {
      cert.converged = true;
      break;
    }
  }
  cert.alpha = best_alpha;
  detail::attach_witness(cert, mu, nu, best_f);
  cert.value_upper = std::max(model, cert.value);
  cert.gap = cert.value_upper - cert.value;
  return cert;
}

struct DualityReport {
  TransportCertificate primal;
  IpmCertificate dual;
  double gap = 0.0;  // |Q_p upper - D_p lower|
};

inline DualityReport duality_gap(const Measure& mu, const Measure& nu, const Exponent& p, const QpOptions& qo = {},
                                 const IpmOptions& io = {}) {
  DualityReport r;
  r.primal = q_p(mu, nu, p, qo);
  r.dual = d_p(mu, nu, p, io);
  r.gap = std::abs(r.primal.value_upper - r.dual.value);
  return r;
}

/// D_p <= |Lambda|^{1/p}
inline bool dep_bound_check(const Measure& mu, const Measure& nu, const Exponent& p) {
  const auto c = d_p(mu, nu, p);
  return c.value <= volume_power(mu.space().sites(), p) + 1e-9;
}

}  // namespace kanto
