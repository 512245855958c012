#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <vector>

#include "kanto/detail/dense_lp.hpp"
#include "kanto/detail/hull_norm.hpp"
#include "kanto/detail/network_simplex.hpp"
#include "kanto/exponent.hpp"
#include "kanto/measures.hpp"

namespace kanto {

using detail::SolverError;

/// Sparse joint law on S^Lambda x S^Lambda.
class Coupling {
 public:
  struct Entry {
    std::uint32_t x, y;
    double mass;
  };

  Coupling() = default;

  Coupling(ConfigSpace space, std::vector<Entry> entries) : space_(std::move(space)), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
    std::vector<Entry> merged;
    merged.reserve(entries_.size());
    for (const auto& e : entries_) {
      if (e.mass < 0.0 || !std::isfinite(e.mass)) throw std::domain_error("coupling mass must be finite and nonnegative");
      if (e.x >= space_.size() || e.y >= space_.size()) throw std::domain_error("coupling index out of range");
      if (e.mass == 0.0) continue;
      if (!merged.empty() && merged.back().x == e.x && merged.back().y == e.y) {
        merged.back().mass += e.mass;
      } else {
        merged.push_back(e);
      }
    }
    entries_ = std::move(merged);
  }

  static Coupling diagonal(const Measure& mu) {
    std::vector<Entry> e;
    for (std::size_t x = 0; x < mu.size(); ++x)
      if (mu[x] > 0.0) e.push_back({static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(x), mu[x]});
    return Coupling(mu.space(), std::move(e));
  }

  static Coupling independent(const Measure& mu, const Measure& nu) {
    require_same_space(mu, nu);
    std::vector<Entry> e;
    for (std::size_t x = 0; x < mu.size(); ++x)
      for (std::size_t y = 0; y < nu.size(); ++y)
        if (mu[x] * nu[y] > 0.0) e.push_back({static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y), mu[x] * nu[y]});
    return Coupling(mu.space(), std::move(e));
  }

  /// Convex combination of couplings on a common space.
  static Coupling mixture(const std::vector<Coupling>& parts, const std::vector<double>& weights) {
    if (parts.empty() || parts.size() != weights.size()) throw std::domain_error("mixture needs matching parts and weights");
    std::vector<Entry> e;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (weights[k] <= 0.0) continue;
      for (const auto& en : parts[k].entries_) e.push_back({en.x, en.y, weights[k] * en.mass});
    }
    return Coupling(parts.front().space_, std::move(e));
  }

  const ConfigSpace& space() const { return space_; }
  const std::vector<Entry>& entries() const { return entries_; }

  std::vector<double> first_marginal() const {
    std::vector<double> m(space_.size(), 0.0);
    for (const auto& e : entries_) m[e.x] += e.mass;
    return m;
  }

  std::vector<double> second_marginal() const {
    std::vector<double> m(space_.size(), 0.0);
    for (const auto& e : entries_) m[e.y] += e.mass;
    return m;
  }

  double total_mass() const {
    double s = 0.0;
    for (const auto& e : entries_) s += e.mass;
    return s;
  }

  /// max deviation of the two marginals from (mu, nu)
  double marginal_error(const Measure& mu, const Measure& nu) const {
    const auto a = first_marginal();
    const auto b = second_marginal();
    double err = 0.0;
    for (std::size_t x = 0; x < a.size(); ++x) err = std::max({err, std::abs(a[x] - mu[x]), std::abs(b[x] - nu[x])});
    return err;
  }

  /// m_i = Pi{sigma_i != sigma'_i}
  std::vector<double> disagreement() const {
    std::vector<double> m(space_.sites(), 0.0);
    for (const auto& e : entries_) {
      if (e.x == e.y) continue;
      for (std::size_t s = 0; s < m.size(); ++s)
        if (space_.symbol(e.x, s) != space_.symbol(e.y, s)) m[s] += e.mass;
    }
    for (double& v : m) v = std::clamp(v, 0.0, 1.0);
    return m;
  }

 private:
  ConfigSpace space_;
  std::vector<Entry> entries_;
};

/// Psi(Pi, Lambda) = || m(Pi) ||_p
inline double coupling_cost(const Coupling& plan, const Exponent& p) {
  const auto m = plan.disagreement();
  return lp_norm(m, p);
}

/// Dense cost table over S^Lambda x S^Lambda.
class CostMatrix {
 public:
  CostMatrix(ConfigSpace space, std::vector<double> c) : space_(std::move(space)), c_(std::move(c)) {
    if (c_.size() != space_.size() * space_.size()) throw std::domain_error("cost table size mismatch");
    for (double v : c_)
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::domain_error("costs must be finite and nonnegative");
  }

  /// d_alpha(x, y) = sum_i alpha_i 1{x_i != y_i}
  static CostMatrix weighted_hamming(const ConfigSpace& space, const std::vector<double>& alpha) {
    if (alpha.size() != space.sites()) throw std::domain_error("one weight per site required");
    const std::size_t N = space.size();
    std::vector<double> c(N * N, 0.0);
    for (std::size_t x = 0; x < N; ++x)
      for (std::size_t y = 0; y < N; ++y) {
        double s = 0.0;
        for (std::size_t i = 0; i < alpha.size(); ++i)
          if (space.symbol(x, i) != space.symbol(y, i)) s += alpha[i];
        c[x * N + y] = s;
      }
    return CostMatrix(space, std::move(c));
  }

  static CostMatrix hamming(const ConfigSpace& space) {
    return weighted_hamming(space, std::vector<double>(space.sites(), 1.0));
  }

  /// (d_H)^p
  static CostMatrix hamming_power(const ConfigSpace& space, double p) {
    const std::size_t N = space.size();
    std::vector<double> c(N * N);
    for (std::size_t x = 0; x < N; ++x)
      for (std::size_t y = 0; y < N; ++y) c[x * N + y] = std::pow(static_cast<double>(space.hamming(x, y)), p);
    return CostMatrix(space, std::move(c));
  }

  const ConfigSpace& space() const { return space_; }
  double operator()(std::size_t x, std::size_t y) const { return c_[x * space_.size() + y]; }

 private:
  ConfigSpace space_;
  std::vector<double> c_;
};

struct OtSolution {
  double value = 0.0;
  Coupling plan;
  std::vector<double> phi, psi;  // phi(x) + psi(y) <= c(x, y)
  double dual_value = 0.0;
  double slackness = 0.0;  // sum_plan (c - phi - psi)
};

inline void require_probability(const Measure& m) {
  double s = 0.0;
  for (double v : m.probs()) s += v;
  if (std::abs(s - 1.0) > 1e-10) throw std::domain_error("marginal does not have unit mass");
}

/// Exact discrete optimal transport on the supports by network simplex.
inline OtSolution solve_ot(const Measure& mu, const Measure& nu, const CostMatrix& cost) {
  require_same_space(mu, nu);
  require_probability(mu);
  require_probability(nu);
  if (!(cost.space() == mu.space())) throw std::domain_error("cost matrix lives on another space");
  const std::size_t N = mu.size();
  std::vector<std::uint32_t> L, R;
  for (std::size_t x = 0; x < N; ++x) {
    if (mu.supported(x)) L.push_back(static_cast<std::uint32_t>(x));
    if (nu.supported(x)) R.push_back(static_cast<std::uint32_t>(x));
  }
  const std::size_t nl = L.size(), nr = R.size();
  std::vector<std::uint32_t> tail, head;
  std::vector<double> c;
  tail.reserve(nl * nr);
  for (std::size_t i = 0; i < nl; ++i)
    for (std::size_t j = 0; j < nr; ++j) {
      tail.push_back(static_cast<std::uint32_t>(i));
      head.push_back(static_cast<std::uint32_t>(nl + j));
      c.push_back(cost(L[i], R[j]));
    }
  std::vector<double> supply(nl + nr);
  double sl = 0.0, sr = 0.0;
  for (std::size_t i = 0; i < nl; ++i) sl += mu[L[i]];
  for (std::size_t j = 0; j < nr; ++j) sr += nu[R[j]];
  for (std::size_t i = 0; i < nl; ++i) supply[i] = mu[L[i]] / sl;
  for (std::size_t j = 0; j < nr; ++j) supply[nl + j] = -nu[R[j]] / sr;
  detail::NetworkSimplex ns(nl + nr, std::move(tail), std::move(head), std::move(c), std::move(supply));
  ns.solve();

  OtSolution out;
  const auto pot = ns.potentials();
  std::vector<Coupling::Entry> entries;
  for (std::size_t a = 0; a < ns.arcs(); ++a) {
    const double f = ns.flow(a);
    if (f > 0.0) entries.push_back({L[ns.tail(a)], R[ns.head(a) - nl], f});
  }
  out.plan = Coupling(mu.space(), std::move(entries));
  out.value = ns.value();
  // phi = -pi on the left, psi = pi on the right; c-transforms off the supports
  const double big = std::numeric_limits<double>::infinity();
  out.phi.assign(N, big);
  out.psi.assign(N, big);
  for (std::size_t i = 0; i < nl; ++i) out.phi[L[i]] = -pot[i];
  for (std::size_t j = 0; j < nr; ++j) out.psi[R[j]] = pot[nl + j];
  for (std::size_t y = 0; y < N; ++y) {
    if (out.psi[y] != big) continue;
    double v = big;
    for (std::size_t i = 0; i < nl; ++i) v = std::min(v, cost(L[i], y) - out.phi[L[i]]);
    out.psi[y] = v;
  }
  for (std::size_t x = 0; x < N; ++x) {
    if (out.phi[x] != big) continue;
    double v = big;
    for (std::size_t y = 0; y < N; ++y) v = std::min(v, cost(x, y) - out.psi[y]);
    out.phi[x] = v;
  }
  out.dual_value = 0.0;
  for (std::size_t x = 0; x < N; ++x) out.dual_value += mu[x] * out.phi[x] + nu[x] * out.psi[x];
  out.slackness = 0.0;
  for (const auto& e : out.plan.entries()) out.slackness += e.mass * std::abs(cost(e.x, e.y) - out.phi[e.x] - out.psi[e.y]);
  return out;
}

// ---- transport on the Hamming graph ----

/// OT for the path metric d_alpha as a min-cost flow on the Hamming graph
/// (one arc per single-site change, cost alpha_i). The basis is kept between
/// calls so a sequence of weight vectors is solved with warm starts.
class HammingFlow {
 public:
  struct Solution {
    double value = 0.0;             // OT(d_alpha)
    std::vector<double> potential;  // d_alpha-Lipschitz, (nu - mu)(potential) = value
    std::vector<double> site_flow;  // flow carried by site-i arcs
  };

  HammingFlow(const Measure& mu, const Measure& nu) : mu_(mu), nu_(nu) {
    require_same_space(mu, nu);
    require_probability(mu);
    require_probability(nu);
    const auto& sp = mu.space();
    const std::size_t N = sp.size();
    const std::size_t k = static_cast<std::size_t>(sp.alphabet());
    std::vector<std::uint32_t> tail, head;
    tail.reserve(N * sp.sites() * (k - 1));
    for (std::size_t x = 0; x < N; ++x)
      for (std::size_t s = 0; s < sp.sites(); ++s) {
        const int cur = sp.symbol(x, s);
        for (int a = 0; a < static_cast<int>(k); ++a) {
          if (a == cur) continue;
          tail.push_back(static_cast<std::uint32_t>(x));
          head.push_back(static_cast<std::uint32_t>(sp.with_symbol(x, s, a)));
          site_.push_back(static_cast<std::uint32_t>(s));
        }
      }
    std::vector<double> supply(N);
    for (std::size_t x = 0; x < N; ++x) supply[x] = mu[x] - nu[x];
    const std::size_t m = tail.size();
    ns_ = std::make_unique<detail::NetworkSimplex>(N, std::move(tail), std::move(head), std::vector<double>(m, 1.0),
                                                   std::move(supply));
  }

  Solution solve(const std::vector<double>& alpha) {
    if (alpha.size() != mu_.space().sites()) throw std::domain_error("one weight per site required");
    for (double a : alpha)
      if (!(a >= 0.0) || !std::isfinite(a)) throw std::domain_error("site weights must be finite and nonnegative");
    std::vector<double> c(site_.size());
    for (std::size_t a = 0; a < c.size(); ++a) c[a] = alpha[site_[a]];
    ns_->set_costs(std::move(c));
    ns_->solve();
    Solution out;
    out.potential = ns_->potentials();
    out.site_flow.assign(alpha.size(), 0.0);
    for (std::size_t a = 0; a < site_.size(); ++a) out.site_flow[site_[a]] += ns_->flow(a);
    // the dual objective; equal to the primal cost at optimality
    out.value = 0.0;
    for (std::size_t x = 0; x < mu_.size(); ++x) out.value += (nu_[x] - mu_[x]) * out.potential[x];
    const double primal = ns_->value();
    out.value = std::max(std::min(out.value, primal), 0.0);
    return out;
  }

  /// Coupling from the current optimal flow: the diagonal min(mu, nu) plus one
  /// entry per source-to-sink path in a flow decomposition.
  Coupling decompose() const {
    const auto& sp = mu_.space();
    const std::size_t N = sp.size();
    const double tiny = 1e-16;
    std::vector<Coupling::Entry> entries;
    std::vector<double> excess(N), deficit(N);
    for (std::size_t x = 0; x < N; ++x) {
      const double d = std::min(mu_[x], nu_[x]);
      if (d > 0.0) entries.push_back({static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(x), d});
      excess[x] = std::max(mu_[x] - nu_[x], 0.0);
      deficit[x] = std::max(nu_[x] - mu_[x], 0.0);
    }
    std::vector<double> fl(site_.size());
    std::vector<std::size_t> start(N + 1, 0);
    for (std::size_t a = 0; a < site_.size(); ++a) {
      fl[a] = ns_->flow(a);
      ++start[ns_->tail(a) + 1];
    }
    for (std::size_t v = 0; v < N; ++v) start[v + 1] += start[v];
    std::vector<std::size_t> out_arcs(site_.size()), fill = start;
    for (std::size_t a = 0; a < site_.size(); ++a) out_arcs[fill[ns_->tail(a)]++] = a;
    std::vector<std::size_t> ptr(start.begin(), start.end() - 1);
    std::vector<std::size_t> where(N, SIZE_MAX);
    std::vector<std::size_t> path_nodes, path_arcs;

    auto next_arc = [&](std::size_t v) -> std::size_t {
      while (ptr[v] < start[v + 1] && fl[out_arcs[ptr[v]]] <= tiny) ++ptr[v];
      return ptr[v] < start[v + 1] ? out_arcs[ptr[v]] : SIZE_MAX;
    };

    for (std::size_t src = 0; src < N; ++src) {
      std::size_t guard = 0;
      while (excess[src] > tiny && ++guard < 100 * site_.size() + 100) {
        path_nodes.assign(1, src);
        path_arcs.clear();
        where[src] = 0;
        bool stuck = false;
        while (true) {
          const std::size_t cur = path_nodes.back();
          if (cur != src && deficit[cur] > tiny) break;
          const std::size_t a = next_arc(cur);
          if (a == SIZE_MAX) {
            stuck = true;
            break;
          }
          const std::size_t nxt = ns_->head(a);
          if (where[nxt] != SIZE_MAX) {
            // cancel the cycle nxt -> ... -> cur -> nxt
            double cyc = fl[a];
            for (std::size_t t = where[nxt]; t < path_arcs.size(); ++t) cyc = std::min(cyc, fl[path_arcs[t]]);
            fl[a] -= cyc;
            for (std::size_t t = where[nxt]; t < path_arcs.size(); ++t) fl[path_arcs[t]] -= cyc;
            for (std::size_t t = where[nxt] + 1; t < path_nodes.size(); ++t) where[path_nodes[t]] = SIZE_MAX;
            path_nodes.resize(where[nxt] + 1);
            path_arcs.resize(where[nxt]);
            continue;
          }
          where[nxt] = path_nodes.size();
          path_nodes.push_back(nxt);
          path_arcs.push_back(a);
        }
        for (std::size_t v : path_nodes) where[v] = SIZE_MAX;
        if (stuck) break;
        const std::size_t dst = path_nodes.back();
        double amt = std::min(excess[src], deficit[dst]);
        for (std::size_t a : path_arcs) amt = std::min(amt, fl[a]);
        for (std::size_t a : path_arcs) fl[a] -= amt;
        excess[src] -= amt;
        deficit[dst] -= amt;
        entries.push_back({static_cast<std::uint32_t>(src), static_cast<std::uint32_t>(dst), amt});
      }
    }
    // numerical leftovers: pair remaining excess and deficit greedily
    std::size_t d = 0;
    for (std::size_t s = 0; s < N; ++s) {
      while (excess[s] > 0.0) {
        while (d < N && deficit[d] <= 0.0) ++d;
        if (d == N) break;
        const double amt = std::min(excess[s], deficit[d]);
        entries.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(d), amt});
        excess[s] -= amt;
        deficit[d] -= amt;
        if (excess[s] <= 1e-300) excess[s] = 0.0;
        if (deficit[d] <= 1e-300) deficit[d] = 0.0;
      }
    }
    return Coupling(sp, std::move(entries));
  }

  const Measure& mu() const { return mu_; }
  const Measure& nu() const { return nu_; }

 private:
  Measure mu_, nu_;
  std::vector<std::uint32_t> site_;
  std::unique_ptr<detail::NetworkSimplex> ns_;
};

/// Hamming W1 = Q_1 as the total disagreement of an optimal coupling.
inline double hamming_w1(const Measure& mu, const Measure& nu) {
  require_same_space(mu, nu);
  if (mu.same_table(nu)) return 0.0;
  HammingFlow hf(mu, nu);
  return hf.solve(std::vector<double>(mu.space().sites(), 1.0)).value;
}

/// ||alpha||_q = 1 alignment with x in l^p: alpha_i = x_i^{p-1} / ||x||_p^{p-1}.
inline std::vector<double> align(const std::vector<double>& x, const Exponent& p) {
  std::vector<double> a(x.size(), 0.0);
  if (x.empty()) return a;
  if (p.is_infinite()) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < x.size(); ++i)
      if (x[i] > x[arg]) arg = i;
    a[arg] = 1.0;
    return a;
  }
  if (p.is_one()) {
    std::fill(a.begin(), a.end(), 1.0);
    return a;
  }
  const double nrm = lp_norm(x, p);
  if (nrm == 0.0) {
    const double u = 1.0 / volume_power(x.size(), p.conjugate());
    std::fill(a.begin(), a.end(), u);
    return a;
  }
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = std::pow(x[i] / nrm, p.value() - 1.0);
  const double qn = lp_norm(a, p.conjugate());
  if (qn > 0.0)
    for (double& v : a) v /= qn;
  return a;
}

struct TransportCertificate {
  Exponent p;
  double value_upper = 0.0;  // Psi of the returned coupling
  double value_lower = 0.0;  // OT(d_alpha) with ||alpha||_q <= 1
  double gap = 0.0;
  bool converged = true;
  std::size_t iterations = 0;
  std::vector<double> alpha;
  std::vector<double> m;
  Coupling plan;

  double value() const { return value_upper; }

  nlohmann::json to_json() const {
    return {{"p", p.to_string()}, {"value_upper", value_upper}, {"value_lower", value_lower}, {"gap", gap},
            {"alpha", alpha},     {"m", m},                     {"converged", converged}, {"iterations", iterations}};
  }
};

struct QpOptions {
  double tol = 1e-9;
  std::size_t max_iter = 500;
};

/// Q_p(mu, nu) = inf over couplings of || m(Pi) ||_p, with a primal coupling
/// and a dual weight vector bracketing the value.
inline TransportCertificate q_p(const Measure& mu, const Measure& nu, const Exponent& p, const QpOptions& opt = {}) {
  p.require_at_least_one();
  require_same_space(mu, nu);
  const std::size_t n = mu.space().sites();
  TransportCertificate cert;
  cert.p = p;
  if (mu.same_table(nu)) {
    cert.plan = Coupling::diagonal(mu);
    cert.m.assign(n, 0.0);
    cert.alpha = align(cert.m, p);
    return cert;
  }
  HammingFlow hf(mu, nu);

  // atoms: exact disagreement vectors of flow-derived couplings
  std::vector<std::vector<double>> atoms;
  std::vector<Coupling> plans;
  auto add_atom = [&](const std::vector<double>& alpha) -> double {
    const auto sol = hf.solve(alpha);
    plans.push_back(hf.decompose());
    atoms.push_back(plans.back().disagreement());
    return sol.value;
  };

  const std::vector<double> ones(n, 1.0);
  const double first = add_atom(ones);
  std::vector<double> lambda{1.0};
  cert.value_lower = p.is_one() ? first : -1.0;
  cert.alpha = p.is_one() ? ones : std::vector<double>(n, 0.0);
  std::vector<double> x = atoms.front();
  // tables equal up to round-off: the first coupling is already optimal
  double first_mass = 0.0;
  for (double v : x) first_mass += v;
  const bool trivial = first_mass <= 1e-14;
  if (trivial) cert.value_lower = 0.0;

  if (!p.is_one() && !trivial) {
    cert.converged = false;
    const double pv = p.value();
    for (std::size_t it = 0; it < opt.max_iter; ++it) {
      cert.iterations = it + 1;
      std::vector<double> alpha;
      double upper;
      if (p.is_infinite()) {
        // master: max sum w_k s.t. sum_k w_k v_k,i <= 1; t* = 1 / sum w
        detail::DenseLp lp(n, atoms.size());
        for (std::size_t i = 0; i < n; ++i) {
          lp.b(i) = 1.0;
          for (std::size_t k = 0; k < atoms.size(); ++k) lp.a(i, k) = atoms[k][i];
        }
        for (std::size_t k = 0; k < atoms.size(); ++k) lp.c(k) = 1.0;
        const auto r = lp.solve();
        double s = 0.0;
        for (double w : r.x) s += w;
        lambda.assign(atoms.size(), 0.0);
        for (std::size_t k = 0; k < atoms.size(); ++k) lambda[k] = r.x[k] / s;
        double ys = 0.0;
        for (double y : r.dual) ys += y;
        alpha.assign(n, 0.0);
        if (ys > 0.0)
          for (std::size_t i = 0; i < n; ++i) alpha[i] = r.dual[i] / ys;
        x = detail::combine(atoms, lambda);
        upper = lp_norm(x, p);
        if (ys <= 0.0) alpha = align(x, p);
      } else {
        const auto hp = detail::hull_min_norm(atoms, pv, lambda);
        lambda = hp.lambda;
        x = hp.x;
        upper = lp_norm(x, p);
        alpha = align(x, p);
      }
      const double lower = add_atom(alpha);
      if (lower > cert.value_lower) {
        cert.value_lower = lower;
        cert.alpha = alpha;
      }
      lambda.push_back(0.0);
      if (upper - cert.value_lower <= opt.tol) {
        cert.converged = true;
        break;
      }
      // drop inactive atoms to keep the hull small
      std::vector<std::vector<double>> ka;
      std::vector<Coupling> kp;
      std::vector<double> kl;
      for (std::size_t k = 0; k < atoms.size(); ++k) {
        if (lambda[k] > 0.0 || k + 1 == atoms.size()) {
          ka.push_back(std::move(atoms[k]));
          kp.push_back(std::move(plans[k]));
          kl.push_back(lambda[k]);
        }
      }
      atoms = std::move(ka);
      plans = std::move(kp);
      lambda = std::move(kl);
    }
    if (lambda.size() > atoms.size()) lambda.resize(atoms.size());
    if (lambda.size() < atoms.size()) lambda.resize(atoms.size(), 0.0);
  }
  double ls = 0.0;
  for (double v : lambda) ls += v;
  if (ls <= 0.0) {
    lambda.assign(atoms.size(), 0.0);
    lambda.front() = 1.0;
    ls = 1.0;
  }
  for (double& v : lambda) v /= ls;
  cert.plan = Coupling::mixture(plans, lambda);
  cert.m = cert.plan.disagreement();
  cert.value_upper = lp_norm(cert.m, p);
  cert.value_lower = std::min(std::max(cert.value_lower, 0.0), cert.value_upper);
  cert.gap = cert.value_upper - cert.value_lower;
  if (p.is_one() || trivial) cert.converged = cert.gap <= opt.tol;
  return cert;
}

/// (min E[d_H^p])^{1/p}
inline double wasserstein_p_hamming(const Measure& mu, const Measure& nu, const Exponent& p) {
  if (p.is_infinite()) throw std::domain_error("wasserstein exponent must be finite");
  p.require_at_least_one();
  require_same_space(mu, nu);
  if (mu.same_table(nu)) return 0.0;
  if (p.is_one()) return hamming_w1(mu, nu);
  const auto sol = solve_ot(mu, nu, CostMatrix::hamming_power(mu.space(), p.value()));
  return std::pow(std::max(sol.value, 0.0), 1.0 / p.value());
}

/// sum_i sum_xi Pi{sigma_i != xi_i | sigma' = xi}^2 nu(xi)
inline double marton_bound(const Measure& mu, const Measure& nu, const Coupling& plan) {
  require_same_space(mu, nu);
  const auto& sp = plan.space();
  const std::size_t N = sp.size(), n = sp.sites();
  std::vector<double> col(N, 0.0), dis(N * n, 0.0);
  for (const auto& e : plan.entries()) {
    col[e.y] += e.mass;
    for (std::size_t s = 0; s < n; ++s)
      if (sp.symbol(e.x, s) != sp.symbol(e.y, s)) dis[e.y * n + s] += e.mass;
  }
  double total = 0.0;
  for (std::size_t y = 0; y < N; ++y) {
    if (col[y] <= kProbFloor) continue;
    for (std::size_t s = 0; s < n; ++s) {
      const double cond = dis[y * n + s] / col[y];
      total += cond * cond * col[y];
    }
  }
  return total;
}

/// Extends a coupling on Lambda to target: coordinates off Lambda of both
/// copies are drawn independently from the filler's marginal there.
inline Coupling extend_coupling(const Coupling& plan, const Volume& target, const Measure& filler) {
  const auto& inner = plan.space();
  if (!target.contains(inner.volume())) throw std::domain_error("target volume does not contain the coupling volume");
  if (!(filler.space().volume() == target) || filler.space().alphabet() != inner.alphabet())
    throw std::domain_error("filler must live on the target volume");
  if (target == inner.volume()) return plan;
  std::vector<Site> rest;
  for (const auto& s : target.sites())
    if (!inner.volume().contains(s)) rest.push_back(s);
  const Volume outside(rest);
  const Measure fill = marginal(filler, outside);
  const ConfigSpace tsp(target, inner.alphabet());
  std::vector<std::size_t> in_pos(inner.sites()), out_pos(outside.size());
  for (std::size_t s = 0; s < inner.sites(); ++s) in_pos[s] = tsp.position(inner.volume()[s]);
  for (std::size_t s = 0; s < outside.size(); ++s) out_pos[s] = tsp.position(outside[s]);
  auto compose = [&](std::size_t xin, std::size_t xout) {
    std::size_t r = 0;
    for (std::size_t s = 0; s < in_pos.size(); ++s) r += static_cast<std::size_t>(inner.symbol(xin, s)) * tsp.stride(in_pos[s]);
    for (std::size_t s = 0; s < out_pos.size(); ++s)
      r += static_cast<std::size_t>(fill.space().symbol(xout, s)) * tsp.stride(out_pos[s]);
    return r;
  };
  std::vector<std::size_t> fs;
  for (std::size_t z = 0; z < fill.size(); ++z)
    if (fill[z] > 0.0) fs.push_back(z);
  std::vector<Coupling::Entry> entries;
  entries.reserve(plan.entries().size() * fs.size() * fs.size());
  for (const auto& e : plan.entries())
    for (std::size_t a : fs)
      for (std::size_t b : fs)
        entries.push_back({static_cast<std::uint32_t>(compose(e.x, a)), static_cast<std::uint32_t>(compose(e.y, b)),
                           e.mass * fill[a] * fill[b]});
  return Coupling(tsp, std::move(entries));
}

/// Disagreement marginals of a coupling restricted to a sub-volume.
inline std::vector<double> disagreement_on(const Coupling& plan, const Volume& sub) {
  const auto& sp = plan.space();
  std::vector<std::size_t> pos(sub.size());
  for (std::size_t s = 0; s < sub.size(); ++s) pos[s] = sp.position(sub[s]);
  std::vector<double> m(sub.size(), 0.0);
  for (const auto& e : plan.entries())
    for (std::size_t s = 0; s < pos.size(); ++s)
      if (sp.symbol(e.x, pos[s]) != sp.symbol(e.y, pos[s])) m[s] += e.mass;
  return m;
}

}  // namespace kanto
