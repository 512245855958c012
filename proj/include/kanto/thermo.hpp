#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "kanto/gcb.hpp"
#include "kanto/ipm.hpp"
#include "kanto/random.hpp"

namespace kanto {

struct LimitPoint {
  int n = 0;
  std::size_t volume = 0;
  double q_upper = 0.0, q_lower = 0.0;  // Q_p bracket
  double d_value = 0.0;                 // D_p witness value (lower bound)
  bool has_d = false;
  std::string d_route;
  double normalized = 0.0;  // Q_p upper / |Lambda_n|^{1/p}
  double normalized_d = 0.0;
};

struct LimitSequence {
  Exponent p;
  std::vector<LimitPoint> points;
  bool truncated = false;    // capacity reached before n_max
  bool nondecreasing = true; // observed, not asserted
  double last = 0.0;
  double extrapolated = 0.0; // Aitken estimate from the last three points (falls back to last)
  double slope = 0.0;        // last increment

  nlohmann::json to_json() const {
    auto pts = nlohmann::json::array();
    for (const auto& q : points)
      pts.push_back({{"n", q.n}, {"volume", q.volume}, {"q_upper", q.q_upper}, {"q_lower", q.q_lower},
                     {"d_value", q.d_value}, {"has_d", q.has_d}, {"d_route", q.d_route},
                     {"normalized", q.normalized}, {"normalized_d", q.normalized_d}});
    return {{"p", p.to_string()}, {"points", pts}, {"truncated", truncated}, {"nondecreasing", nondecreasing},
            {"last", last}, {"extrapolated", extrapolated}, {"slope", slope}};
  }

  /// columns: n, volume, raw, normalized, lower, upper
  std::string csv() const {
    std::string s = "n,volume,raw,normalized,lower,upper\n";
    char buf[256];
    for (const auto& q : points) {
      std::snprintf(buf, sizeof buf, "%d,%zu,%.12g,%.12g,%.12g,%.12g\n", q.n, q.volume, q.q_upper, q.normalized,
                    q.has_d ? std::max(q.d_value, q.q_lower) : q.q_lower, q.q_upper);
      s += buf;
    }
    return s;
  }
};

struct ThermoOptions {
  std::size_t max_states = 4096;  // Hamming-graph nodes per cube
  bool with_d = true;
  std::size_t dim = 1;
};

inline std::size_t cube_states(int k, std::size_t dim, int n) {
  const std::size_t side = static_cast<std::size_t>(2 * n + 1);
  std::size_t sites = 1;
  for (std::size_t j = 0; j < dim; ++j) sites *= side;
  double states = std::pow(static_cast<double>(k), static_cast<double>(sites));
  return states > 1e18 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(states);
}

inline void finish_sequence(LimitSequence& s) {
  const auto& pts = s.points;
  if (pts.empty()) return;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].normalized < pts[i - 1].normalized - 1e-9) s.nondecreasing = false;
  s.last = pts.back().normalized;
  s.extrapolated = s.last;
  if (pts.size() >= 2) s.slope = pts.back().normalized - pts[pts.size() - 2].normalized;
  if (pts.size() >= 3) {
    const double a = pts[pts.size() - 3].normalized, b = pts[pts.size() - 2].normalized, c = pts.back().normalized;
    const double den = (c - b) - (b - a);
    if (std::abs(den) > 1e-12 && (c - b) * (b - a) > 0.0) {
      const double aitken = c - (c - b) * (c - b) / den;
      // accept only estimates that stay on the side the sequence is moving to
      if ((c >= b && aitken >= c) || (c <= b && aitken <= c)) s.extrapolated = aitken;
    }
  }
}

/// Q_p and D_p on cubes Lambda_n, n = 0..n_max, normalized by |Lambda_n|^{1/p}.
inline LimitSequence limit_sequence(const ProcessSpec& a, const ProcessSpec& b, const Exponent& p, int n_max,
                                    const ThermoOptions& opt = {}) {
  LimitSequence s;
  s.p = p;
  const int k = alphabet_of(a);
  if (alphabet_of(b) != k) throw std::domain_error("specifications use different alphabets");
  for (int n = 0; n <= n_max; ++n) {
    if (cube_states(k, opt.dim, n) > opt.max_states) {
      s.truncated = true;
      break;
    }
    const Volume vol = Volume::cube(opt.dim, n);
    const Measure mu = realize(a, vol), nu = realize(b, vol);
    LimitPoint pt;
    pt.n = n;
    pt.volume = vol.size();
    const auto q = q_p(mu, nu, p);
    pt.q_upper = q.value_upper;
    pt.q_lower = q.value_lower;
    const double scale = volume_power(vol.size(), p);
    pt.normalized = pt.q_upper / scale;
    if (opt.with_d) {
      const auto d = d_p(mu, nu, p);
      pt.has_d = true;
      pt.d_value = d.value;
      pt.d_route = route_name(d.route);
      pt.normalized_d = d.value / scale;
    }
    s.points.push_back(pt);
  }
  finish_sequence(s);
  return s;
}

struct SuperadditivityRow {
  int n = 0;
  std::size_t split = 0;  // left part = first `split` sites of the cube
  double whole = 0.0, left = 0.0, right = 0.0;  // certified lower / upper / upper
  double excess = 0.0;  // whole^p - left^p - right^p (max form for p = inf)
  bool ok = true;
};

/// Q_p^p(Lambda) >= Q_p^p(L) + Q_p^p(R) on disjoint splits of the d = 1 cube;
/// for p = inf the inequality reads Q(Lambda) >= max(Q(L), Q(R)).
/// With use_d the D_p witnesses are used instead (whole) and D_p model bounds (parts).
inline std::vector<SuperadditivityRow> superadditivity_check(const ProcessSpec& a, const ProcessSpec& b, const Exponent& p,
                                                             int n, bool use_d = false, double tol = 1e-6) {
  const Volume vol = Volume::cube(1, n);
  const Measure mu = realize(a, vol), nu = realize(b, vol);
  auto lower = [&](const Measure& x, const Measure& y) {
    return use_d ? d_p(x, y, p).value : q_p(x, y, p).value_lower;
  };
  auto upper = [&](const Measure& x, const Measure& y) {
    return use_d ? d_p(x, y, p).value_upper : q_p(x, y, p).value_upper;
  };
  const double whole = lower(mu, nu);
  std::vector<SuperadditivityRow> rows;
  for (std::size_t split = 1; split < vol.size(); ++split) {
    std::vector<Site> ls(vol.sites().begin(), vol.sites().begin() + static_cast<std::ptrdiff_t>(split));
    std::vector<Site> rs(vol.sites().begin() + static_cast<std::ptrdiff_t>(split), vol.sites().end());
    const Volume L(ls), R(rs);
    SuperadditivityRow row;
    row.n = n;
    row.split = split;
    row.whole = whole;
    row.left = upper(marginal(mu, L), marginal(nu, L));
    row.right = upper(marginal(mu, R), marginal(nu, R));
    if (p.is_infinite()) {
      row.excess = whole - std::max(row.left, row.right);
    } else {
      const double pv = p.value();
      row.excess = std::pow(whole, pv) - std::pow(row.left, pv) - std::pow(row.right, pv);
    }
    row.ok = row.excess >= -tol;
    rows.push_back(row);
  }
  return rows;
}

struct PIndependenceReport {
  std::vector<Exponent> ps;
  std::vector<LimitSequence> sequences;
  std::vector<double> per_n_spread;  // max_p - min_p of normalized values at each n
  double final_spread = 0.0;
  double extrapolated_spread = 0.0;
  double tolerance = 0.0;
  bool within_tolerance = true;

  nlohmann::json to_json() const {
    auto seqs = nlohmann::json::array();
    for (const auto& s : sequences) seqs.push_back(s.to_json());
    return {{"per_n_spread", per_n_spread}, {"final_spread", final_spread},
            {"extrapolated_spread", extrapolated_spread}, {"tolerance", tolerance},
            {"within_tolerance", within_tolerance}, {"sequences", seqs}};
  }
};

inline PIndependenceReport p_independence_check(const ProcessSpec& a, const ProcessSpec& b, const std::vector<Exponent>& ps,
                                                int n_max, double tolerance, const ThermoOptions& opt = {}) {
  if (ps.empty()) throw std::domain_error("empty exponent set");
  PIndependenceReport r;
  r.ps = ps;
  r.tolerance = tolerance;
  for (const auto& p : ps) r.sequences.push_back(limit_sequence(a, b, p, n_max, opt));
  std::size_t len = r.sequences.front().points.size();
  for (const auto& s : r.sequences) len = std::min(len, s.points.size());
  for (std::size_t i = 0; i < len; ++i) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : r.sequences) {
      lo = std::min(lo, s.points[i].normalized);
      hi = std::max(hi, s.points[i].normalized);
    }
    r.per_n_spread.push_back(hi - lo);
  }
  r.final_spread = r.per_n_spread.empty() ? 0.0 : r.per_n_spread.back();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : r.sequences) {
    lo = std::min(lo, s.extrapolated);
    hi = std::max(hi, s.extrapolated);
  }
  r.extrapolated_spread = hi - lo;
  r.within_tolerance = r.final_spread <= tolerance;
  return r;
}

// ---- d-bar sandwich ----

struct DbarSandwich {
  double lower = 0.0;          // D_1 on Lambda_{n_max} divided by its size
  int lower_n = 0;
  bool has_upper = false;
  double upper = 0.0;          // per-site disagreement of a stationary coupling
  double half_width = 0.0;     // 95% batch-means half-width
  std::size_t steps = 0, burn_in = 0, batches = 0;
  bool consistent = true;      // lower <= upper + 3 half-widths

  nlohmann::json to_json() const {
    return {{"lower", lower}, {"lower_n", lower_n}, {"has_upper", has_upper}, {"upper", upper},
            {"half_width", half_width}, {"steps", steps}, {"burn_in", burn_in}, {"batches", batches},
            {"consistent", consistent}};
  }
};

struct DbarOptions {
  std::size_t steps = 1000000;
  std::size_t burn_in = 10000;
  std::size_t batches = 1000;
  std::size_t max_states = 4096;
};

namespace detail {

/// Maximal coupling of two laws driven by one uniform.
inline std::pair<int, int> maximal_coupling_draw(const std::vector<double>& p, const std::vector<double>& q, double u) {
  const std::size_t k = p.size();
  double overlap = 0.0;
  for (std::size_t z = 0; z < k; ++z) overlap += std::min(p[z], q[z]);
  auto pick = [&](auto weight, double mass, double v) {
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t z = 0; z < k; ++z) {
      const double w = weight(z);
      if (w <= 0.0) continue;
      last = z;
      acc += w / mass;
      if (v < acc) return static_cast<int>(z);
    }
    return static_cast<int>(last);
  };
  if (u < overlap) {
    const int z = pick([&](std::size_t z) { return std::min(p[z], q[z]); }, overlap, u / overlap);
    return {z, z};
  }
  const double rest = 1.0 - overlap;
  const double v = rest > 0.0 ? (u - overlap) / rest : 0.0;
  const int x = pick([&](std::size_t z) { return p[z] - std::min(p[z], q[z]); }, rest, v);
  const int y = pick([&](std::size_t z) { return q[z] - std::min(p[z], q[z]); }, rest, v);
  return {x, y};
}

inline const std::vector<double>& row_of(const ProcessSpec& s, int prev, std::vector<double>& scratch) {
  if (auto* i = std::get_if<IidSpec>(&s)) return i->law;
  if (auto* m = std::get_if<MarkovSpec>(&s)) return m->P[static_cast<std::size_t>(prev)];
  (void)scratch;
  throw std::domain_error("coupling needs iid or markov specs");
}

}  // namespace detail

inline DbarSandwich dbar_sandwich(const ProcessSpec& a, const ProcessSpec& b, int n_max, std::uint64_t seed,
                                  const DbarOptions& opt = {}) {
  DbarSandwich out;
  const int k = alphabet_of(a);
  if (alphabet_of(b) != k) throw std::domain_error("specifications use different alphabets");
  int n = n_max;
  while (n > 0 && cube_states(k, 1, n) > opt.max_states) --n;
  const Volume vol = Volume::cube(1, n);
  const Measure mu = realize(a, vol), nu = realize(b, vol);
  out.lower = d_p(mu, nu, Exponent(1)).value / static_cast<double>(vol.size());
  out.lower_n = n;
  const bool iid_or_markov = !std::holds_alternative<IsingSpec>(a) && !std::holds_alternative<IsingSpec>(b);
  if (!iid_or_markov || opt.steps == 0) return out;

  // pair chain started from the product of initial laws, run past burn-in
  Rng rng(derive_seed(seed, 0xdba7));
  std::vector<double> scratch;
  auto start_law = [](const ProcessSpec& s) {
    if (auto* i = std::get_if<IidSpec>(&s)) return i->law;
    return initial_law(std::get<MarkovSpec>(s));
  };
  const auto la = start_law(a), lb = start_law(b);
  auto [x, y] = detail::maximal_coupling_draw(la, lb, rng.uniform());
  for (std::size_t t = 0; t < opt.burn_in; ++t) {
    const auto& pa = detail::row_of(a, x, scratch);
    const auto& pb = detail::row_of(b, y, scratch);
    std::tie(x, y) = detail::maximal_coupling_draw(pa, pb, rng.uniform());
  }
  const std::size_t B = std::max<std::size_t>(2, std::min(opt.batches, opt.steps));
  const std::size_t per = opt.steps / B;
  std::vector<double> means(B, 0.0);
  for (std::size_t bi = 0; bi < B; ++bi) {
    std::size_t hits = 0;
    for (std::size_t t = 0; t < per; ++t) {
      const auto& pa = detail::row_of(a, x, scratch);
      const auto& pb = detail::row_of(b, y, scratch);
      std::tie(x, y) = detail::maximal_coupling_draw(pa, pb, rng.uniform());
      hits += x != y;
    }
    means[bi] = static_cast<double>(hits) / static_cast<double>(per);
  }
  double m = 0.0;
  for (double v : means) m += v;
  m /= static_cast<double>(B);
  double var = 0.0;
  for (double v : means) var += (v - m) * (v - m);
  var /= static_cast<double>(B - 1);
  out.has_upper = true;
  out.upper = m;
  out.half_width = 1.96 * std::sqrt(var / static_cast<double>(B));
  out.steps = per * B;
  out.burn_in = opt.burn_in;
  out.batches = B;
  out.consistent = out.lower <= out.upper + 3.0 * out.half_width;
  return out;
}

// ---- relative entropy density ----

struct EntropyDensity {
  std::vector<int> n;
  std::vector<double> density;  // s_{Lambda_n}(nu|mu) / |Lambda_n|
  bool infinite = false;
  bool has_limit = false;
  double limit = 0.0;  // closed-form oracle

  nlohmann::json to_json() const {
    return {{"n", n}, {"density", density}, {"infinite", infinite}, {"has_limit", has_limit}, {"limit", limit}};
  }
};

/// Closed-form density: single-site KL for iid pairs, the conditional KL rate
/// sum_x pi_nu(x) sum_y nu(y|x) log(nu(y|x) / mu(y|x)) for markov pairs.
inline std::optional<double> entropy_density_limit(const ProcessSpec& mu_spec, const ProcessSpec& nu_spec) {
  auto kl = [](const std::vector<double>& p, const std::vector<double>& q) -> std::optional<double> {
    double s = 0.0;
    for (std::size_t z = 0; z < p.size(); ++z) {
      if (p[z] <= kProbFloor) continue;
      if (q[z] <= kProbFloor) return std::nullopt;
      s += p[z] * std::log(p[z] / q[z]);
    }
    return std::max(s, 0.0);
  };
  auto as_markov = [](const ProcessSpec& s) -> std::optional<MarkovSpec> {
    if (auto* i = std::get_if<IidSpec>(&s)) return MarkovSpec{std::vector<std::vector<double>>(i->law.size(), i->law), i->law};
    if (auto* m = std::get_if<MarkovSpec>(&s)) return *m;
    return std::nullopt;
  };
  if (auto* a = std::get_if<IidSpec>(&mu_spec))
    if (auto* b = std::get_if<IidSpec>(&nu_spec)) return kl(b->law, a->law);
  auto ma = as_markov(mu_spec), mb = as_markov(nu_spec);
  if (!ma || !mb) return std::nullopt;
  const auto pi = stationary(*mb);
  double s = 0.0;
  for (std::size_t x = 0; x < pi.size(); ++x) {
    const auto r = kl(mb->P[x], ma->P[x]);
    if (!r) return std::numeric_limits<double>::infinity();
    s += pi[x] * *r;
  }
  return s;
}

inline EntropyDensity entropy_density(const ProcessSpec& mu_spec, const ProcessSpec& nu_spec, int n_max,
                                      std::size_t max_states = 1u << 16) {
  EntropyDensity out;
  const int k = alphabet_of(mu_spec);
  for (int n = 0; n <= n_max; ++n) {
    if (cube_states(k, 1, n) > max_states) break;
    const Volume vol = Volume::cube(1, n);
    const auto s = relative_entropy(realize(nu_spec, vol), realize(mu_spec, vol));
    out.n.push_back(n);
    if (s.infinite) {
      out.infinite = true;
      out.density.push_back(std::numeric_limits<double>::infinity());
    } else {
      out.density.push_back(s.value / static_cast<double>(vol.size()));
    }
  }
  if (auto lim = entropy_density_limit(mu_spec, nu_spec)) {
    out.has_limit = true;
    out.limit = *lim;
  }
  return out;
}

struct AverseRow {
  int n = 0;
  double dbar_lower = 0.0;  // D_1 / |Lambda_n|
  double density = 0.0;     // s_n / |Lambda_n|
  double bound = 0.0;       // sqrt(2 C density)
  bool ok = true;
};

struct AverseReport {
  double C = 0.0;
  std::vector<AverseRow> rows;
  double limit_lhs = 0.0, limit_rhs = 0.0;  // best d-bar lower bound vs sqrt(2 C lim density)
  bool has_limit = false;
  bool passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const AverseRow& r) { return r.ok; }) &&
           (!has_limit || limit_lhs <= limit_rhs + 1e-9);
  }
  nlohmann::json to_json() const {
    auto a = nlohmann::json::array();
    for (const auto& r : rows)
      a.push_back({{"n", r.n}, {"dbar_lower", r.dbar_lower}, {"density", r.density}, {"bound", r.bound}, {"ok", r.ok}});
    return {{"C", C}, {"rows", a}, {"has_limit", has_limit}, {"limit_lhs", limit_lhs}, {"limit_rhs", limit_rhs},
            {"passed", passed()}};
  }
};

/// d-bar(mu, nu) <= sqrt(2 C s(nu|mu)) at every tested cube and in the limit,
/// for mu satisfying a finite-volume GCB with constant C.
inline AverseReport averse_check(const ProcessSpec& mu_spec, const ProcessSpec& nu_spec, double C, int n_max,
                                 std::size_t max_states = 4096) {
  AverseReport out;
  out.C = C;
  const int k = alphabet_of(mu_spec);
  for (int n = 0; n <= n_max; ++n) {
    if (cube_states(k, 1, n) > max_states) break;
    const Volume vol = Volume::cube(1, n);
    const Measure mu = realize(mu_spec, vol), nu = realize(nu_spec, vol);
    AverseRow row;
    row.n = n;
    row.dbar_lower = d_p(mu, nu, Exponent(1)).value / static_cast<double>(vol.size());
    const auto s = relative_entropy(nu, mu);
    row.density = s.infinite ? std::numeric_limits<double>::infinity() : s.value / static_cast<double>(vol.size());
    row.bound = std::sqrt(2.0 * C * row.density);
    row.ok = row.dbar_lower <= row.bound + 1e-9;
    out.rows.push_back(row);
    out.limit_lhs = std::max(out.limit_lhs, row.dbar_lower);
  }
  if (auto lim = entropy_density_limit(mu_spec, nu_spec)) {
    out.has_limit = true;
    out.limit_rhs = std::sqrt(2.0 * C * *lim);
  }
  return out;
}

}  // namespace kanto
