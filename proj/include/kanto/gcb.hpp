#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "kanto/ipm.hpp"
#include "kanto/random.hpp"

namespace kanto {

struct NamedFunction {
  std::string id;
  LocalFunction f;
};

struct GcbViolation {
  std::string id;
  double lhs = 0.0, rhs = 0.0;
};

struct GcbReport {
  double C = 0.0;
  Exponent q;
  std::size_t checked = 0;
  std::vector<GcbViolation> violations;
  double max_ratio = 0.0;  // log_mgf / (||delta f||_q^2 / 2) over non-constant f
  std::string max_ratio_id;

  bool passed() const { return violations.empty(); }

  nlohmann::json to_json() const {
    auto v = nlohmann::json::array();
    for (const auto& x : violations) v.push_back({{"id", x.id}, {"lhs", x.lhs}, {"rhs", x.rhs}});
    return {{"C", C}, {"q", q.to_string()}, {"checked", checked}, {"violations", v}, {"max_ratio", max_ratio},
            {"max_ratio_id", max_ratio_id}};
  }
};

inline constexpr double kGcbTol = 1e-9;

/// log mu(e^{f - mu f}) <= (C/2) ||delta f||_q^2 for every f in the suite.
inline GcbReport gcb_check(const Measure& mu, double C, const Exponent& q, const std::vector<NamedFunction>& suite) {
  if (!(C > 0.0)) throw std::domain_error("GCB constant must be positive");
  if (suite.empty()) throw std::domain_error("empty function suite");
  q.require_at_least_one();
  GcbReport r;
  r.C = C;
  r.q = q;
  for (const auto& nf : suite) {
    const double lhs = log_mgf(mu, nf.f);
    const double osc = osc_norm(nf.f, q);
    const double rhs = 0.5 * C * osc * osc;
    ++r.checked;
    if (lhs > rhs + kGcbTol) r.violations.push_back({nf.id, lhs, rhs});
    if (osc > 0.0) {
      const double ratio = lhs / (0.5 * osc * osc);
      if (ratio > r.max_ratio) {
        r.max_ratio = ratio;
        r.max_ratio_id = nf.id;
      }
    }
  }
  return r;
}

/// Single-site spin functions, pair products and scaled copies: the default
/// suite for product-measure checks.
inline std::vector<NamedFunction> standard_suite(const ConfigSpace& sp, std::uint64_t seed, std::size_t random_count = 8) {
  std::vector<NamedFunction> out;
  const int k = sp.alphabet();
  const std::size_t n = sp.sites();
  for (double a : {0.1, 1.0, 4.0}) {
    for (std::size_t s = 0; s < n; ++s)
      out.push_back({"spin" + std::to_string(s) + "*" + std::to_string(a),
                     LocalFunction::from(sp, [&](std::span<const int> c) { return a * spin(c[s], k); })});
    out.push_back({"magnetization*" + std::to_string(a), LocalFunction::from(sp, [&](std::span<const int> c) {
                     double m = 0.0;
                     for (int v : c) m += spin(v, k);
                     return a * m;
                   })});
    for (std::size_t s = 0; s + 1 < n; ++s)
      out.push_back({"pair" + std::to_string(s) + "*" + std::to_string(a),
                     LocalFunction::from(sp, [&](std::span<const int> c) { return a * spin(c[s], k) * spin(c[s + 1], k); })});
  }
  out.push_back({"constant", LocalFunction::constant(sp, 3.0)});
  Rng rng(seed);
  for (std::size_t t = 0; t < random_count; ++t) {
    std::vector<double> v(sp.size());
    const double scale = std::exp(3.0 * rng.uniform() - 1.5);
    for (double& x : v) x = scale * rng.normal();
    out.push_back({"random" + std::to_string(t), LocalFunction(sp, std::move(v))});
  }
  return out;
}

/// Functions on windows of one to three sites: spins, neighbour products,
/// indicators and random tables. All of finite range by construction.
inline std::vector<NamedFunction> finite_range_suite(int k, std::size_t count, std::uint64_t seed) {
  std::vector<NamedFunction> out;
  Rng rng(seed);
  const double ks = static_cast<double>(k);
  for (std::size_t t = 0; out.size() < count; ++t) {
    const std::size_t width = 1 + t % 3;
    const ConfigSpace sp(Volume::interval(0, static_cast<int>(width) - 1), k);
    const double a = 0.25 + 1.75 * rng.uniform();
    switch (t % 4) {
      case 0:
        out.push_back({"spin-w" + std::to_string(width) + "-" + std::to_string(t),
                       LocalFunction::from(sp, [&](std::span<const int> c) { return a * spin(c.back(), k); })});
        break;
      case 1:
        out.push_back({"product-w" + std::to_string(width) + "-" + std::to_string(t),
                       LocalFunction::from(sp, [&](std::span<const int> c) {
                         double v = a;
                         for (int z : c) v *= spin(z, k);
                         return v;
                       })});
        break;
      case 2:
        out.push_back({"indicator-w" + std::to_string(width) + "-" + std::to_string(t),
                       LocalFunction::from(sp, [&](std::span<const int> c) {
                         return std::all_of(c.begin(), c.end(), [](int z) { return z == 0; }) ? a : 0.0;
                       })});
        break;
      default: {
        std::vector<double> v(sp.size());
        for (double& x : v) x = a * (2.0 * rng.uniform() - 1.0) * ks / 2.0;
        out.push_back({"random-w" + std::to_string(width) + "-" + std::to_string(t), LocalFunction(sp, std::move(v))});
      }
    }
  }
  return out;
}

// ---- optimal constant ----

struct OptimalConstant {
  double C_lower = 0.0;
  LocalFunction witness;  // attains C_lower: 2 log_mgf(witness) / ||delta witness||_q^2
  double scale = 0.0;     // ||delta witness||_q
  bool degenerate = false;
};

namespace detail {

inline double gcb_ratio(const Measure& mu, const LocalFunction& g, double t) {
  // g normalized to ||delta g||_q = 1
  return 2.0 * log_mgf(mu, g.scaled(t)) / (t * t);
}

}  // namespace detail

/// Certified lower bound on sup_f log_mgf(f) / (||delta f||_q^2 / 2) by
/// multistart ascent over directions and a golden search over the scale.
inline OptimalConstant optimal_constant(const Measure& mu, const Exponent& q, std::size_t restarts, std::uint64_t seed = 1) {
  if (restarts == 0) throw std::domain_error("restarts must be >= 1");
  const auto& sp = mu.space();
  OptimalConstant best;
  best.degenerate = true;
  best.witness = LocalFunction::constant(sp, 0.0);
  Rng rng(seed);

  auto scale_search = [&](const LocalFunction& g, double& t_best) {
    const double lo0 = std::log(1e-3), hi0 = std::log(20.0);
    double lo = lo0, hi = hi0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    double fa = detail::gcb_ratio(mu, g, std::exp(a)), fb = detail::gcb_ratio(mu, g, std::exp(b));
    for (int it = 0; it < 60; ++it) {
      if (fa >= fb) {
        hi = b;
        b = a;
        fb = fa;
        a = hi - gr * (hi - lo);
        fa = detail::gcb_ratio(mu, g, std::exp(a));
      } else {
        lo = a;
        a = b;
        fa = fb;
        b = lo + gr * (hi - lo);
        fb = detail::gcb_ratio(mu, g, std::exp(b));
      }
    }
    double v = std::max(fa, fb);
    t_best = std::exp(fa >= fb ? a : b);
    // the supremum may sit at the small-scale end
    const double edge = detail::gcb_ratio(mu, g, std::exp(lo0));
    if (edge > v) {
      v = edge;
      t_best = std::exp(lo0);
    }
    return v;
  };

  auto consider = [&](LocalFunction g) {
    double nrm = osc_norm(g, q);
    if (nrm <= 1e-12) return;
    g = g.scaled(1.0 / nrm);
    double t = 1.0;
    double val = scale_search(g, t);
    // normalized gradient ascent on the table at the current scale
    double eta = 0.5;
    for (int it = 0; it < 200 && eta > 1e-6; ++it) {
      const auto nu = tilt(mu, g.scaled(t));
      std::vector<double> v = g.values();
      for (std::size_t x = 0; x < v.size(); ++x) v[x] += eta * (nu[x] - mu[x]) / std::max(t, 1e-3);
      LocalFunction cand(sp, std::move(v));
      const double cn = osc_norm(cand, q);
      if (cn <= 1e-12) {
        eta *= 0.5;
        continue;
      }
      cand = cand.scaled(1.0 / cn);
      double tc = t;
      const double cv = scale_search(cand, tc);
      if (cv > val) {
        g = cand;
        val = cv;
        t = tc;
        eta *= 1.5;
      } else {
        eta *= 0.5;
      }
    }
    if (val > best.C_lower || best.degenerate) {
      best.C_lower = std::max(val, 0.0);
      best.witness = g.scaled(t);
      best.scale = t;
      best.degenerate = false;
    }
  };

  for (std::size_t s = 0; s < sp.sites(); ++s)
    consider(LocalFunction::from(sp, [&](std::span<const int> c) { return spin(c[s], sp.alphabet()); }));
  for (std::size_t r = 0; r < restarts; ++r) {
    std::vector<double> v(sp.size());
    for (double& x : v) x = rng.normal();
    consider(LocalFunction(sp, std::move(v)));
  }
  if (best.degenerate) best.C_lower = 0.0;
  return best;
}

// ---- entropy-distance inequality ----

struct EdiTrial {
  std::size_t trial = 0;
  std::string kind;
  double entropy = 0.0;
  bool entropy_infinite = false;
  double distance_lower = 0.0, distance_upper = 0.0;
  double bound = 0.0;
  double slack = 0.0;  // bound - distance_upper
  enum class Status { Pass, Violation, Undecided } status = Status::Pass;
  bool gcb_cooccurs = false;  // only meaningful for violations
};

inline const char* status_name(EdiTrial::Status s) {
  switch (s) {
    case EdiTrial::Status::Pass: return "pass";
    case EdiTrial::Status::Violation: return "violation";
    default: return "undecided";
  }
}

struct EdiReport {
  double C = 0.0;
  Exponent p;
  std::vector<EdiTrial> trials;
  std::size_t violations = 0, undecided = 0;

  bool passed() const { return violations == 0 && undecided == 0; }

  nlohmann::json to_json() const {
    double min_slack = std::numeric_limits<double>::infinity();
    for (const auto& t : trials)
      if (std::isfinite(t.slack)) min_slack = std::min(min_slack, t.slack);
    return {{"C", C}, {"p", p.to_string()}, {"trials", trials.size()}, {"violations", violations},
            {"undecided", undecided}, {"min_slack", std::isfinite(min_slack) ? min_slack : 0.0}};
  }

  /// columns: trial, entropy, distance, bound, slack
  std::string violation_csv() const {
    std::string s = "trial,entropy,distance,bound,slack\n";
    char buf[256];
    for (const auto& t : trials) {
      if (t.status != EdiTrial::Status::Violation) continue;
      std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%.12g,%.12g\n", t.trial, t.entropy, t.distance_lower, t.bound,
                    t.bound - t.distance_lower);
      s += buf;
    }
    return s;
  }
};

struct EdiOptions {
  double tol = 1e-8;
  bool use_coupling_side = false;  // Q_p instead of D_p
  std::vector<LocalFunction> tilt_directions;  // extra tilts along these functions
};

/// Random laws nu: flat Dirichlet, sparse Dirichlet and exponential tilts of mu.
inline Measure sample_nu(const Measure& mu, Rng& rng, std::size_t kind, std::string& label) {
  const auto& sp = mu.space();
  const std::size_t N = sp.size();
  switch (kind % 3) {
    case 0: {
      label = "dirichlet";
      return Measure(sp, rng.flat_dirichlet(N));
    }
    case 1: {
      label = "sparse";
      const std::size_t keep = 1 + rng.index(N);
      std::vector<std::size_t> idx(N);
      for (std::size_t x = 0; x < N; ++x) idx[x] = x;
      for (std::size_t x = 0; x + 1 < N; ++x) std::swap(idx[x], idx[x + rng.index(N - x)]);
      std::vector<double> w(N, 0.0);
      const auto d = rng.flat_dirichlet(keep);
      for (std::size_t t = 0; t < keep; ++t) w[idx[t]] = d[t];
      return Measure::normalized(sp, std::move(w));
    }
    default: {
      label = "tilt";
      std::vector<double> v(N);
      for (double& x : v) x = rng.normal();
      const double beta = std::exp(std::log(1e-2) + rng.uniform() * (std::log(3.0) - std::log(1e-2)));
      return tilt(mu, LocalFunction(sp, std::move(v)).scaled(beta));
    }
  }
}

namespace detail {

inline void edi_trial(const Measure& mu, const Measure& nu, double C, const Exponent& p, const EdiOptions& opt,
                      EdiTrial& t) {
  const auto s = relative_entropy(nu, mu);
  t.entropy_infinite = s.infinite;
  t.entropy = s.infinite ? std::numeric_limits<double>::infinity() : s.value;
  if (s.infinite) {
    t.status = EdiTrial::Status::Pass;
    t.bound = std::numeric_limits<double>::infinity();
    t.slack = std::numeric_limits<double>::infinity();
    return;
  }
  t.bound = std::sqrt(2.0 * C * s.value);
  if (opt.use_coupling_side) {
    const auto c = q_p(mu, nu, p);
    t.distance_lower = c.value_lower;
    t.distance_upper = c.value_upper;
  } else {
    const auto c = d_p(mu, nu, p);
    t.distance_lower = c.value;
    t.distance_upper = c.value_upper;
  }
  t.slack = t.bound - t.distance_upper;
  if (t.distance_upper <= t.bound + opt.tol) {
    t.status = EdiTrial::Status::Pass;
  } else if (t.distance_lower > t.bound + opt.tol) {
    t.status = EdiTrial::Status::Violation;
  } else {
    t.status = EdiTrial::Status::Undecided;
  }
}

}  // namespace detail

/// D_p(nu, mu) <= sqrt(2 C s(nu|mu)) over sampled nu.
inline EdiReport edi_check(const Measure& mu, double C, const Exponent& p, std::size_t trials, std::uint64_t seed,
                           const EdiOptions& opt = {}) {
  if (!(C > 0.0)) throw std::domain_error("constant must be positive");
  EdiReport r;
  r.C = C;
  r.p = p;
  std::size_t id = 0;
  auto record = [&](EdiTrial t) {
    if (t.status == EdiTrial::Status::Violation) ++r.violations;
    if (t.status == EdiTrial::Status::Undecided) ++r.undecided;
    r.trials.push_back(std::move(t));
  };
  for (std::size_t k = 0; k < trials; ++k, ++id) {
    Rng rng(derive_seed(seed, k));
    EdiTrial t;
    t.trial = id;
    const auto nu = sample_nu(mu, rng, k, t.kind);
    detail::edi_trial(mu, nu, C, p, opt, t);
    record(std::move(t));
  }
  for (const auto& g : opt.tilt_directions) {
    for (double beta : {1e-3, 1e-2, 0.05, 0.1, 0.3, 1.0}) {
      EdiTrial t;
      t.trial = id++;
      t.kind = "witness-tilt";
      detail::edi_trial(mu, tilt(mu, g.scaled(beta)), C, p, opt, t);
      record(std::move(t));
    }
  }
  return r;
}

struct CharacterizationReport {
  double C = 0.0;
  std::vector<EdiReport> per_volume;
  std::size_t violations = 0, undecided = 0;
  std::size_t cooccurring = 0;  // violations whose tilted witness also breaks GCB

  bool passed() const { return violations == 0 && undecided == 0; }

  nlohmann::json to_json() const {
    auto vols = nlohmann::json::array();
    for (const auto& r : per_volume) vols.push_back(r.to_json());
    return {{"C", C}, {"violations", violations}, {"undecided", undecided}, {"cooccurring", cooccurring},
            {"volumes", vols}};
  }
};

/// Q_2(mu, nu) <= sqrt(2 C s(nu|mu)) on several volumes; for each violation the
/// function f = (D / C) * witness is run through gcb_check, which must fail.
inline CharacterizationReport characterization_check(const ProcessSpec& spec, double C, const std::vector<Volume>& volumes,
                                                     std::size_t trials, std::uint64_t seed, bool witness_tilts = true) {
  CharacterizationReport out;
  out.C = C;
  const Exponent two(2);
  for (std::size_t v = 0; v < volumes.size(); ++v) {
    const auto mu = realize(spec, volumes[v]);
    EdiOptions opt;
    opt.use_coupling_side = true;
    if (witness_tilts) {
      const auto oc = optimal_constant(mu, two, 2, derive_seed(seed, 1000 + v));
      if (!oc.degenerate) opt.tilt_directions.push_back(oc.witness.scaled(1.0 / std::max(oc.scale, 1e-12)));
    }
    auto rep = edi_check(mu, C, two, trials, derive_seed(seed, v), opt);
    // re-create the sampled laws to test co-occurrence
    for (auto& t : rep.trials) {
      if (t.status != EdiTrial::Status::Violation) continue;
      Measure nu;
      if (t.trial < trials) {
        Rng rng(derive_seed(derive_seed(seed, v), t.trial));
        std::string lbl;
        nu = sample_nu(mu, rng, t.trial, lbl);
      } else {
        const std::size_t j = t.trial - trials;
        const double betas[] = {1e-3, 1e-2, 0.05, 0.1, 0.3, 1.0};
        nu = tilt(mu, opt.tilt_directions[j / 6].scaled(betas[j % 6]));
      }
      const auto d = d_p(mu, nu, two);
      const auto f = d.witness.scaled(d.value / C);
      const auto g = gcb_check(mu, C, two, {{"tilted-witness", f}});
      t.gcb_cooccurs = !g.passed();
      if (t.gcb_cooccurs) ++out.cooccurring;
    }
    out.violations += rep.violations;
    out.undecided += rep.undecided;
    out.per_volume.push_back(std::move(rep));
  }
  return out;
}

struct EtuveReport {
  std::size_t trials = 0, violations = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  bool passed() const { return violations == 0; }
  nlohmann::json to_json() const {
    return {{"trials", trials}, {"violations", violations}, {"min_slack", min_slack}};
  }
};

inline bool is_product(const Measure& mu, double tol = 1e-12) {
  const auto& sp = mu.space();
  std::vector<std::vector<double>> laws;
  for (const auto& s : sp.volume().sites()) laws.push_back(marginal(mu, Volume({s})).probs());
  return product(sp, laws).same_table(mu, tol);
}

/// min_Pi sum_i m_i^2 <= (1/2) s(nu|mu) for product mu.
inline EtuveReport etuve_check(const Measure& mu, std::size_t trials, std::uint64_t seed) {
  if (!is_product(mu)) throw std::domain_error("entropy-transport check needs a product measure");
  EtuveReport r;
  const Exponent two(2);
  for (std::size_t k = 0; k < trials; ++k) {
    Rng rng(derive_seed(seed, k));
    std::string lbl;
    const auto nu = sample_nu(mu, rng, k, lbl);
    const auto s = relative_entropy(nu, mu);
    ++r.trials;
    if (s.infinite) continue;
    const double q = q_p(mu, nu, two).value_upper;
    const double slack = 0.5 * s.value - q * q;
    r.min_slack = std::min(r.min_slack, slack);
    if (slack < -1e-8) ++r.violations;
  }
  return r;
}

// ---- pressure ----

struct FiniteNPressure {
  int n = 0;                   // number of translates
  double value = 0.0;          // (1/n) log mu(exp(sum of translates))
  double lo = 0.0, hi = 0.0;   // enclosure implied by the transfer operator
};

struct PressureValue {
  double value = 0.0;
  double lower = 0.0, upper = 0.0;  // Collatz-Wielandt bracket of log lambda
  std::string method = "transfer-operator";
  std::vector<FiniteNPressure> finite_n;
  bool finite_n_consistent = true;

  nlohmann::json to_json() const {
    auto fn = nlohmann::json::array();
    for (const auto& r : finite_n) fn.push_back({{"n", r.n}, {"value", r.value}, {"lo", r.lo}, {"hi", r.hi}});
    return {{"value", value}, {"lower", lower}, {"upper", upper}, {"method", method}, {"finite_n", fn},
            {"finite_n_consistent", finite_n_consistent}};
  }
};

namespace detail {

inline std::vector<std::vector<double>> kernel_of(const ProcessSpec& spec) {
  if (auto* s = std::get_if<IidSpec>(&spec)) {
    check_law(s->law, "single-site law");
    return std::vector<std::vector<double>>(s->law.size(), s->law);
  }
  if (auto* s = std::get_if<MarkovSpec>(&spec)) {
    validate(*s);
    return s->P;
  }
  throw std::domain_error("pressure needs an iid or markov specification");
}

}  // namespace detail

/// Pressure p(f | mu) = log of the Perron root of the block transfer matrix,
/// cross-checked against brute-force finite-n values for n in [n_lo, n_hi].
inline PressureValue pressure(const ProcessSpec& spec, const LocalFunction& f, int n_lo = 8, int n_hi = 14) {
  const auto& vol = f.space().volume();
  if (!vol.is_interval()) throw std::domain_error("pressure needs f on a d = 1 interval");
  const auto P = detail::kernel_of(spec);
  const std::size_t k = P.size();
  if (static_cast<int>(k) != f.space().alphabet()) throw std::domain_error("alphabet mismatch");
  for (const auto& row : P) {
    double s = 0.0;
    for (double v : row) s += v;
    if (!(s > 0.0)) throw std::domain_error("zero transition row");
  }
  const std::size_t r = vol.size();
  const ConfigSpace& bs = f.space();  // block states, little-endian: digit 0 = leftmost site
  const std::size_t B = bs.size();
  // T(w, w') = 1{w' shifts w} P(w_{r-1}, w'_{r-1}) exp(f(w'))
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(B));
  const double shift = f.max();
  for (std::size_t w = 0; w < B; ++w) {
    const std::size_t tail_part = w / static_cast<std::size_t>(bs.alphabet());  // drop the leftmost digit
    const int last = bs.symbol(w, r - 1);
    for (std::size_t a = 0; a < k; ++a) {
      const std::size_t w2 = tail_part + a * bs.stride(r - 1);
      T(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(w2)) = P[static_cast<std::size_t>(last)][a] * std::exp(f[w2] - shift);
    }
  }
  // power iteration on T + I, Collatz-Wielandt bracket on T
  Eigen::VectorXd v = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(B));
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200000; ++it) {
    Eigen::VectorXd tv = T * v;
    double cl = std::numeric_limits<double>::infinity(), ch = 0.0;
    for (Eigen::Index i = 0; i < tv.size(); ++i) {
      const double ratio = tv(i) / v(i);
      cl = std::min(cl, ratio);
      ch = std::max(ch, ratio);
    }
    lo = std::max(lo, cl);
    hi = std::min(hi, ch);
    if (hi - lo <= 1e-12 * hi) break;
    v = tv + v;
    v /= v.maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (!(v(i) > 0.0)) throw SolverError("pressure: transfer matrix is not irreducible");
  }
  if (!(hi - lo <= 1e-10 * hi)) throw SolverError("pressure: power iteration did not converge");
  PressureValue out;
  out.lower = std::log(lo) + shift;
  out.upper = std::log(hi) + shift;
  out.value = std::log(0.5 * (lo + hi)) + shift;

  // brute-force finite-n values; Z_n = a^T T^{n-1} 1 with a(w) = mu(w) e^{f(w)}
  const Measure block_law = realize(spec, Volume::interval(0, static_cast<int>(r) - 1));
  double av = 0.0;  // a^T v with the shift removed
  double vmin = std::numeric_limits<double>::infinity(), vmax = 0.0;
  for (std::size_t w = 0; w < B; ++w) {
    av += block_law[w] * std::exp(f[w] - shift) * v(static_cast<Eigen::Index>(w));
    vmin = std::min(vmin, v(static_cast<Eigen::Index>(w)));
    vmax = std::max(vmax, v(static_cast<Eigen::Index>(w)));
  }
  for (int n = n_lo; n <= n_hi; ++n) {
    const Measure law = realize(spec, Volume::interval(0, n + static_cast<int>(r) - 2));
    const auto& sp = law.space();
    std::vector<double> expo(sp.size(), 0.0);
    double emax = -std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < sp.size(); ++x) {
      if (law[x] == 0.0) continue;
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        std::size_t w = 0;
        for (std::size_t t = 0; t < r; ++t) w += static_cast<std::size_t>(sp.symbol(x, static_cast<std::size_t>(j) + t)) * bs.stride(t);
        s += f[w];
      }
      expo[x] = s;
      emax = std::max(emax, s);
    }
    double z = 0.0;
    for (std::size_t x = 0; x < sp.size(); ++x)
      if (law[x] != 0.0) z += law[x] * std::exp(expo[x] - emax);
    FiniteNPressure row;
    row.n = n;
    row.value = (std::log(z) + emax) / n;
    // log Z_n - n log lambda in [log(av / vmax) - log lambda, log(av / vmin) - log lambda]
    const double nl_lo = std::log(lo) + shift, nl_hi = std::log(hi) + shift;
    row.lo = ((n - 1) * nl_lo + std::log(av / vmax) + shift) / n;
    row.hi = ((n - 1) * nl_hi + std::log(av / vmin) + shift) / n;
    if (row.value < row.lo - 1e-10 || row.value > row.hi + 1e-10) out.finite_n_consistent = false;
    out.finite_n.push_back(row);
  }
  return out;
}

struct ThermoGcbRow {
  std::string id;
  double pressure_centered = 0.0;  // p(f - mu f | mu)
  double bound = 0.0;              // (C/2) ||delta f||_1^2
  double finite_n_max = 0.0;       // max over tested n of the centered finite-n value
  bool strong_ok = true, weak_ok = true, finite_n_consistent = true;
};

struct ThermoGcbReport {
  double C = 0.0;
  std::vector<ThermoGcbRow> rows;
  bool passed() const {
    return std::all_of(rows.begin(), rows.end(),
                       [](const ThermoGcbRow& r) { return r.strong_ok && r.weak_ok && r.finite_n_consistent; });
  }
  nlohmann::json to_json() const {
    auto a = nlohmann::json::array();
    for (const auto& r : rows)
      a.push_back({{"id", r.id}, {"pressure_centered", r.pressure_centered}, {"bound", r.bound},
                   {"finite_n_max", r.finite_n_max}, {"strong_ok", r.strong_ok}, {"weak_ok", r.weak_ok},
                   {"finite_n_consistent", r.finite_n_consistent}});
    return {{"C", C}, {"passed", passed()}, {"rows", a}};
  }
};

/// p(f - mu f | mu) <= (C/2) ||delta f||_1^2, plus the finite-n (weak) form.
inline ThermoGcbReport thermo_gcb_check(const ProcessSpec& spec, double C, const std::vector<NamedFunction>& suite) {
  ThermoGcbReport rep;
  rep.C = C;
  for (const auto& nf : suite) {
    const auto pv = pressure(spec, nf.f);
    const double mean = expectation(realize(spec, nf.f.space().volume()), nf.f);
    const double osc = osc_norm(nf.f, Exponent(1));
    ThermoGcbRow row;
    row.id = nf.id;
    row.pressure_centered = pv.upper - mean;
    row.bound = 0.5 * C * osc * osc;
    row.strong_ok = row.pressure_centered <= row.bound + 1e-8;
    row.finite_n_max = -std::numeric_limits<double>::infinity();
    for (const auto& r : pv.finite_n) row.finite_n_max = std::max(row.finite_n_max, r.value - mean);
    row.weak_ok = row.finite_n_max <= row.bound + 1e-8;
    row.finite_n_consistent = pv.finite_n_consistent;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace kanto
