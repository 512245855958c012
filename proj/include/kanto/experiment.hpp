#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "kanto/counterexamples.hpp"
#include "kanto/gcb.hpp"
#include "kanto/ipm.hpp"
#include "kanto/thermo.hpp"

namespace kanto {

/// Malformed or inconsistent configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::json;

// ---- rounding and csv ----

inline double round_sig(double v, int digits = 12) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

/// Rounds every floating-point leaf to 12 significant digits.
inline void round_json(Json& j) {
  if (j.is_number_float()) {
    j = round_sig(j.get<double>());
  } else if (j.is_structured()) {
    for (auto& e : j) round_json(e);
  }
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : cols_(header.size()) { row_strings(header); }

  template <class... T>
  void row(const T&... v) {
    if (sizeof...(v) != cols_) throw std::logic_error("csv row width mismatch");
    std::vector<std::string> cells{cell(v)...};
    row_strings(cells);
  }

  const std::string& str() const { return text_; }
  static std::string format(double v) { return cell(v); }

 private:
  std::size_t cols_;
  std::string text_;

  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(bool b) { return b ? "1" : "0"; }
  static std::string cell(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
  }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I v) {
    return std::to_string(v);
  }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }
};

// ---- config parsing ----

namespace cfg {

inline void only_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

inline const Json& need(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return j.at(key);
}

inline double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + ": expected a finite number");
  return v;
}

inline double number_or(const Json& j, const char* key, double dflt, const std::string& where) {
  return j.contains(key) ? number(j.at(key), where + "." + key) : dflt;
}

inline long long integer(const Json& j, const std::string& where, long long lo = 0) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  const auto v = j.get<long long>();
  if (v < lo) throw ConfigError(where + ": must be >= " + std::to_string(lo));
  return v;
}

inline long long integer_or(const Json& j, const char* key, long long dflt, const std::string& where, long long lo = 0) {
  return j.contains(key) ? integer(j.at(key), where + "." + key, lo) : dflt;
}

inline bool boolean_or(const Json& j, const char* key, bool dflt, const std::string& where) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_boolean()) throw ConfigError(where + "." + key + ": expected a boolean");
  return j.at(key).get<bool>();
}

inline std::string string_or(const Json& j, const char* key, const std::string& dflt, const std::string& where,
                             std::initializer_list<const char*> choices) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_string()) throw ConfigError(where + "." + key + ": expected a string");
  auto s = j.at(key).get<std::string>();
  for (const char* c : choices)
    if (s == c) return s;
  throw ConfigError(where + "." + key + ": unsupported value '" + s + "'");
}

inline Exponent exponent(const Json& j, const std::string& where) {
  try {
    if (j.is_string()) return Exponent::parse(j.get<std::string>());
    if (j.is_number_integer()) return Exponent(j.get<long long>(), 1);
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": exponent must be an integer or a string such as \"3/2\" or \"inf\"");
}

inline std::vector<Exponent> exponents(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a nonempty array");
  std::vector<Exponent> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto p = exponent(j[i], where + "[" + std::to_string(i) + "]");
    try {
      p.require_at_least_one();
    } catch (const std::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
    out.push_back(p);
  }
  return out;
}

inline std::vector<long long> integers(const Json& j, const std::string& where, long long lo) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a nonempty array");
  std::vector<long long> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(integer(j[i], where + "[" + std::to_string(i) + "]", lo));
  return out;
}

inline std::vector<double> law(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() < 2) throw ConfigError(where + ": expected at least two probabilities");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where));
  return out;
}

inline ProcessSpec process(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const auto& t = need(j, "type", where);
  if (!t.is_string()) throw ConfigError(where + ".type: expected a string");
  const auto type = t.get<std::string>();
  ProcessSpec spec;
  if (type == "iid") {
    only_keys(j, {"type", "law"}, where);
    spec = IidSpec{law(need(j, "law", where), where + ".law")};
  } else if (type == "markov") {
    only_keys(j, {"type", "P", "initial"}, where);
    const auto& P = need(j, "P", where);
    if (!P.is_array()) throw ConfigError(where + ".P: expected a matrix");
    MarkovSpec m;
    for (const auto& row : P) m.P.push_back(law(row, where + ".P"));
    if (j.contains("initial")) m.initial = law(j.at("initial"), where + ".initial");
    spec = m;
  } else if (type == "ising") {
    only_keys(j, {"type", "beta", "h", "boundary"}, where);
    IsingSpec s;
    s.beta = number(need(j, "beta", where), where + ".beta");
    s.h = number_or(j, "h", 0.0, where);
    const auto b = string_or(j, "boundary", "free", where, {"free", "plus", "periodic"});
    s.boundary = b == "free" ? Boundary::Free : b == "plus" ? Boundary::Plus : Boundary::Periodic;
    spec = s;
  } else {
    throw ConfigError(where + ".type: unknown process type '" + type + "'");
  }
  try {
    realize(spec, Volume::interval(0, 0));
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return spec;
}

}  // namespace cfg

// ---- experiments ----

struct ExperimentResult {
  std::string name, kind;
  bool passed = true;
  Json tolerances = Json::object();
  Json details = Json::object();
  std::vector<std::string> failures;            // human-readable assertion failures
  std::map<std::string, std::string> csv;       // file suffix -> contents ("" is the main file)

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      failures.push_back(what);
    }
  }

  Json to_json() const {
    return {{"name", name}, {"kind", kind}, {"passed", passed}, {"tolerances", tolerances},
            {"failures", failures}, {"details", details}};
  }
};

struct Experiment {
  std::string name, kind;
  Json params;  // validated
  std::size_t index = 0;
};

namespace detail {

inline Measure random_law(const ConfigSpace& sp, Rng& rng, bool sparse) {
  auto w = rng.flat_dirichlet(sp.size());
  if (sparse)
    for (double& v : w)
      if (rng.uniform() < 0.3) v = 0.0;
  double s = 0.0;
  for (double v : w) s += v;
  if (s <= 0.0) w[rng.index(w.size())] = 1.0;
  return Measure::normalized(sp, std::move(w));
}

inline ExperimentResult run_duality(const Experiment& e, std::uint64_t seed, bool dry = false) {
  ExperimentResult r;
  const Json& j = e.params;
  const auto where = e.name;
  const auto ks = j.contains("alphabets") ? cfg::integers(j["alphabets"], where + ".alphabets", 2) : std::vector<long long>{2, 3};
  const auto sizes = j.contains("sizes") ? cfg::integers(j["sizes"], where + ".sizes", 1) : std::vector<long long>{1, 2, 3};
  const auto ps = j.contains("exponents") ? cfg::exponents(j["exponents"], where + ".exponents")
                                          : std::vector<Exponent>{Exponent(1), Exponent(3, 2), Exponent(2), Exponent(5),
                                                                  Exponent::infinity()};
  const auto instances = static_cast<std::size_t>(cfg::integer_or(j, "instances", 200, where, 1));
  const double tol = cfg::number_or(j, "tolerance", 1e-6, where);
  const bool sparse = cfg::string_or(j, "sampler", "dirichlet", where, {"dirichlet", "mixed"}) == "mixed";
  r.tolerances = {{"gap", tol}, {"hamming_w1", 1e-8}};
  if (dry) return r;
  Csv csv({"instance", "alphabet", "sites", "p", "q_upper", "q_lower", "d_lower", "d_upper", "gap"});
  double max_gap = 0.0, max_w1 = 0.0;
  std::size_t unconverged = 0, solves = 0;
  const std::size_t combos = ks.size() * sizes.size();
  for (std::size_t i = 0; i < instances; ++i) {
    const int k = static_cast<int>(ks[i % combos % ks.size()]);
    const int sites = static_cast<int>(sizes[i % combos / ks.size()]);
    const ConfigSpace sp(Volume::interval(0, sites - 1), k);
    Rng rng(derive_seed(seed, i));
    const auto mu = random_law(sp, rng, sparse && i % 2 == 1);
    const auto nu = random_law(sp, rng, sparse && i % 3 == 1);
    for (const auto& p : ps) {
      const auto rep = duality_gap(mu, nu, p);
      ++solves;
      if (!rep.primal.converged || !rep.dual.converged) ++unconverged;
      max_gap = std::max(max_gap, rep.gap);
      if (p.is_one()) {
        const double w1 = hamming_w1(mu, nu);
        max_w1 = std::max({max_w1, std::abs(w1 - rep.primal.value_upper), std::abs(w1 - rep.dual.value)});
      }
      csv.row(i, k, sites, p.to_string(), rep.primal.value_upper, rep.primal.value_lower, rep.dual.value,
              rep.dual.value_upper, rep.gap);
    }
  }
  r.details = {{"instances", instances}, {"solves", solves}, {"max_gap", max_gap}, {"max_w1_discrepancy", max_w1},
               {"unconverged", unconverged}};
  r.require(max_gap <= tol, "duality gap above tolerance");
  r.require(max_w1 <= 1e-8, "hamming W1 disagrees with Q_1 or D_1");
  r.require(unconverged == 0, "some solves did not reach their tolerance");
  r.csv[""] = csv.str();
  return r;
}

inline std::string expect_of(const Json& j, const std::string& where) {
  return cfg::string_or(j, "expect", "pass", where, {"pass", "violation"});
}

inline ExperimentResult run_gcb(const Experiment& e, std::uint64_t seed, bool dry = false) {
  ExperimentResult r;
  const Json& j = e.params;
  const auto& where = e.name;
  const auto spec = cfg::process(cfg::need(j, "process", where), where + ".process");
  const auto sizes = j.contains("sizes") ? cfg::integers(j["sizes"], where + ".sizes", 1) : std::vector<long long>{1, 2, 3};
  const double C = cfg::number(cfg::need(j, "C", where), where + ".C");
  if (!(C > 0.0)) throw ConfigError(where + ".C: must be positive");
  const auto q = j.contains("q") ? cfg::exponent(j["q"], where + ".q") : Exponent(2);
  const auto randoms = static_cast<std::size_t>(cfg::integer_or(j, "random_functions", 8, where));
  const bool with_opt = cfg::boolean_or(j, "optimal_constant", false, where);
  const auto restarts = static_cast<std::size_t>(cfg::integer_or(j, "restarts", 4, where, 1));
  // diagnostic: every suite function is also checked at beta * f
  std::vector<double> betas{1.0};
  if (j.contains("beta_sweep")) {
    const auto& b = j["beta_sweep"];
    if (!b.is_array() || b.empty()) throw ConfigError(where + ".beta_sweep: expected a nonempty array");
    betas.clear();
    for (std::size_t k = 0; k < b.size(); ++k) {
      const double v = cfg::number(b[k], where + ".beta_sweep");
      if (!(v > 0.0)) throw ConfigError(where + ".beta_sweep: entries must be positive");
      betas.push_back(v);
    }
  }
  const auto expect = expect_of(j, where);
  r.tolerances = {{"gcb", kGcbTol}};
  if (dry) return r;
  Csv csv({"sites", "function", "lhs", "rhs", "ok"});
  std::size_t violations = 0;
  Json per = Json::array();
  for (std::size_t v = 0; v < sizes.size(); ++v) {
    const auto mu = realize(spec, Volume::interval(0, static_cast<int>(sizes[v]) - 1));
    auto suite = standard_suite(mu.space(), derive_seed(seed, v), randoms);
    Json entry = {{"sites", sizes[v]}};
    if (with_opt) {
      const auto oc = optimal_constant(mu, q, restarts, derive_seed(seed, 100 + v));
      entry["optimal_constant_lower"] = oc.C_lower;
      if (!oc.degenerate) suite.push_back({"optimal-witness", oc.witness});
    }
    if (betas.size() != 1 || betas[0] != 1.0) {
      std::vector<NamedFunction> swept;
      for (double b : betas)
        for (const auto& nf : suite) swept.push_back({nf.id + "@beta=" + Csv::format(b), nf.f.scaled(b)});
      suite = std::move(swept);
    }
    const auto rep = gcb_check(mu, C, q, suite);
    for (const auto& nf : suite) {
      const double lhs = log_mgf(mu, nf.f);
      const double o = osc_norm(nf.f, q);
      const double rhs = 0.5 * C * o * o;
      csv.row(sizes[v], nf.id, lhs, rhs, lhs <= rhs + kGcbTol);
    }
    violations += rep.violations.size();
    entry["report"] = rep.to_json();
    per.push_back(entry);
  }
  r.details = {{"expect", expect}, {"violations", violations}, {"volumes", per}};
  if (expect == "pass")
    r.require(violations == 0, "concentration bound violated");
  else
    r.require(violations > 0, "expected a violating function, none found");
  r.csv[""] = csv.str();
  return r;
}

inline ExperimentResult run_edi(const Experiment& e, std::uint64_t seed, bool dry = false) {
  ExperimentResult r;
  const Json& j = e.params;
  const auto& where = e.name;
  const auto spec = cfg::process(cfg::need(j, "process", where), where + ".process");
  const auto sizes = j.contains("sizes") ? cfg::integers(j["sizes"], where + ".sizes", 1) : std::vector<long long>{1, 2, 3, 4};
  const double C = cfg::number(cfg::need(j, "C", where), where + ".C");
  if (!(C > 0.0)) throw ConfigError(where + ".C: must be positive");
  const auto p = j.contains("p") ? cfg::exponent(j["p"], where + ".p") : Exponent(2);
  const auto trials = static_cast<std::size_t>(cfg::integer_or(j, "trials", 500, where));
  const bool coupling = cfg::string_or(j, "side", "ipm", where, {"ipm", "coupling"}) == "coupling";
  const bool tilts = cfg::boolean_or(j, "witness_tilts", true, where);
  const bool characterize = cfg::boolean_or(j, "characterization", p == Exponent(2), where);
  if (characterize && !(p == Exponent(2))) throw ConfigError(where + ".characterization: needs p = 2");
  const auto expect = expect_of(j, where);
  EdiOptions base;
  r.tolerances = {{"edi", base.tol}};
  if (dry) return r;
  Csv csv({"sites", "trial", "kind", "entropy", "distance_lower", "distance_upper", "bound", "status"});
  std::size_t violations = 0, undecided = 0, cooccur = 0, char_violations = 0;
  Json per = Json::array();
  std::vector<Volume> vols;
  for (std::size_t v = 0; v < sizes.size(); ++v) {
    const Volume vol = Volume::interval(0, static_cast<int>(sizes[v]) - 1);
    vols.push_back(vol);
    const auto mu = realize(spec, vol);
    EdiOptions opt;
    opt.use_coupling_side = coupling;
    if (tilts) {
      const auto oc = optimal_constant(mu, p.conjugate(), 2, derive_seed(seed, 1000 + v));
      if (!oc.degenerate) opt.tilt_directions.push_back(oc.witness.scaled(1.0 / std::max(oc.scale, 1e-12)));
    }
    const auto rep = edi_check(mu, C, p, trials, derive_seed(seed, v), opt);
    for (const auto& t : rep.trials)
      csv.row(sizes[v], t.trial, t.kind, t.entropy, t.distance_lower, t.distance_upper, t.bound, status_name(t.status));
    violations += rep.violations;
    undecided += rep.undecided;
    per.push_back({{"sites", sizes[v]}, {"report", rep.to_json()}});
    if (!rep.violation_csv().empty() && rep.violations > 0) r.csv["_violations_" + std::to_string(sizes[v])] = rep.violation_csv();
  }
  Json ch;
  if (characterize) {
    const auto c = characterization_check(spec, C, vols, trials, derive_seed(seed, 7), tilts);
    cooccur = c.cooccurring;
    char_violations = c.violations;
    ch = c.to_json();
  }
  r.details = {{"expect", expect}, {"side", coupling ? "coupling" : "ipm"}, {"violations", violations},
               {"undecided", undecided}, {"volumes", per}};
  if (characterize) r.details["characterization"] = ch;
  if (expect == "pass") {
    r.require(violations == 0, "entropy-distance inequality violated");
    r.require(undecided == 0, "undecided trials remain");
    if (characterize) r.require(char_violations == 0, "coupling-side inequality violated");
  } else {
    r.require(violations > 0, "expected a violating law, none found");
    if (characterize) r.require(cooccur == char_violations, "a violation without a matching concentration failure");
  }
  r.csv[""] = csv.str();
  return r;
}

inline ExperimentResult run_thermo(const Experiment& e, std::uint64_t, bool dry = false) {
  ExperimentResult r;
  const Json& j = e.params;
  const auto& where = e.name;
  const auto a = cfg::process(cfg::need(j, "a", where), where + ".a");
  const auto b = cfg::process(cfg::need(j, "b", where), where + ".b");
  if (alphabet_of(a) != alphabet_of(b)) throw ConfigError(where + ": processes use different alphabets");
  const auto ps = j.contains("exponents") ? cfg::exponents(j["exponents"], where + ".exponents")
                                          : std::vector<Exponent>{Exponent(1), Exponent(3, 2), Exponent(2), Exponent::infinity()};
  const int n_max = static_cast<int>(cfg::integer(cfg::need(j, "n_max", where), where + ".n_max"));
  const double tol = cfg::number_or(j, "tolerance", 0.02, where);
  ThermoOptions opt;
  opt.max_states = static_cast<std::size_t>(cfg::integer_or(j, "max_states", 4096, where, 1));
  if (opt.max_states > kMaxStates) throw ConfigError(where + ".max_states: above the state cap");
  const bool superadd = cfg::boolean_or(j, "superadditivity", true, where);
  const int sa_n = static_cast<int>(cfg::integer_or(j, "superadditivity_n", std::min(n_max, 3), where));
  const bool entropy = cfg::boolean_or(j, "entropy", true, where);
  const bool has_expected = j.contains("expected_normalized");
  const double expected = has_expected ? cfg::number(j["expected_normalized"], where + ".expected_normalized") : 0.0;
  const bool has_averse = j.contains("averse_C");
  const double averse_C = has_averse ? cfg::number(j["averse_C"], where + ".averse_C") : 0.0;
  if (has_averse && !(averse_C > 0.0)) throw ConfigError(where + ".averse_C: must be positive");
  r.tolerances = {{"p_spread", tol}, {"superadditivity", 1e-6}, {"p_monotonicity", 1e-6}, {"d_inf_monotone", 1e-8}};
  if (has_expected) r.tolerances["expected_normalized"] = 1e-6;
  if (dry) return r;

  const auto rep = p_independence_check(a, b, ps, n_max, tol, opt);
  Csv csv({"p", "n", "volume", "raw", "normalized", "lower", "upper"});
  for (const auto& s : rep.sequences)
    for (const auto& pt : s.points) {
      const double scale = volume_power(pt.volume, s.p);
      const double lower = std::max(pt.q_lower, pt.d_value);
      csv.row(s.p.to_string(), pt.n, pt.volume, pt.q_upper, pt.normalized, lower / scale, pt.q_upper / scale);
    }
  r.details["p_independence"] = rep.to_json();
  r.require(rep.within_tolerance, "final spread across exponents above tolerance");
  r.require(!rep.sequences.front().truncated || !rep.sequences.front().points.empty(), "no cube fits the state cap");

  // normalized monotonicity in p, bracket-wise
  std::vector<std::size_t> order(ps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return ps[x] < ps[y]; });
  double worst_p = 0.0, worst_inf = 0.0, worst_expected = 0.0;
  for (std::size_t t = 0; t + 1 < order.size(); ++t) {
    const auto& lo = rep.sequences[order[t]];
    const auto& hi = rep.sequences[order[t + 1]];
    for (std::size_t i = 0; i < std::min(lo.points.size(), hi.points.size()); ++i) {
      const double l = std::max(lo.points[i].q_lower, lo.points[i].d_value) / volume_power(lo.points[i].volume, lo.p);
      worst_p = std::max(worst_p, l - hi.points[i].normalized);
    }
  }
  for (const auto& s : rep.sequences) {
    if (s.p.is_infinite())
      for (std::size_t i = 1; i < s.points.size(); ++i)
        worst_inf = std::max(worst_inf, s.points[i - 1].d_value - s.points[i].q_upper);
    if (has_expected)
      for (const auto& pt : s.points)
        worst_expected = std::max({worst_expected, std::abs(pt.normalized - expected), std::abs(pt.normalized_d - expected)});
  }
  r.details["p_monotonicity_excess"] = worst_p;
  r.details["d_inf_decrease"] = worst_inf;
  r.require(worst_p <= 1e-6, "normalized values decrease in p");
  r.require(worst_inf <= 1e-8, "D_inf decreases along cubes");
  if (has_expected) {
    r.details["expected_normalized"] = expected;
    r.details["max_expected_deviation"] = worst_expected;
    r.require(worst_expected <= 1e-6, "normalized values differ from the expected constant");
  }

  if (superadd) {
    Csv sc({"p", "n", "split", "whole", "left", "right", "excess", "ok"});
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& p : ps)
      for (bool use_d : {false, true})
        for (const auto& row : superadditivity_check(a, b, p, sa_n, use_d)) {
          sc.row(p.to_string() + (use_d ? "-D" : "-Q"), row.n, row.split, row.whole, row.left, row.right, row.excess, row.ok);
          worst = std::min(worst, row.excess);
        }
    if (std::isfinite(worst)) r.details["superadditivity_min_excess"] = worst;
    r.require(worst >= -1e-6, "superadditivity violated");
    r.csv["_superadditivity"] = sc.str();
  }
  if (entropy) {
    const auto ed = entropy_density(a, b, n_max);
    r.details["entropy_density"] = ed.to_json();
  }
  if (has_averse) {
    const auto av = averse_check(a, b, averse_C, n_max, opt.max_states);
    r.details["averse"] = av.to_json();
    r.require(av.passed(), "d-bar exceeds the entropy bound");
  }
  r.csv[""] = csv.str();
  return r;
}

inline ExperimentResult run_dbar(const Experiment& e, std::uint64_t seed, bool dry = false) {
  ExperimentResult r;
  const Json& j = e.params;
  const auto& where = e.name;
  const auto a = cfg::process(cfg::need(j, "a", where), where + ".a");
  const auto b = cfg::process(cfg::need(j, "b", where), where + ".b");
  if (alphabet_of(a) != alphabet_of(b)) throw ConfigError(where + ": processes use different alphabets");
  const int n_max = static_cast<int>(cfg::integer(cfg::need(j, "n_max", where), where + ".n_max"));
  DbarOptions opt;
  opt.steps = static_cast<std::size_t>(cfg::integer_or(j, "steps", 1000000, where));
  opt.burn_in = static_cast<std::size_t>(cfg::integer_or(j, "burn_in", 10000, where));
  opt.batches = static_cast<std::size_t>(cfg::integer_or(j, "batches", 1000, where, 2));
  opt.max_states = static_cast<std::size_t>(cfg::integer_or(j, "max_states", 4096, where, 1));
  const bool has_expected = j.contains("expected");
  const double expected = has_expected ? cfg::number(j["expected"], where + ".expected") : 0.0;
  const double max_hw = cfg::number_or(j, "max_half_width", 1e-3, where);
  r.tolerances = {{"half_width", max_hw}, {"margin_half_widths", 3}};
  if (dry) return r;
  const auto s = dbar_sandwich(a, b, n_max, seed, opt);
  r.details = s.to_json();
  r.require(s.consistent, "lower bound exceeds the coupling estimate");
  if (s.has_upper) r.require(s.half_width <= max_hw, "Monte Carlo half-width above the limit");
  if (has_expected) {
    r.tolerances["lower_vs_expected"] = 1e-6;
    r.details["expected"] = expected;
    r.require(std::abs(s.lower - expected) <= 1e-6, "lower bound differs from the expected value");
    if (s.has_upper)
      r.require(std::abs(s.upper - expected) <= 3.0 * s.half_width + 1e-12, "coupling estimate outside the margin");
  }
  Csv csv({"lower", "lower_n", "upper", "half_width", "steps", "batches", "consistent"});
  csv.row(s.lower, s.lower_n, s.upper, s.half_width, s.steps, s.batches, s.consistent);
  r.csv[""] = csv.str();
  return r;
}

inline ExperimentResult run_pressure(const Experiment& e, std::uint64_t seed, bool dry = false) {
  ExperimentResult r;
  const Json& j = e.params;
  const auto& where = e.name;
  const auto spec = cfg::process(cfg::need(j, "process", where), where + ".process");
  if (std::holds_alternative<IsingSpec>(spec)) throw ConfigError(where + ".process: pressure needs iid or markov");
  const double C = cfg::number(cfg::need(j, "C", where), where + ".C");
  const auto count = static_cast<std::size_t>(cfg::integer_or(j, "functions", 20, where, 1));
  const bool has_spot = j.contains("spot_check_expected");
  const double spot = has_spot ? cfg::number(j["spot_check_expected"], where + ".spot_check_expected") : 0.0;
  r.tolerances = {{"pressure_bound", 1e-8}};
  if (dry) return r;
  const auto suite = finite_range_suite(alphabet_of(spec), count, seed);
  const auto rep = thermo_gcb_check(spec, C, suite);
  Csv csv({"function", "pressure_centered", "bound", "finite_n_max", "strong_ok", "weak_ok"});
  for (const auto& row : rep.rows)
    csv.row(row.id, row.pressure_centered, row.bound, row.finite_n_max, row.strong_ok, row.weak_ok);
  r.details = rep.to_json();
  r.require(rep.passed(), "pressure exceeds the concentration bound");
  if (has_spot) {
    const int k = alphabet_of(spec);
    const ConfigSpace sp(Volume::interval(0, 0), k);
    const auto f = LocalFunction::from(sp, [&](std::span<const int> c) { return spin(c[0], k); });
    const auto pv = pressure(spec, f);
    const double centered = pv.value - expectation(realize(spec, sp.volume()), f);
    const double o = osc_norm(f, Exponent(1));
    r.tolerances["spot_check"] = 1e-9;
    r.details["spot_check"] = {{"value", centered}, {"expected", spot}, {"bound", 0.5 * C * o * o}};
    r.require(std::abs(centered - spot) <= 1e-9, "spot check value differs");
    r.require(centered <= 0.5 * C * o * o + 1e-12, "spot check exceeds its bound");
  }
  r.csv[""] = csv.str();
  return r;
}

inline ExperimentResult run_counterexample(const Experiment& e, std::uint64_t, bool dry = false) {
  ExperimentResult r;
  const Json& j = e.params;
  const auto& where = e.name;
  const auto Ls = j.contains("L_grid") ? cfg::integers(j["L_grid"], where + ".L_grid", 1)
                                       : std::vector<long long>{1, 2, 3, 4, 10, 100, 1000, 10000};
  for (auto L : Ls)
    if (L > kDattesCap) throw ConfigError(where + ".L_grid: L above the binomial cap");
  const long long exhaustive_max = cfg::integer_or(j, "exhaustive_max", 4, where);
  if (exhaustive_max > 4) throw ConfigError(where + ".exhaustive_max: at most 4");
  std::vector<std::pair<long long, double>> gates;
  if (j.contains("ratio_gates")) {
    if (!j["ratio_gates"].is_array()) throw ConfigError(where + ".ratio_gates: expected an array");
    for (const auto& g : j["ratio_gates"]) {
      cfg::only_keys(g, {"L", "min"}, where + ".ratio_gates");
      gates.emplace_back(cfg::integer(cfg::need(g, "L", where), where + ".ratio_gates.L", 1),
                         cfg::number(cfg::need(g, "min", where), where + ".ratio_gates.min"));
    }
  }
  const bool has_lip = j.contains("lip_cost");
  int n_max = 0, k = 2;
  std::vector<Exponent> ps{Exponent(3, 2), Exponent(2), Exponent::infinity()};
  if (has_lip) {
    const auto& lc = j["lip_cost"];
    cfg::only_keys(lc, {"n_max", "exponents", "k"}, where + ".lip_cost");
    n_max = static_cast<int>(cfg::integer(cfg::need(lc, "n_max", where), where + ".lip_cost.n_max"));
    k = static_cast<int>(cfg::integer_or(lc, "k", 2, where + ".lip_cost", 2));
    if (lc.contains("exponents")) ps = cfg::exponents(lc["exponents"], where + ".lip_cost.exponents");
    for (const auto& p : ps)
      if (p.is_one()) throw ConfigError(where + ".lip_cost.exponents: p must exceed 1");
  }
  for (const auto& g : gates)
    if (std::find(Ls.begin(), Ls.end(), g.first) == Ls.end()) throw ConfigError(where + ".ratio_gates: L not in the grid");
  r.tolerances = {{"lip2_bound", 4.0}, {"exhaustive", 1e-12}, {"lip_cost_gap", 1e-9}};
  if (dry) return r;
  Csv csv({"L", "lip2", "log_moment", "ratio_to_L_quarter", "mcdiarmid_rhs", "implied_K"});
  std::map<long long, McDiarmidRecord> recs;
  double worst_exh = 0.0;
  bool lip_ok = true, mc_ok = true;
  for (auto L : Ls) {
    const auto rec = mcdiarmid_contrast(L);
    recs[L] = rec;
    csv.row(L, rec.lip2, rec.log_moment, rec.ratio_to_L_quarter, rec.mcdiarmid_rhs, rec.implied_K);
    lip_ok = lip_ok && rec.lip2 <= 4.0;
    mc_ok = mc_ok && rec.mcdiarmid_holds;
    if (L <= exhaustive_max) worst_exh = std::max(worst_exh, std::abs(dattes_lip2_exhaustive(L) - rec.lip2));
  }
  bool increasing = true;
  for (auto it = std::next(recs.begin()); it != recs.end() && recs.size() > 1; ++it)
    increasing = increasing && it->second.log_moment > std::prev(it)->second.log_moment;
  for (const auto& [L, lo] : gates) {
    r.require(recs[L].ratio_to_L_quarter >= lo, "log-moment ratio below the gate at L=" + std::to_string(L));
  }
  r.details = {{"lip2_bounded", lip_ok}, {"exhaustive_max_discrepancy", worst_exh}, {"log_moment_increasing", increasing},
               {"mcdiarmid_holds", mc_ok}};
  Json gj = Json::array();
  for (const auto& [L, lo] : gates) gj.push_back({{"L", L}, {"min", lo}, {"ratio", recs[L].ratio_to_L_quarter}});
  r.details["ratio_gates"] = gj;
  r.require(lip_ok, "Lip_2 above 4");
  r.require(worst_exh <= 1e-12, "reduced and exhaustive Lip_2 disagree");
  r.require(increasing, "log-moment not strictly increasing");
  r.require(mc_ok, "McDiarmid bound fails");
  r.csv[""] = csv.str();

  if (has_lip) {
    Csv lcsv({"p", "n", "volume", "osc_norm", "extreme_gap", "closed_form", "enumerated"});
    double worst = 0.0;
    bool grows = true;
    for (const auto& p : ps) {
      double prev = -1.0;
      for (int n = 0; n <= n_max; ++n) {
        const auto g = lip_cost_gap(n, p, k);
        const double closed = volume_power(g.volume, p.conjugate());
        worst = std::max({worst, std::abs(g.extreme_gap - closed), std::max(0.0, g.osc_norm - 1.0)});
        if (g.extreme_gap <= prev) grows = false;
        prev = g.extreme_gap;
        lcsv.row(p.to_string(), n, g.volume, g.osc_norm, g.extreme_gap, closed, g.enumerated);
      }
    }
    r.details["lip_cost_max_discrepancy"] = worst;
    r.details["lip_cost_grows"] = grows;
    r.require(worst <= 1e-9, "lip_cost_gap differs from |Lambda|^{1/q}");
    r.require(grows, "extreme gap does not grow with n");
    r.csv["_lip_cost"] = lcsv.str();
  }
  return r;
}

inline const std::map<std::string, std::vector<const char*>>& allowed_keys() {
  static const std::map<std::string, std::vector<const char*>> m = {
      {"duality", {"alphabets", "sizes", "exponents", "instances", "tolerance", "sampler"}},
      {"gcb", {"process", "sizes", "C", "q", "random_functions", "optimal_constant", "restarts", "beta_sweep", "expect"}},
      {"edi", {"process", "sizes", "C", "p", "trials", "side", "witness_tilts", "characterization", "expect"}},
      {"thermo", {"a", "b", "exponents", "n_max", "tolerance", "max_states", "superadditivity", "superadditivity_n",
                  "entropy", "expected_normalized", "averse_C"}},
      {"dbar", {"a", "b", "n_max", "steps", "burn_in", "batches", "max_states", "expected", "max_half_width"}},
      {"pressure", {"process", "C", "functions", "spot_check_expected"}},
      {"counterexample", {"L_grid", "exhaustive_max", "ratio_gates", "lip_cost"}},
  };
  return m;
}

}  // namespace detail

inline ExperimentResult run_experiment(const Experiment& e, std::uint64_t master_seed, bool dry = false) {
  const std::uint64_t seed = derive_seed(master_seed, e.index);
  ExperimentResult r;
  if (e.kind == "duality") r = detail::run_duality(e, seed, dry);
  else if (e.kind == "gcb") r = detail::run_gcb(e, seed, dry);
  else if (e.kind == "edi") r = detail::run_edi(e, seed, dry);
  else if (e.kind == "thermo") r = detail::run_thermo(e, seed, dry);
  else if (e.kind == "dbar") r = detail::run_dbar(e, seed, dry);
  else if (e.kind == "pressure") r = detail::run_pressure(e, seed, dry);
  else if (e.kind == "counterexample") r = detail::run_counterexample(e, seed, dry);
  else throw ConfigError("unknown experiment kind '" + e.kind + "'");
  r.name = e.name;
  r.kind = e.kind;
  return r;
}

struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir;
  std::vector<Experiment> experiments;
};

/// Structural validation of the whole file. Parameter values are validated
/// again by each runner, which raises ConfigError before producing output.
inline RunConfig parse_config(const Json& j) {
  cfg::only_keys(j, {"seed", "output_dir", "experiments"}, "config");
  RunConfig rc;
  rc.seed = static_cast<std::uint64_t>(cfg::integer(cfg::need(j, "seed", "config"), "config.seed"));
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw ConfigError("config.output_dir: expected a string");
    rc.output_dir = j["output_dir"].get<std::string>();
  }
  const auto& ex = cfg::need(j, "experiments", "config");
  if (!ex.is_array() || ex.empty()) throw ConfigError("config.experiments: expected a nonempty array");
  std::set<std::string> names;
  for (std::size_t i = 0; i < ex.size(); ++i) {
    const auto& e = ex[i];
    const std::string where = "config.experiments[" + std::to_string(i) + "]";
    if (!e.is_object()) throw ConfigError(where + ": expected an object");
    const auto& kind = cfg::need(e, "kind", where);
    const auto& name = cfg::need(e, "name", where);
    if (!kind.is_string() || !name.is_string()) throw ConfigError(where + ": name and kind must be strings");
    Experiment x;
    x.kind = kind.get<std::string>();
    x.name = name.get<std::string>();
    x.index = i;
    if (x.name.empty() || x.name.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") != std::string::npos)
      throw ConfigError(where + ".name: use letters, digits, '_' or '-'");
    if (!names.insert(x.name).second) throw ConfigError(where + ".name: duplicate '" + x.name + "'");
    const auto& keys = detail::allowed_keys();
    auto it = keys.find(x.kind);
    if (it == keys.end()) throw ConfigError(where + ".kind: unknown kind '" + x.kind + "'");
    std::set<std::string> ok(it->second.begin(), it->second.end());
    ok.insert("name");
    ok.insert("kind");
    for (auto kv = e.begin(); kv != e.end(); ++kv)
      if (!ok.count(kv.key())) throw ConfigError(where + ": unknown key '" + kv.key() + "'");
    x.params = e;
    x.params.erase("name");
    x.params.erase("kind");
    rc.experiments.push_back(std::move(x));
  }
  for (const auto& x : rc.experiments) run_experiment(x, rc.seed, true);
  return rc;
}

/// Summary document; floats rounded so identical inputs give identical bytes.
inline Json summarize(const RunConfig& rc, const std::vector<ExperimentResult>& results) {
  Json out = {{"seed", rc.seed}, {"passed", true}, {"experiments", Json::array()}};
  for (const auto& r : results) {
    out["experiments"].push_back(r.to_json());
    if (!r.passed) out["passed"] = false;
  }
  round_json(out);
  return out;
}

}  // namespace kanto
