#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "kanto/lattice.hpp"

namespace kanto {

inline constexpr double kProbFloor = 1e-300;

/// A nonnegative real or +infinity, with the infinite case carried as a flag.
struct ExtendedReal {
  double value = 0.0;
  bool infinite = false;

  static ExtendedReal inf() { return {0.0, true}; }
  bool is_finite() const { return !infinite; }
  double as_double() const { return infinite ? std::numeric_limits<double>::infinity() : value; }
};

class Measure {
 public:
  Measure() = default;

  Measure(ConfigSpace space, std::vector<double> probs) : space_(std::move(space)), probs_(std::move(probs)) {
    if (probs_.size() != space_.size()) throw std::domain_error("probability table size mismatch");
    double s = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw std::domain_error("probabilities must be finite and nonnegative");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-12) throw std::domain_error("probabilities sum to " + std::to_string(s));
  }

  /// Divides by the total mass before validating.
  static Measure normalized(ConfigSpace space, std::vector<double> weights) {
    double s = 0.0;
    for (double w : weights) s += w;
    if (!(s > 0.0) || !std::isfinite(s)) throw std::domain_error("weights have no positive finite mass");
    for (double& w : weights) w /= s;
    return Measure(std::move(space), std::move(weights));
  }

  static Measure uniform(const ConfigSpace& space) {
    return Measure(space, std::vector<double>(space.size(), 1.0 / static_cast<double>(space.size())));
  }

  static Measure dirac(const ConfigSpace& space, std::size_t x) {
    std::vector<double> p(space.size(), 0.0);
    p.at(x) = 1.0;
    return Measure(space, std::move(p));
  }

  const ConfigSpace& space() const { return space_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t x) const { return probs_[x]; }

  bool supported(std::size_t x) const { return probs_[x] > kProbFloor; }

  bool same_table(const Measure& o, double tol = 0.0) const {
    if (!(space_ == o.space_)) return false;
    for (std::size_t x = 0; x < probs_.size(); ++x) {
      if (std::abs(probs_[x] - o.probs_[x]) > tol) return false;
    }
    return true;
  }

 private:
  ConfigSpace space_;
  std::vector<double> probs_;
};

inline void require_same_space(const Measure& a, const Measure& b) {
  if (!(a.space() == b.space())) throw std::domain_error("measures live on different spaces");
}

inline void require_same_space(const Measure& a, const LocalFunction& f) {
  if (!(a.space() == f.space())) throw std::domain_error("function and measure live on different spaces");
}

/// Product of single-site laws, one per volume position.
inline Measure product(const ConfigSpace& space, const std::vector<std::vector<double>>& site_laws) {
  if (site_laws.size() != space.sites()) throw std::domain_error("one single-site law per site required");
  std::vector<double> p(space.size(), 1.0);
  for (std::size_t x = 0; x < p.size(); ++x) {
    for (std::size_t s = 0; s < space.sites(); ++s) p[x] *= site_laws[s].at(static_cast<std::size_t>(space.symbol(x, s)));
  }
  return Measure::normalized(space, std::move(p));
}

// ---- process specifications ----

struct IidSpec {
  std::vector<double> law;
};

struct MarkovSpec {
  std::vector<std::vector<double>> P;
  std::optional<std::vector<double>> initial;  // stationary law when absent
};

enum class Boundary { Free, Plus, Periodic };

struct IsingSpec {
  double beta = 0.0;
  double h = 0.0;
  Boundary boundary = Boundary::Free;
};

using ProcessSpec = std::variant<IidSpec, MarkovSpec, IsingSpec>;

inline int alphabet_of(const ProcessSpec& spec) {
  if (auto* s = std::get_if<IidSpec>(&spec)) return static_cast<int>(s->law.size());
  if (auto* s = std::get_if<MarkovSpec>(&spec)) return static_cast<int>(s->P.size());
  return 2;
}

inline void check_law(const std::vector<double>& p, const char* what) {
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::domain_error(std::string(what) + " has a negative or non-finite entry");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12) throw std::domain_error(std::string(what) + " does not sum to one");
}

inline void validate(const MarkovSpec& m) {
  const std::size_t k = m.P.size();
  if (k < 2) throw std::domain_error("markov chain needs at least two states");
  for (const auto& row : m.P) {
    if (row.size() != k) throw std::domain_error("transition matrix must be square");
    check_law(row, "transition row");
  }
  if (m.initial) {
    if (m.initial->size() != k) throw std::domain_error("initial law size mismatch");
    check_law(*m.initial, "initial law");
  }
}

/// Stationary law of P, computed by a direct linear solve.
inline std::vector<double> stationary(const MarkovSpec& m) {
  validate(m);
  const auto k = static_cast<Eigen::Index>(m.P.size());
  Eigen::MatrixXd A(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) A(i, j) = m.P[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] - (i == j ? 1.0 : 0.0);
  A.row(k - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  rhs(k - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (lu.rank() < k) throw std::domain_error("transition matrix has no unique stationary law");
  Eigen::VectorXd pi = lu.solve(rhs);
  std::vector<double> out(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    if (pi(i) <= 0.0) throw std::domain_error("stationary law is not strictly positive");
    out[static_cast<std::size_t>(i)] = pi(i);
  }
  double s = 0.0;
  for (double v : out) s += v;
  for (double& v : out) v /= s;
  return out;
}

inline std::vector<double> initial_law(const MarkovSpec& m) { return m.initial ? *m.initial : stationary(m); }

/// Exact finite-volume law of the process on the volume.
inline Measure realize(const ProcessSpec& spec, const Volume& volume) {
  if (volume.empty()) throw std::domain_error("empty volume");
  if (auto* s = std::get_if<IidSpec>(&spec)) {
    check_law(s->law, "single-site law");
    ConfigSpace space(volume, static_cast<int>(s->law.size()));
    return product(space, std::vector<std::vector<double>>(volume.size(), s->law));
  }
  if (auto* s = std::get_if<MarkovSpec>(&spec)) {
    validate(*s);
    if (!volume.is_interval()) throw std::domain_error("markov processes need a d = 1 interval");
    const auto init = initial_law(*s);
    ConfigSpace space(volume, static_cast<int>(s->P.size()));
    std::vector<double> p(space.size());
    for (std::size_t x = 0; x < p.size(); ++x) {
      int prev = space.symbol(x, 0);
      double w = init[static_cast<std::size_t>(prev)];
      for (std::size_t t = 1; t < space.sites() && w > 0.0; ++t) {
        const int cur = space.symbol(x, t);
        w *= s->P[static_cast<std::size_t>(prev)][static_cast<std::size_t>(cur)];
        prev = cur;
      }
      p[x] = w;
    }
    return Measure::normalized(space, std::move(p));
  }
  const auto& is = std::get<IsingSpec>(spec);
  if (!std::isfinite(is.beta) || !std::isfinite(is.h)) throw std::domain_error("ising parameters must be finite");
  if (is.boundary == Boundary::Periodic && volume.dim() != 1) throw std::domain_error("periodic boundary supported in d = 1 only");
  ConfigSpace space(volume, 2);
  const std::size_t n = volume.size();
  const std::size_t d = volume.dim();
  // bonds inside the volume and the count of outside neighbours per site
  std::vector<std::pair<std::size_t, std::size_t>> bonds;
  std::vector<int> outside(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t k = 0; k < d; ++k) {
      for (int dir : {-1, 1}) {
        Site nb = volume[a];
        nb.coords[k] += dir;
        auto b = volume.index_of(nb);
        if (!b) {
          ++outside[a];
        } else if (*b > a) {
          bonds.emplace_back(a, *b);
        }
      }
    }
  }
  if (is.boundary == Boundary::Periodic && n >= 3) bonds.emplace_back(0, n - 1);
  std::vector<double> logw(space.size());
  for (std::size_t x = 0; x < space.size(); ++x) {
    double e = 0.0;
    for (auto [a, b] : bonds) e += is.beta * spin(space.symbol(x, a), 2) * spin(space.symbol(x, b), 2);
    for (std::size_t a = 0; a < n; ++a) {
      const double s = spin(space.symbol(x, a), 2);
      e += is.h * s;
      if (is.boundary == Boundary::Plus) e += is.beta * outside[a] * s;
    }
    logw[x] = e;
  }
  const double mx = *std::max_element(logw.begin(), logw.end());
  for (double& v : logw) v = std::exp(v - mx);
  return Measure::normalized(space, std::move(logw));
}

/// Pushforward under restriction to sub.
inline Measure marginal(const Measure& m, const Volume& sub) {
  const auto& sp = m.space();
  if (!sp.volume().contains(sub) || sub.empty()) throw std::domain_error("marginal volume is not a subset of the domain");
  ConfigSpace target(sub, sp.alphabet());
  std::vector<std::size_t> pos(sub.size());
  for (std::size_t s = 0; s < sub.size(); ++s) pos[s] = sp.position(sub[s]);
  std::vector<double> p(target.size(), 0.0);
  for (std::size_t x = 0; x < sp.size(); ++x) {
    if (m[x] == 0.0) continue;
    std::size_t y = 0;
    for (std::size_t s = 0; s < pos.size(); ++s) y += static_cast<std::size_t>(sp.symbol(x, pos[s])) * target.stride(s);
    p[y] += m[x];
  }
  return Measure::normalized(target, std::move(p));
}

inline double expectation(const Measure& m, const LocalFunction& f) {
  require_same_space(m, f);
  double s = 0.0;
  for (std::size_t x = 0; x < m.size(); ++x) s += m[x] * f[x];
  return s;
}

/// s(nu | mu) in nats.
inline ExtendedReal relative_entropy(const Measure& nu, const Measure& mu) {
  require_same_space(nu, mu);
  double s = 0.0;
  for (std::size_t x = 0; x < nu.size(); ++x) {
    if (!nu.supported(x)) continue;
    if (!mu.supported(x)) return ExtendedReal::inf();
    s += nu[x] * std::log(nu[x] / mu[x]);
  }
  return {std::max(s, 0.0), false};
}

/// log of the mu-integral of exp(f - mu(f)).
inline double log_mgf(const Measure& mu, const LocalFunction& f) {
  require_same_space(mu, f);
  const double mean = expectation(mu, f);
  double hmax = -std::numeric_limits<double>::infinity();
  double habs = 0.0;
  for (std::size_t x = 0; x < mu.size(); ++x) {
    if (mu[x] == 0.0) continue;
    hmax = std::max(hmax, f[x] - mean);
    habs = std::max(habs, std::abs(f[x] - mean));
  }
  if (habs == 0.0) return 0.0;
  double out;
  if (habs <= 0.5) {
    double s = 0.0;
    for (std::size_t x = 0; x < mu.size(); ++x) {
      if (mu[x] != 0.0) s += mu[x] * std::expm1(f[x] - mean);
    }
    out = std::log1p(s);
  } else {
    double s = 0.0;
    for (std::size_t x = 0; x < mu.size(); ++x) {
      if (mu[x] != 0.0) s += mu[x] * std::exp(f[x] - mean - hmax);
    }
    out = hmax + std::log(s);
  }
  return std::max(out, 0.0);
}

/// log of the mu-integral of exp(f).
inline double log_partition(const Measure& mu, const LocalFunction& f) { return log_mgf(mu, f) + expectation(mu, f); }

/// Gibbs tilt nu proportional to exp(f) mu.
inline Measure tilt(const Measure& mu, const LocalFunction& f) {
  require_same_space(mu, f);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < mu.size(); ++x)
    if (mu[x] != 0.0) mx = std::max(mx, f[x]);
  std::vector<double> w(mu.size());
  for (std::size_t x = 0; x < mu.size(); ++x) w[x] = mu[x] == 0.0 ? 0.0 : mu[x] * std::exp(f[x] - mx);
  return Measure::normalized(mu.space(), std::move(w));
}

/// s(nu|mu) - (nu(f) - log mu(e^f)); infinite when nu is not absolutely continuous.
inline ExtendedReal entropy_variational_gap(const Measure& nu, const Measure& mu, const LocalFunction& f) {
  require_same_space(nu, mu);
  const auto s = relative_entropy(nu, mu);
  if (s.infinite) return ExtendedReal::inf();
  // nu(f - mu f) - log_mgf, written to avoid cancelling mu(f) twice
  const double mean = expectation(mu, f);
  double nu_centered = 0.0;
  for (std::size_t x = 0; x < nu.size(); ++x) nu_centered += nu[x] * (f[x] - mean);
  return {s.value - (nu_centered - log_mgf(mu, f)), false};
}

/// log mu(e^f) - (nu(f) - s(nu|mu)).
inline ExtendedReal legendre_gap(const Measure& mu, const LocalFunction& f, const Measure& nu) {
  require_same_space(nu, mu);
  const auto s = relative_entropy(nu, mu);
  if (s.infinite) return ExtendedReal::inf();
  const double mean = expectation(mu, f);
  double nu_centered = 0.0;
  for (std::size_t x = 0; x < nu.size(); ++x) nu_centered += nu[x] * (f[x] - mean);
  return {log_mgf(mu, f) - nu_centered + s.value, false};
}

// ---- JSON ----

inline nlohmann::json to_json(const Volume& v) {
  auto arr = nlohmann::json::array();
  for (const auto& s : v.sites()) arr.push_back(s.coords);
  return arr;
}

inline Volume volume_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw std::domain_error("volume must be a non-empty array of coordinate arrays");
  std::vector<Site> sites;
  for (const auto& c : j) sites.emplace_back(c.get<std::vector<int>>());
  return Volume(std::move(sites));
}

inline nlohmann::json to_json(const Measure& m) {
  return {{"alphabet", m.space().alphabet()}, {"volume", to_json(m.space().volume())}, {"probs", m.probs()}};
}

inline Measure measure_from_json(const nlohmann::json& j) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "alphabet" && it.key() != "volume" && it.key() != "probs")
      throw std::domain_error("unknown measure key: " + it.key());
  }
  ConfigSpace space(volume_from_json(j.at("volume")), j.at("alphabet").get<int>());
  return Measure(space, j.at("probs").get<std::vector<double>>());
}

}  // namespace kanto
