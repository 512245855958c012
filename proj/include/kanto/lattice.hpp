#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kanto/exponent.hpp"

namespace kanto {

/// Raised when an exact-mode state space would exceed the enumeration cap.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxStates = std::size_t{1} << 20;

struct Site {
  std::vector<int> coords;

  Site() = default;
  explicit Site(std::vector<int> c) : coords(std::move(c)) {
    if (coords.empty()) throw std::domain_error("site needs at least one coordinate");
  }
  Site(std::initializer_list<int> c) : Site(std::vector<int>(c)) {}

  std::size_t dim() const { return coords.size(); }

  Site operator+(const Site& o) const {
    if (o.dim() != dim()) throw std::domain_error("site dimension mismatch");
    Site r = *this;
    for (std::size_t k = 0; k < dim(); ++k) r.coords[k] += o.coords[k];
    return r;
  }

  auto operator<=>(const Site&) const = default;
  bool operator==(const Site&) const = default;
};

/// Finite subset of Z^d held in lexicographic order without duplicates.
class Volume {
 public:
  Volume() = default;

  explicit Volume(std::vector<Site> sites) : sites_(std::move(sites)) {
    std::sort(sites_.begin(), sites_.end());
    sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
    if (!sites_.empty()) {
      dim_ = sites_.front().dim();
      for (const auto& s : sites_) {
        if (s.dim() != dim_) throw std::domain_error("mixed site dimensions in volume");
      }
    }
  }

  /// Lambda_n = [-n, n]^d.
  static Volume cube(std::size_t d, int n) {
    if (d == 0 || n < 0) throw std::domain_error("cube needs d >= 1 and n >= 0");
    std::vector<Site> out;
    std::vector<int> c(d, -n);
    while (true) {
      out.emplace_back(c);
      std::size_t k = d;
      while (k > 0) {
        --k;
        if (c[k] < n) {
          ++c[k];
          for (std::size_t j = k + 1; j < d; ++j) c[j] = -n;
          break;
        }
        if (k == 0) return Volume(std::move(out));
      }
    }
  }

  /// {a, a+1, ..., b} in d = 1.
  static Volume interval(int a, int b) {
    if (b < a) throw std::domain_error("empty interval");
    std::vector<Site> out;
    for (int i = a; i <= b; ++i) out.push_back(Site{i});
    return Volume(std::move(out));
  }

  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  std::size_t dim() const { return dim_; }
  const std::vector<Site>& sites() const { return sites_; }
  const Site& operator[](std::size_t k) const { return sites_[k]; }

  std::optional<std::size_t> index_of(const Site& s) const {
    auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
    if (it == sites_.end() || *it != s) return std::nullopt;
    return static_cast<std::size_t>(it - sites_.begin());
  }

  bool contains(const Site& s) const { return index_of(s).has_value(); }

  bool contains(const Volume& o) const {
    return std::all_of(o.sites_.begin(), o.sites_.end(), [&](const Site& s) { return contains(s); });
  }

  /// True when the volume is {a, ..., b} in one dimension.
  bool is_interval() const {
    if (dim_ != 1 || sites_.empty()) return false;
    return sites_.back().coords[0] - sites_.front().coords[0] + 1 == static_cast<int>(sites_.size());
  }

  Volume translated(const Site& shift) const {
    std::vector<Site> out;
    out.reserve(sites_.size());
    for (const auto& s : sites_) out.push_back(s + shift);
    return Volume(std::move(out));
  }

  Volume united(const Volume& o) const {
    auto all = sites_;
    all.insert(all.end(), o.sites_.begin(), o.sites_.end());
    return Volume(std::move(all));
  }

  bool operator==(const Volume&) const = default;

 private:
  std::vector<Site> sites_;
  std::size_t dim_ = 0;
};

/// S^Lambda with S = {0, ..., k-1}; states ranked mixed-radix, little-endian
/// in volume order (site 0 is the fastest digit).
class ConfigSpace {
 public:
  ConfigSpace() = default;

  ConfigSpace(Volume volume, int alphabet) : volume_(std::move(volume)), k_(alphabet) {
    if (k_ < 2) throw std::domain_error("alphabet needs at least two symbols");
    std::size_t n = 1;
    strides_.reserve(volume_.size());
    for (std::size_t s = 0; s < volume_.size(); ++s) {
      strides_.push_back(n);
      if (n > kMaxStates / static_cast<std::size_t>(k_)) {
        throw CapacityError("state space " + std::to_string(k_) + "^" +
                            std::to_string(volume_.size()) + " exceeds 2^20");
      }
      n *= static_cast<std::size_t>(k_);
    }
    size_ = n;
  }

  const Volume& volume() const { return volume_; }
  int alphabet() const { return k_; }
  std::size_t sites() const { return volume_.size(); }
  std::size_t size() const { return size_; }
  std::size_t stride(std::size_t pos) const { return strides_[pos]; }

  std::size_t rank(std::span<const int> config) const {
    if (config.size() != volume_.size()) throw std::domain_error("configuration does not cover the volume");
    std::size_t r = 0;
    for (std::size_t s = 0; s < config.size(); ++s) {
      if (config[s] < 0 || config[s] >= k_) throw std::domain_error("symbol out of range");
      r += static_cast<std::size_t>(config[s]) * strides_[s];
    }
    return r;
  }

  std::vector<int> unrank(std::size_t index) const {
    if (index >= size_) throw std::domain_error("index out of range");
    std::vector<int> c(volume_.size());
    for (std::size_t s = 0; s < c.size(); ++s) {
      c[s] = static_cast<int>(index % static_cast<std::size_t>(k_));
      index /= static_cast<std::size_t>(k_);
    }
    return c;
  }

  int symbol(std::size_t index, std::size_t pos) const {
    return static_cast<int>((index / strides_[pos]) % static_cast<std::size_t>(k_));
  }

  /// Index with the symbol at position pos replaced by a.
  std::size_t with_symbol(std::size_t index, std::size_t pos, int a) const {
    const int cur = symbol(index, pos);
    return index + (static_cast<std::size_t>(a) - static_cast<std::size_t>(cur)) * strides_[pos];
  }

  std::size_t hamming(std::size_t x, std::size_t y) const {
    std::size_t d = 0;
    for (std::size_t s = 0; s < volume_.size(); ++s) {
      if (x % static_cast<std::size_t>(k_) != y % static_cast<std::size_t>(k_)) ++d;
      x /= static_cast<std::size_t>(k_);
      y /= static_cast<std::size_t>(k_);
    }
    return d;
  }

  std::size_t position(const Site& s) const {
    auto idx = volume_.index_of(s);
    if (!idx) throw std::domain_error("site outside the volume");
    return *idx;
  }

  bool operator==(const ConfigSpace& o) const { return k_ == o.k_ && volume_ == o.volume_; }

 private:
  Volume volume_;
  int k_ = 2;
  std::size_t size_ = 1;
  std::vector<std::size_t> strides_;
};

/// Spin value of symbol a in a k-letter alphabet, spread evenly over [-1, 1].
inline double spin(int a, int k) { return k == 2 ? 2.0 * a - 1.0 : 2.0 * a / (k - 1) - 1.0; }

class LocalFunction {
 public:
  LocalFunction() = default;

  LocalFunction(ConfigSpace space, std::vector<double> values)
      : space_(std::move(space)), values_(std::move(values)) {
    if (values_.size() != space_.size()) throw std::domain_error("table size does not match the space");
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::domain_error("local function entries must be finite");
    }
  }

  static LocalFunction constant(const ConfigSpace& space, double c) {
    return LocalFunction(space, std::vector<double>(space.size(), c));
  }

  /// Tabulates fn(config) where config holds one symbol per volume site.
  static LocalFunction from(const ConfigSpace& space, const std::function<double(std::span<const int>)>& fn) {
    std::vector<double> v(space.size());
    std::vector<int> c(space.sites(), 0);
    for (std::size_t x = 0; x < space.size(); ++x) {
      v[x] = fn(c);
      for (std::size_t s = 0; s < c.size(); ++s) {
        if (++c[s] < space.alphabet()) break;
        c[s] = 0;
      }
    }
    return LocalFunction(space, std::move(v));
  }

  const ConfigSpace& space() const { return space_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t x) const { return values_[x]; }

  LocalFunction scaled(double a) const {
    auto v = values_;
    for (double& x : v) x *= a;
    return LocalFunction(space_, std::move(v));
  }

  LocalFunction plus(const LocalFunction& o) const {
    if (!(o.space_ == space_)) throw std::domain_error("space mismatch");
    auto v = values_;
    for (std::size_t x = 0; x < v.size(); ++x) v[x] += o.values_[x];
    return LocalFunction(space_, std::move(v));
  }

  LocalFunction shifted_by(double c) const {
    auto v = values_;
    for (double& x : v) x += c;
    return LocalFunction(space_, std::move(v));
  }

  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double min() const { return *std::min_element(values_.begin(), values_.end()); }

 private:
  ConfigSpace space_;
  std::vector<double> values_;
};

/// delta_i f at the position pos of the volume (absolute form).
inline double oscillation_at(const LocalFunction& f, std::size_t pos) {
  const auto& sp = f.space();
  if (pos >= sp.sites()) throw std::domain_error("site position out of range");
  const std::size_t stride = sp.stride(pos);
  const std::size_t k = static_cast<std::size_t>(sp.alphabet());
  double best = 0.0;
  for (std::size_t x = 0; x < sp.size(); ++x) {
    if (sp.symbol(x, pos) != 0) continue;
    double lo = f[x], hi = f[x];
    for (std::size_t a = 1; a < k; ++a) {
      const double v = f[x + a * stride];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    best = std::max(best, hi - lo);
  }
  return best;
}

inline double oscillation(const LocalFunction& f, const Site& i) {
  return oscillation_at(f, f.space().position(i));
}

inline std::vector<double> oscillations(const LocalFunction& f) {
  std::vector<double> d(f.space().sites());
  for (std::size_t s = 0; s < d.size(); ++s) d[s] = oscillation_at(f, s);
  return d;
}

inline double osc_norm(const LocalFunction& f, const Exponent& q) {
  q.require_at_least_one();
  const auto d = oscillations(f);
  return lp_norm(d, q);
}

/// Sites where f actually depends on the configuration.
inline Volume dependence_set(const LocalFunction& f) {
  std::vector<Site> out;
  const auto d = oscillations(f);
  for (std::size_t s = 0; s < d.size(); ++s) {
    if (d[s] > 0.0) out.push_back(f.space().volume()[s]);
  }
  return Volume(std::move(out));
}

/// Re-tabulates f (defined on a sub-volume translated by shift) over target.
/// The result at sigma is f evaluated at sigma restricted to shift + dom(f).
inline LocalFunction embed(const LocalFunction& f, const ConfigSpace& target, const Site& shift) {
  const auto& src = f.space();
  if (src.alphabet() != target.alphabet()) throw std::domain_error("alphabet mismatch");
  std::vector<std::size_t> pos(src.sites());
  for (std::size_t s = 0; s < src.sites(); ++s) {
    auto idx = target.volume().index_of(src.volume()[s] + shift);
    if (!idx) throw std::domain_error("shifted dependence set leaves the target volume");
    pos[s] = *idx;
  }
  std::vector<double> v(target.size());
  for (std::size_t x = 0; x < target.size(); ++x) {
    std::size_t y = 0;
    for (std::size_t s = 0; s < pos.size(); ++s) y += static_cast<std::size_t>(target.symbol(x, pos[s])) * src.stride(s);
    v[x] = f[y];
  }
  return LocalFunction(target, std::move(v));
}

inline LocalFunction embed(const LocalFunction& f, const ConfigSpace& target) {
  return embed(f, target, Site(std::vector<int>(f.space().volume().dim(), 0)));
}

/// T_{Lambda_n} f = sum over j in Lambda_n of tau_j f, tabulated on the union
/// of the shifted domains (Lambda_{n+r} when f lives on Lambda_r).
inline LocalFunction block_sum(const LocalFunction& f, int n) {
  const auto& vol = f.space().volume();
  const auto shifts = Volume::cube(vol.dim(), n);
  Volume target_vol;
  for (const auto& j : shifts.sites()) target_vol = target_vol.united(vol.translated(j));
  const ConfigSpace target(target_vol, f.space().alphabet());
  std::vector<double> v(target.size(), 0.0);
  for (const auto& j : shifts.sites()) {
    const auto g = embed(f, target, j);
    for (std::size_t x = 0; x < v.size(); ++x) v[x] += g[x];
  }
  return LocalFunction(target, std::move(v));
}

inline LocalFunction block_average(const LocalFunction& f, int n) {
  const auto shifts = Volume::cube(f.space().volume().dim(), n);
  return block_sum(f, n).scaled(1.0 / static_cast<double>(shifts.size()));
}

}  // namespace kanto
