#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kanto {

/// An exponent in [1, +inf], held either as a positive rational or as the
/// infinity sentinel. Infinity is never approximated by a large finite value.
class Exponent {
 public:
  constexpr Exponent() = default;

  Exponent(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) {
    if (den_ <= 0 || num_ <= 0) {
      throw std::domain_error("exponent must be a positive rational");
    }
    const auto g = std::gcd(num_, den_);
    num_ /= g;
    den_ /= g;
  }

  static Exponent infinity() {
    Exponent e;
    e.infinite_ = true;
    e.num_ = 1;
    e.den_ = 0;
    return e;
  }

  /// Accepts "2", "3/2", "1.5", "inf", "infinity".
  static Exponent parse(std::string_view text);

  bool is_infinite() const { return infinite_; }
  std::int64_t numerator() const { return num_; }
  std::int64_t denominator() const { return den_; }

  double value() const {
    return infinite_ ? std::numeric_limits<double>::infinity()
                     : static_cast<double>(num_) / static_cast<double>(den_);
  }

  /// 1/p + 1/q = 1.
  Exponent conjugate() const {
    if (infinite_) return Exponent(1);
    if (num_ == den_) return infinity();
    return Exponent(num_, num_ - den_);
  }

  bool is_one() const { return !infinite_ && num_ == den_; }

  /// Throws unless p >= 1.
  const Exponent& require_at_least_one() const {
    if (!infinite_ && num_ < den_) {
      throw std::domain_error("exponent must be >= 1, got " + to_string());
    }
    return *this;
  }

  std::string to_string() const {
    if (infinite_) return "inf";
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  friend bool operator==(const Exponent& a, const Exponent& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

  friend bool operator<(const Exponent& a, const Exponent& b) {
    if (a.infinite_) return false;
    if (b.infinite_) return true;
    return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
  }

 private:
  std::int64_t num_ = 1;
  std::int64_t den_ = 1;
  bool infinite_ = false;
};

inline Exponent Exponent::parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text == "inf" || text == "infinity" || text == "Inf" || text == "INF") {
    return infinity();
  }
  auto parse_int = [&](std::string_view s) -> std::int64_t {
    s = trim(s);
    if (s.empty() || s.size() > 15) throw std::domain_error("bad exponent: " + std::string(text));
    std::int64_t v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') throw std::domain_error("bad exponent: " + std::string(text));
      v = v * 10 + (c - '0');
    }
    return v;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    return Exponent(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    auto whole = text.substr(0, dot);
    auto frac = text.substr(dot + 1);
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const std::int64_t w = whole.empty() ? 0 : parse_int(whole);
    const std::int64_t f = frac.empty() ? 0 : parse_int(frac);
    return Exponent(w * den + f, den);
  }
  return Exponent(parse_int(text));
}

/// (sum |x_i|^p)^{1/p}, or max |x_i| for p = inf.
inline double lp_norm(std::span<const double> x, const Exponent& p) {
  if (p.is_infinite()) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
  }
  if (p.is_one()) {
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return s;
  }
  // scale by the max entry to avoid under/overflow for large p
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m == 0.0) return 0.0;
  const double pv = p.value();
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v) / m, pv);
  return m * std::pow(s, 1.0 / pv);
}

/// |Lambda|^{1/p}, with the p = inf convention |Lambda|^0 = 1.
inline double volume_power(std::size_t volume_size, const Exponent& p) {
  if (p.is_infinite()) return 1.0;
  return std::pow(static_cast<double>(volume_size), 1.0 / p.value());
}

}  // namespace kanto
