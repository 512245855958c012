#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace kanto {

/// SplitMix64 finalizer; derives independent stream seeds from (master, index).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// mt19937_64 with platform-independent uniform and normal draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// uniform on [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// uniform on (0, 1)
  double open_uniform() {
    double u;
    do u = uniform();
    while (u == 0.0);
    return u;
  }

  double exponential() { return -std::log(open_uniform()); }

  /// Box-Muller
  double normal() {
    const double u = open_uniform(), v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

  /// Dirichlet(1, ..., 1) on n points
  std::vector<double> flat_dirichlet(std::size_t n) {
    std::vector<double> w(n);
    double s = 0.0;
    for (double& v : w) s += (v = exponential());
    for (double& v : w) v /= s;
    return w;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace kanto
