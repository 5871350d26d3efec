#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace pca {

/// Every precondition or data error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Spin = std::int8_t;

inline bool is_spin(int s) { return s == 1 || s == -1; }

/// log(cosh(x)) without overflow.
inline double log_cosh(double x) {
  const double a = std::fabs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

/// Probability of spin s under the two-point law p(s) = e^{s x} / (2 cosh x).
///
/// The smaller of the two probabilities is evaluated directly and the larger one
/// as its complement, so p(+1) + p(-1) == 1 holds exactly in floating point.
inline double spin_prob(int s, double x) {
  if (x == 0.0) return 0.5;
  const double e = std::exp(-2.0 * std::fabs(x));
  const double small = e / (1.0 + e);
  const double big = 1.0 - small;
  return ((s > 0) == (x > 0.0)) ? big : small;
}

/// log of spin_prob(s, x), accurate for any |x|.
inline double log_spin_prob(int s, double x) {
  const double a = std::fabs(x);
  return s * x - a - std::log1p(std::exp(-2.0 * a));
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based uniform source: u(step, site) is a pure function of
/// (seed, step, site), so trajectories do not depend on evaluation order.
class CounterUniform {
 public:
  explicit CounterUniform(std::uint64_t seed) : key_(splitmix64(seed ^ 0x5ca1ab1e0ddba11ULL)) {}

  double operator()(std::uint64_t step, std::size_t site) const {
    std::uint64_t x = splitmix64(key_ ^ splitmix64(step + 0x632be59bd9b4e019ULL));
    x = splitmix64(x ^ (static_cast<std::uint64_t>(site) * 0xd1342543de82ef95ULL));
    return static_cast<double>(x >> 11) * 0x1.0p-53;
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

/// Runs fn(i) for i in [0, n), split into contiguous chunks over `workers` threads.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  const std::size_t w = std::min<std::size_t>(std::max(1u, workers), n);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(w);
  const std::size_t chunk = (n + w - 1) / w;
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

}  // namespace pca
