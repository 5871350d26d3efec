#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include "pca/lattice.hpp"

namespace pca {

/// Exact law over all 2^|Lambda| configurations, indexed canonically.
struct Distribution {
  Box box;
  std::vector<double> p;

  Distribution() = default;
  Distribution(Box b, std::vector<double> probs) : box(std::move(b)), p(std::move(probs)) {
    if (box.size() >= 63 || p.size() != (std::size_t{1} << box.size()))
      throw Error("distribution size does not match 2^|box|");
  }

  static Distribution uniform(const Box& b) {
    const std::size_t n = std::size_t{1} << b.size();
    return Distribution(b, std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }
  static Distribution point_mass(const Box& b, std::size_t code) {
    std::vector<double> p(std::size_t{1} << b.size(), 0.0);
    p.at(code) = 1.0;
    return Distribution(b, std::move(p));
  }

  std::size_t states() const { return p.size(); }
  double operator[](std::size_t k) const { return p[k]; }
  double sum() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
  }
  bool strictly_positive() const {
    return std::all_of(p.begin(), p.end(), [](double v) { return v > 0.0; });
  }
};

/// Normalizes unnormalized log-weights with a max shift.
inline Distribution normalize_log_weights(const Box& box, const std::vector<double>& logw) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : logw) mx = std::max(mx, v);
  std::vector<double> p(logw.size());
  double z = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) z += (p[k] = std::exp(logw[k] - mx));
  for (double& v : p) v /= z;
  return Distribution(box, std::move(p));
}

inline double total_variation(const Distribution& a, const Distribution& b) {
  if (a.states() != b.states()) throw Error("distributions have different sizes");
  double s = 0.0;
  for (std::size_t k = 0; k < a.states(); ++k) s += std::fabs(a[k] - b[k]);
  return 0.5 * s;
}

inline double max_abs_diff(const Distribution& a, const Distribution& b) {
  if (a.states() != b.states()) throw Error("distributions have different sizes");
  double m = 0.0;
  for (std::size_t k = 0; k < a.states(); ++k) m = std::max(m, std::fabs(a[k] - b[k]));
  return m;
}

/// CSV rows (config_index, probability).
inline void write_csv(std::ostream& os, const Distribution& d) {
  const auto old = os.precision(17);
  os << "config_index,probability\n";
  for (std::size_t k = 0; k < d.states(); ++k) os << k << ',' << d[k] << '\n';
  os.precision(old);
}

}  // namespace pca
