#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pca/lattice.hpp"

namespace pca {

/// Finite-range symmetric coupling k(.) on Z^d.
class CouplingKernel {
 public:
  CouplingKernel() = default;

  /// Fails unless k(o) == k(-o) for every stored offset.
  CouplingKernel(std::size_t dim, std::map<Site, double> weights) : dim_(dim) {
    if (dim == 0) throw Error("kernel dimension must be at least 1");
    for (const auto& [o, w] : weights) {
      if (o.dim() != dim) throw Error("kernel offset " + o.str() + " has wrong dimension");
      if (!std::isfinite(w)) throw Error("kernel weight at " + o.str() + " is not finite");
    }
    for (const auto& [o, w] : weights) {
      auto it = weights.find(-o);
      const double mirror = it == weights.end() ? 0.0 : it->second;
      if (mirror != w) throw Error("kernel is not symmetric at offset " + o.str());
      if (w != 0.0) weights_.emplace(o, w);
    }
  }

  /// Fills in k(-o) from k(o); conflicting explicit entries are an error.
  static CouplingKernel symmetric_completion(std::size_t dim, const std::map<Site, double>& given) {
    std::map<Site, double> full = given;
    for (const auto& [o, w] : given) {
      auto [it, inserted] = full.emplace(-o, w);
      if (!inserted && it->second != w) throw Error("conflicting kernel weights at " + o.str() + " and its mirror");
    }
    return CouplingKernel(dim, std::move(full));
  }

  /// Range-1 planar kernel with k(0), k(+-e1), k(+-e2).
  static CouplingKernel nearest_neighbour(double k0, double k1, double k2) {
    return symmetric_completion(2, {{Site{0, 0}, k0}, {Site{1, 0}, k1}, {Site{0, 1}, k2}});
  }

  static CouplingKernel zero(std::size_t dim) { return CouplingKernel(dim, {}); }

  std::size_t dim() const { return dim_; }

  double at(const Site& offset) const {
    auto it = weights_.find(offset);
    return it == weights_.end() ? 0.0 : it->second;
  }

  /// Nonzero entries only.
  const std::map<Site, double>& support() const { return weights_; }

  /// Smallest R with k(i) = 0 whenever |i| > R.
  int range(DistanceNorm norm = DistanceNorm::sup) const {
    int r = 0;
    for (const auto& [o, w] : weights_) r = std::max(r, integer_norm(o, norm));
    return r;
  }

  /// B = sum_j k(j).
  double total() const {
    double b = 0.0;
    for (const auto& [o, w] : weights_) b += w;
    return b;
  }

  bool all_nonnegative() const {
    for (const auto& [o, w] : weights_)
      if (w < 0) return false;
    return true;
  }
  bool all_nonpositive() const {
    for (const auto& [o, w] : weights_)
      if (w > 0) return false;
    return true;
  }

  std::string str() const {
    std::ostringstream os;
    os.precision(12);
    bool first = true;
    for (const auto& [o, w] : weights_) {
      os << (first ? "" : " ") << "k" << o.str() << "=" << w;
      first = false;
    }
    return first ? "k=0" : os.str();
  }

  friend bool operator==(const CouplingKernel&, const CouplingKernel&) = default;

 private:
  std::size_t dim_ = 0;
  std::map<Site, double> weights_;
};

struct PcaParams {
  double beta = 1.0;
  double h = 0.0;
  CouplingKernel kernel;

  PcaParams() = default;
  PcaParams(double beta_, double h_, CouplingKernel k) : beta(beta_), h(h_), kernel(std::move(k)) { validate(); }

  void validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw Error("beta must be a positive finite number");
    if (!std::isfinite(h)) throw Error("h must be finite");
  }
};

/// Kernel written as `dx:dy=w` entries joined by ';' (safe inside CSV).
inline std::string kernel_tag(const CouplingKernel& k) {
  std::ostringstream os;
  os.precision(12);
  bool first = true;
  for (const auto& [o, w] : k.support()) {
    os << (first ? "" : ";");
    for (std::size_t c = 0; c < o.dim(); ++c) os << (c ? ":" : "") << o[c];
    os << "=" << w;
    first = false;
  }
  return first ? "0" : os.str();
}

}  // namespace pca
