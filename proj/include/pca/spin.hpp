#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "pca/kernel.hpp"
#include "pca/lattice.hpp"

namespace pca {

/// +-1 assignment on a finite box, stored in canonical site order.
class SpinConfig {
 public:
  SpinConfig() = default;
  SpinConfig(Box box, Spin fill = 1) : box_(std::move(box)), spins_(box_.size(), fill) {
    if (!is_spin(fill)) throw Error("spin must be -1 or +1");
  }
  SpinConfig(Box box, std::vector<Spin> spins) : box_(std::move(box)), spins_(std::move(spins)) {
    if (spins_.size() != box_.size()) throw Error("spin array does not match box size");
    for (Spin s : spins_)
      if (!is_spin(s)) throw Error("spin must be -1 or +1");
  }

  /// Bit n of the code is (sigma_{i_n} + 1) / 2.
  static SpinConfig decode(const Box& box, std::uint64_t code) {
    if (box.size() > 63) throw Error("canonical encoding supports at most 63 sites");
    std::vector<Spin> s(box.size());
    for (std::size_t n = 0; n < s.size(); ++n) s[n] = ((code >> n) & 1U) ? 1 : -1;
    return SpinConfig(box, std::move(s));
  }

  std::uint64_t encode() const {
    if (spins_.size() > 63) throw Error("canonical encoding supports at most 63 sites");
    std::uint64_t code = 0;
    for (std::size_t n = 0; n < spins_.size(); ++n)
      if (spins_[n] > 0) code |= std::uint64_t{1} << n;
    return code;
  }

  template <class Rng>
  static SpinConfig random(const Box& box, Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    std::vector<Spin> s(box.size());
    for (auto& v : s) v = coin(rng) ? 1 : -1;
    return SpinConfig(box, std::move(s));
  }

  const Box& box() const { return box_; }
  std::size_t size() const { return spins_.size(); }
  const std::vector<Spin>& spins() const { return spins_; }
  std::vector<Spin>& mutable_spins() { return spins_; }

  Spin operator[](std::size_t idx) const { return spins_[idx]; }
  Spin at(const Site& s) const {
    auto idx = box_.index_of(s);
    if (!idx) throw Error("site " + s.str() + " is outside the box");
    return spins_[*idx];
  }
  void set(const Site& s, Spin v) {
    auto idx = box_.index_of(s);
    if (!idx) throw Error("site " + s.str() + " is outside the box");
    if (!is_spin(v)) throw Error("spin must be -1 or +1");
    spins_[*idx] = v;
  }

  SpinConfig flipped() const {
    SpinConfig out = *this;
    for (auto& v : out.spins_) v = static_cast<Spin>(-v);
    return out;
  }

  /// theta_a: (shifted)_i = sigma_{i + a}, periodic in the box.
  SpinConfig shifted(const Site& a) const {
    SpinConfig out = *this;
    for (std::size_t i = 0; i < size(); ++i) out.spins_[i] = at(box_.wrap(box_.site(i) + a));
    return out;
  }

  friend bool operator==(const SpinConfig&, const SpinConfig&) = default;

 private:
  Box box_;
  std::vector<Spin> spins_;
};

/// Exterior completion of a finite box: either a torus or a frozen tau.
class BoundaryCondition {
 public:
  struct Periodic {
    friend bool operator==(const Periodic&, const Periodic&) = default;
  };
  /// Explicit exterior spins, with an optional spin for every site not listed.
  struct Fixed {
    std::map<Site, Spin> spins;
    std::optional<Spin> fill;
    friend bool operator==(const Fixed&, const Fixed&) = default;
  };

  BoundaryCondition() : value_(Periodic{}) {}

  static BoundaryCondition periodic() { return BoundaryCondition(Periodic{}); }
  static BoundaryCondition uniform(Spin s) {
    if (!is_spin(s)) throw Error("boundary spin must be -1 or +1");
    return BoundaryCondition(Fixed{{}, s});
  }
  static BoundaryCondition plus() { return uniform(1); }
  static BoundaryCondition minus() { return uniform(-1); }
  static BoundaryCondition fixed(std::map<Site, Spin> spins) {
    for (const auto& [s, v] : spins)
      if (!is_spin(v)) throw Error("boundary spin at " + s.str() + " must be -1 or +1");
    return BoundaryCondition(Fixed{std::move(spins), std::nullopt});
  }
  /// Explicit tau on Cl_width(box) minus the box, drawn by `pick`.
  static BoundaryCondition fixed_from(const Box& box, int width, const std::function<Spin(const Site&)>& pick,
                                      DistanceNorm norm = DistanceNorm::sup) {
    std::map<Site, Spin> spins;
    for (const Site& s : box.closure(width, norm))
      if (!box.contains(s)) spins.emplace(s, pick(s));
    return fixed(std::move(spins));
  }
  template <class Rng>
  static BoundaryCondition random(const Box& box, int width, Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    return fixed_from(box, width, [&](const Site&) -> Spin { return coin(rng) ? 1 : -1; });
  }

  bool is_periodic() const { return std::holds_alternative<Periodic>(value_); }
  const Fixed& fixed_data() const {
    if (is_periodic()) throw Error("boundary condition is periodic");
    return std::get<Fixed>(value_);
  }

  /// tau_j for an exterior site of a fixed boundary; nullopt when not supplied.
  std::optional<Spin> exterior(const Site& s) const {
    const Fixed& f = fixed_data();
    auto it = f.spins.find(s);
    if (it != f.spins.end()) return it->second;
    return f.fill;
  }

  /// Checks that every exterior site of Cl_width(box) has a spin.
  void require_coverage(const Box& box, int width, DistanceNorm norm = DistanceNorm::sup) const {
    if (is_periodic()) return;
    for (const Site& s : box.closure(width, norm))
      if (!box.contains(s) && !exterior(s)) throw Error("missing boundary spin at " + s.str());
  }

  std::string str() const {
    if (is_periodic()) return "periodic";
    const Fixed& f = fixed_data();
    if (f.spins.empty() && f.fill) return *f.fill > 0 ? "plus" : "minus";
    return "fixed";
  }

  friend bool operator==(const BoundaryCondition&, const BoundaryCondition&) = default;

 private:
  explicit BoundaryCondition(std::variant<Periodic, Fixed> v) : value_(std::move(v)) {}
  std::variant<Periodic, Fixed> value_;
};

/// Total spin lookup sigma~ = sigma_Lambda tau_{Lambda^c}. A view: the config
/// and boundary condition must outlive it.
class ExtendedConfig {
 public:
  ExtendedConfig(const SpinConfig& config, const BoundaryCondition& bc) : config_(&config), bc_(&bc) {}

  const SpinConfig& config() const { return *config_; }
  const BoundaryCondition& bc() const { return *bc_; }
  const Box& box() const { return config_->box(); }

  Spin operator()(const Site& j) const {
    const Box& b = box();
    if (auto idx = b.index_of(j)) return (*config_)[*idx];
    if (bc_->is_periodic()) return (*config_)[*b.index_of(b.wrap(j))];
    if (auto s = bc_->exterior(j)) return *s;
    throw Error("missing boundary spin at " + j.str());
  }

 private:
  const SpinConfig* config_;
  const BoundaryCondition* bc_;
};

inline ExtendedConfig extend(const SpinConfig& config, const BoundaryCondition& bc) { return {config, bc}; }

/// m_i = sum_j k(i - j) sigma~_j + h (not scaled by beta).
inline double local_field(const Site& i, const ExtendedConfig& ext, const PcaParams& params) {
  if (!ext.box().contains(i)) throw Error("local field requested outside the box at " + i.str());
  double m = params.h;
  for (const auto& [o, w] : params.kernel.support()) m += w * ext(i - o);
  return m;
}

/// Same sum for any site where sigma~ is available (used for sites outside the box).
inline double field_sum(const Site& i, const ExtendedConfig& ext, const CouplingKernel& kernel) {
  double m = 0.0;
  for (const auto& [o, w] : kernel.support()) m += w * ext(i - o);
  return m;
}

}  // namespace pca
