#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pca/util.hpp"

namespace pca {

/// A point of Z^d in lattice units.
struct Site {
  std::vector<int> coords;

  Site() = default;
  explicit Site(std::vector<int> c) : coords(std::move(c)) {}
  Site(std::initializer_list<int> c) : coords(c) {}

  std::size_t dim() const { return coords.size(); }
  int operator[](std::size_t k) const { return coords[k]; }
  int& operator[](std::size_t k) { return coords[k]; }

  static Site zero(std::size_t d) { return Site(std::vector<int>(d, 0)); }
  static Site unit(std::size_t d, std::size_t axis) {
    Site e = zero(d);
    e[axis] = 1;
    return e;
  }

  bool is_zero() const {
    for (int c : coords)
      if (c != 0) return false;
    return true;
  }

  /// Sum of coordinates; its parity splits Z^2 into even and odd sublattices.
  int coordinate_sum() const {
    int s = 0;
    for (int c : coords) s += c;
    return s;
  }

  friend auto operator<=>(const Site&, const Site&) = default;
  friend bool operator==(const Site&, const Site&) = default;

  friend Site operator+(Site a, const Site& b) {
    if (a.dim() != b.dim()) throw Error("site dimension mismatch");
    for (std::size_t k = 0; k < a.dim(); ++k) a[k] += b[k];
    return a;
  }
  friend Site operator-(Site a, const Site& b) {
    if (a.dim() != b.dim()) throw Error("site dimension mismatch");
    for (std::size_t k = 0; k < a.dim(); ++k) a[k] -= b[k];
    return a;
  }
  friend Site operator-(Site a) {
    for (int& c : a.coords) c = -c;
    return a;
  }

  std::string str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t k = 0; k < coords.size(); ++k) os << (k ? "," : "") << coords[k];
    os << ')';
    return os.str();
  }
};

/// Norm used for dist(i, Lambda) in closures. Sup-norm is the default.
enum class DistanceNorm { sup, euclidean };

/// Norm of an offset, rounded up to an integer (used for kernel ranges).
inline int integer_norm(const Site& o, DistanceNorm norm) {
  if (norm == DistanceNorm::sup) {
    int m = 0;
    for (int c : o.coords) m = std::max(m, c < 0 ? -c : c);
    return m;
  }
  long sq = 0;
  for (int c : o.coords) sq += static_cast<long>(c) * c;
  int r = 0;
  while (static_cast<long>(r) * r < sq) ++r;
  return r;
}

/// Finite hyper-rectangle of Z^d. Sites are enumerated in lexicographic order
/// (first coordinate most significant); that order defines canonical indices.
class Box {
 public:
  Box() = default;
  Box(std::vector<int> sides, std::optional<Site> origin = std::nullopt) : sides_(std::move(sides)) {
    if (sides_.empty()) throw Error("box dimension must be at least 1");
    for (int s : sides_)
      if (s < 1) throw Error("box sides must be positive");
    origin_ = origin ? *origin : Site::zero(sides_.size());
    if (origin_.dim() != sides_.size()) throw Error("box origin has wrong dimension");
    size_ = 1;
    for (int s : sides_) size_ *= static_cast<std::size_t>(s);
  }

  static Box square(int side, int dim = 2) { return Box(std::vector<int>(dim, side)); }

  std::size_t dim() const { return sides_.size(); }
  const std::vector<int>& sides() const { return sides_; }
  const Site& origin() const { return origin_; }
  std::size_t size() const { return size_; }

  bool contains(const Site& s) const {
    if (s.dim() != dim()) return false;
    for (std::size_t k = 0; k < dim(); ++k) {
      const int rel = s[k] - origin_[k];
      if (rel < 0 || rel >= sides_[k]) return false;
    }
    return true;
  }

  std::optional<std::size_t> index_of(const Site& s) const {
    if (!contains(s)) return std::nullopt;
    std::size_t idx = 0;
    for (std::size_t k = 0; k < dim(); ++k)
      idx = idx * static_cast<std::size_t>(sides_[k]) + static_cast<std::size_t>(s[k] - origin_[k]);
    return idx;
  }

  Site site(std::size_t idx) const {
    Site s = origin_;
    for (std::size_t k = dim(); k-- > 0;) {
      const auto side = static_cast<std::size_t>(sides_[k]);
      s[k] += static_cast<int>(idx % side);
      idx /= side;
    }
    return s;
  }

  std::vector<Site> sites() const {
    std::vector<Site> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) out.push_back(site(i));
    return out;
  }

  /// Periodic image of s inside the box.
  Site wrap(const Site& s) const {
    Site w = s;
    for (std::size_t k = 0; k < dim(); ++k) {
      int rel = (s[k] - origin_[k]) % sides_[k];
      if (rel < 0) rel += sides_[k];
      w[k] = origin_[k] + rel;
    }
    return w;
  }

  /// Distance from s to the box; comparisons against integers are exact.
  bool within(const Site& s, int m, DistanceNorm norm = DistanceNorm::sup) const {
    Site gap = Site::zero(dim());
    for (std::size_t k = 0; k < dim(); ++k) {
      const int lo = origin_[k], hi = origin_[k] + sides_[k] - 1;
      gap[k] = s[k] < lo ? lo - s[k] : (s[k] > hi ? s[k] - hi : 0);
    }
    if (norm == DistanceNorm::sup) return integer_norm(gap, norm) <= m;
    long sq = 0;
    for (int g : gap.coords) sq += static_cast<long>(g) * g;
    return sq <= static_cast<long>(m) * m;
  }

  /// Cl_m(Lambda) = {i : dist(i, Lambda) <= m}, in lexicographic order.
  std::vector<Site> closure(int m, DistanceNorm norm = DistanceNorm::sup) const {
    std::vector<int> grown(sides_);
    Site o = origin_;
    for (std::size_t k = 0; k < dim(); ++k) {
      grown[k] += 2 * m;
      o[k] -= m;
    }
    const Box window(grown, o);
    std::vector<Site> out;
    for (std::size_t i = 0; i < window.size(); ++i) {
      Site s = window.site(i);
      if (within(s, m, norm)) out.push_back(std::move(s));
    }
    return out;
  }

  std::string str() const {
    std::ostringstream os;
    for (std::size_t k = 0; k < dim(); ++k) os << (k ? "x" : "") << sides_[k];
    if (!origin_.is_zero()) os << "@" << origin_.str();
    return os.str();
  }

  friend bool operator==(const Box&, const Box&) = default;

 private:
  std::vector<int> sides_;
  Site origin_;
  std::size_t size_ = 0;
};

struct Sublattices {
  std::vector<Site> even;
  std::vector<Site> odd;
};

/// Partition of a planar box by parity of x + y.
inline Sublattices sublattices(const Box& box) {
  if (box.dim() != 2) throw Error("sublattices require a two-dimensional box");
  Sublattices out;
  for (std::size_t i = 0; i < box.size(); ++i) {
    Site s = box.site(i);
    (s.coordinate_sum() % 2 == 0 ? out.even : out.odd).push_back(std::move(s));
  }
  return out;
}

}  // namespace pca
