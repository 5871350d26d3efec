#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include "pca/spin.hpp"

namespace pca {

/// Vertex of the dual lattice Z^2 + (1/2, 1/2); (x, y) stands for (x + 1/2, y + 1/2).
struct DualVertex {
  int x = 0, y = 0;
  friend auto operator<=>(const DualVertex&, const DualVertex&) = default;
  friend bool operator==(const DualVertex&, const DualVertex&) = default;
};

/// Unit dual segment, stored as twice its midpoint; exactly one coordinate is odd.
struct DualEdge {
  int x2 = 0, y2 = 0;

  /// The dual edge crossing the bond between nearest neighbours a and b.
  static DualEdge between(const Site& a, const Site& b) {
    if (std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) != 1) throw Error("sites are not nearest neighbours");
    return {a[0] + b[0], a[1] + b[1]};
  }

  /// Horizontal dual edges separate vertically stacked sites.
  bool horizontal() const { return (x2 & 1) == 0; }

  std::pair<Site, Site> separated() const {
    if (horizontal()) return {Site{x2 / 2, (y2 - 1) / 2}, Site{x2 / 2, (y2 + 1) / 2}};
    return {Site{(x2 - 1) / 2, y2 / 2}, Site{(x2 + 1) / 2, y2 / 2}};
  }

  std::pair<DualVertex, DualVertex> ends() const {
    if (horizontal()) return {{x2 / 2 - 1, (y2 - 1) / 2}, {x2 / 2, (y2 - 1) / 2}};
    return {{(x2 - 1) / 2, y2 / 2 - 1}, {(x2 - 1) / 2, y2 / 2}};
  }

  friend auto operator<=>(const DualEdge&, const DualEdge&) = default;
  friend bool operator==(const DualEdge&, const DualEdge&) = default;
};

namespace detail {

enum Dir { east = 0, north = 1, west = 2, south = 3 };

inline DualEdge edge_from(DualVertex v, int dir) {
  switch (dir) {
    case east: return {2 * v.x + 2, 2 * v.y + 1};
    case west: return {2 * v.x, 2 * v.y + 1};
    case north: return {2 * v.x + 1, 2 * v.y + 2};
    default: return {2 * v.x + 1, 2 * v.y};
  }
}

inline DualVertex step(DualVertex v, int dir) {
  static constexpr std::array<int, 4> dx{1, 0, -1, 0}, dy{0, 1, 0, -1};
  return {v.x + dx[dir], v.y + dy[dir]};
}

/// Site (x, y) lies inside a set of closed dual curves iff the ray toward +x
/// crosses an odd number of its vertical edges.
inline bool odd_crossings(const std::vector<DualEdge>& sorted_edges, const Site& i) {
  bool odd = false;
  for (const DualEdge& e : sorted_edges)
    if (!e.horizontal() && e.y2 == 2 * i[1] && (e.x2 - 1) / 2 >= i[0]) odd = !odd;
  return odd;
}

/// Spin of every cell implied by a closed segment set with +1 at infinity.
class ParitySpins {
 public:
  explicit ParitySpins(const std::vector<DualEdge>& edges) {
    for (const DualEdge& e : edges)
      if (!e.horizontal()) rows_[e.y2 / 2].push_back((e.x2 - 1) / 2);
    for (auto& [y, xs] : rows_) std::sort(xs.begin(), xs.end());
  }
  Spin operator()(int x, int y) const {
    auto it = rows_.find(y);
    if (it == rows_.end()) return 1;
    const auto& xs = it->second;
    const auto n = xs.end() - std::lower_bound(xs.begin(), xs.end(), x);
    return n % 2 ? Spin{-1} : Spin{1};
  }

 private:
  std::map<int, std::vector<int>> rows_;
};

}  // namespace detail

/// Closed curve of marked dual segments, in traversal order.
struct PeierlsContour {
  std::vector<DualEdge> edges;
  std::vector<DualVertex> vertices;  // vertices[k] is the start of edges[k]
  std::set<Site> boundary_plus;
  std::set<Site> boundary_minus;

  std::size_t length() const { return edges.size(); }

  bool winds_around(const Site& i) const {
    bool odd = false;
    for (const DualEdge& e : edges)
      if (!e.horizontal() && e.y2 == 2 * i[1] && (e.x2 - 1) / 2 >= i[0]) odd = !odd;
    return odd;
  }

  /// Enclosed area (shoelace formula on the dual vertices).
  double area() const {
    long twice = 0;
    for (std::size_t k = 0; k < vertices.size(); ++k) {
      const DualVertex& a = vertices[k];
      const DualVertex& b = vertices[(k + 1) % vertices.size()];
      twice += static_cast<long>(a.x) * b.y - static_cast<long>(b.x) * a.y;
    }
    return std::fabs(static_cast<double>(twice)) / 2.0;
  }
};

/// Equivalence class of communicating Peierls contours.
struct ContourClass {
  std::vector<PeierlsContour> contours;
  std::set<Site> boundary_plus;
  std::set<Site> boundary_minus;

  std::size_t length() const {
    std::size_t l = 0;
    for (const auto& c : contours) l += c.length();
    return l;
  }
  /// |boundary| = |d+ c| + |d- c| (the two sets are disjoint).
  std::size_t boundary_size() const { return boundary_plus.size() + boundary_minus.size(); }

  std::vector<DualEdge> edges() const {
    std::vector<DualEdge> out;
    for (const auto& c : contours) out.insert(out.end(), c.edges.begin(), c.edges.end());
    std::sort(out.begin(), out.end());
    return out;
  }
};

/// Dual segments separating opposite nearest-neighbour spins of sigma on Cl_1(Lambda), sigma = +1 off Lambda.
inline std::vector<DualEdge> marked_segments(const SpinConfig& config) {
  const Box& box = config.box();
  if (box.dim() != 2) throw Error("contours are defined for planar boxes only");
  const auto spin = [&](const Site& s) -> Spin {
    auto idx = box.index_of(s);
    return idx ? config[*idx] : Spin{1};
  };
  std::set<DualEdge> out;
  for (std::size_t k = 0; k < box.size(); ++k) {
    const Site i = box.site(k);
    const Spin si = config[k];
    for (const Site& d : {Site{1, 0}, Site{-1, 0}, Site{0, 1}, Site{0, -1}}) {
      const Site j = i + d;
      if (spin(j) != si) out.insert(DualEdge::between(i, j));
    }
  }
  return {out.begin(), out.end()};
}

/// Splits a closed segment set into Peierls contours. At a dual vertex of
/// degree 4 the incoming edge continues along the edge that bounds the same
/// -1 cell, so diagonally touching -1 regions get separate curves.
inline std::vector<PeierlsContour> split_into_peierls(std::vector<DualEdge> segments) {
  using namespace detail;
  std::sort(segments.begin(), segments.end());
  segments.erase(std::unique(segments.begin(), segments.end()), segments.end());
  const std::set<DualEdge> present(segments.begin(), segments.end());

  std::map<DualVertex, int> degree;
  for (const DualEdge& e : segments) {
    auto [a, b] = e.ends();
    ++degree[a];
    ++degree[b];
  }
  for (const auto& [v, d] : degree)
    if (d % 2 != 0) throw Error("segment set has a dual vertex of odd degree; not a union of closed curves");

  const ParitySpins spin(segments);
  std::set<DualEdge> used;
  std::vector<PeierlsContour> out;

  for (const DualEdge& first : segments) {
    if (used.count(first)) continue;
    PeierlsContour c;
    auto [start, v] = first.ends();
    // Direction of travel along the first edge (start -> v).
    int dir = first.horizontal() ? east : north;
    DualEdge e = first;
    DualVertex at = start;
    while (true) {
      used.insert(e);
      c.edges.push_back(e);
      c.vertices.push_back(at);
      at = step(at, dir);
      const int back = (dir + 2) % 4;
      int next = -1;
      if (degree[at] == 2) {
        for (int d = 0; d < 4; ++d)
          if (d != back && present.count(edge_from(at, d))) next = d;
      } else {
        // Cells around `at`: SW (x, y) and NE (x+1, y+1) share a sign at degree 4.
        const bool sw_minus = spin(at.x, at.y) < 0;
        // Pairs bounding a -1 cell: SW -> (W,S), NE -> (E,N); SE -> (S,E), NW -> (N,W).
        static constexpr std::array<int, 4> pair_sw{north, east, south, west};  // indexed by arriving-from side
        static constexpr std::array<int, 4> pair_se{south, west, north, east};
        next = sw_minus ? pair_sw[back] : pair_se[back];
      }
      if (next < 0) throw Error("broken curve while tracing contours");
      const DualEdge ne = edge_from(at, next);
      if (ne == first && at == start) break;
      if (used.count(ne)) throw Error("contour tracing revisited an edge");
      e = ne;
      dir = next;
    }
    for (const DualEdge& s : c.edges) {
      auto [a, b] = s.separated();
      const Spin sa = spin(a[0], a[1]);
      (sa < 0 ? c.boundary_minus : c.boundary_plus).insert(a);
      (sa < 0 ? c.boundary_plus : c.boundary_minus).insert(b);
    }
    out.push_back(std::move(c));
  }
  return out;
}

/// Groups contours whose boundaries share a site, transitively.
inline std::vector<ContourClass> contour_classes(const std::vector<PeierlsContour>& contours) {
  std::vector<std::size_t> parent(contours.size());
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::map<Site, std::size_t> owner;
  for (std::size_t c = 0; c < contours.size(); ++c)
    for (const auto* set : {&contours[c].boundary_plus, &contours[c].boundary_minus})
      for (const Site& s : *set) {
        auto [it, fresh] = owner.emplace(s, c);
        if (!fresh) parent[find(c)] = find(it->second);
      }
  std::map<std::size_t, std::size_t> slot;
  std::vector<ContourClass> out;
  for (std::size_t c = 0; c < contours.size(); ++c) {
    auto [it, fresh] = slot.emplace(find(c), out.size());
    if (fresh) out.emplace_back();
    ContourClass& cls = out[it->second];
    cls.contours.push_back(contours[c]);
    cls.boundary_plus.insert(contours[c].boundary_plus.begin(), contours[c].boundary_plus.end());
    cls.boundary_minus.insert(contours[c].boundary_minus.begin(), contours[c].boundary_minus.end());
  }
  return out;
}

inline std::vector<ContourClass> analyze_contours(const SpinConfig& config) {
  return contour_classes(split_into_peierls(marked_segments(config)));
}

/// Class of the innermost Peierls contour enclosing i; requires sigma_i = -1.
inline const ContourClass& minimal_contour_around(const Site& i, const std::vector<ContourClass>& classes) {
  bool odd = false;
  const ContourClass* best = nullptr;
  double best_area = 0.0;
  for (const auto& cls : classes)
    for (const auto& c : cls.contours)
      if (c.winds_around(i)) {
        odd = !odd;
        const double a = c.area();
        if (!best || a < best_area) {
          best = &cls;
          best_area = a;
        }
      }
  if (!odd || !best) throw Error("site " + i.str() + " does not carry spin -1");
  return *best;
}

/// Flips every site enclosed an odd number of times by the curves of `cls`;
/// the marked segments of the result are those of `config` minus the class.
inline SpinConfig flip_inside(const SpinConfig& config, const ContourClass& cls) {
  const std::vector<DualEdge> edges = cls.edges();
  SpinConfig out = config;
  for (std::size_t k = 0; k < config.size(); ++k)
    if (detail::odd_crossings(edges, config.box().site(k))) out.mutable_spins()[k] = static_cast<Spin>(-config[k]);
  return out;
}

/// F(c) = prod_{i in dc} cosh(beta sum_j k(i-j) sigma_j) / cosh(beta B), sigma = +1 off Lambda.
inline double contour_weight(const ContourClass& cls, const SpinConfig& config, const PcaParams& params) {
  if (params.h != 0.0) throw Error("contour weights are defined for h = 0");
  const auto plus = BoundaryCondition::plus();
  const ExtendedConfig ext(config, plus);
  const double denom = log_cosh(params.beta * params.kernel.total());
  double lw = 0.0;
  for (const auto* set : {&cls.boundary_plus, &cls.boundary_minus})
    for (const Site& i : *set) lw += log_cosh(params.beta * field_sum(i, ext, params.kernel)) - denom;
  return std::exp(lw);
}

struct PeierlsConstants {
  double A = 0.0;  // max |field| over mixed five-point sign patterns
  double B = 0.0;  // sum_j k(j)
};

inline void require_five_point_kernel(const CouplingKernel& k) {
  if (k.dim() != 2) throw Error("Peierls analysis needs a planar kernel");
  for (const auto& [o, w] : k.support())
    if (std::abs(o[0]) + std::abs(o[1]) > 1) throw Error("Peierls analysis needs a range-1 nearest-neighbour kernel");
}

inline PeierlsConstants peierls_constants(const CouplingKernel& kernel) {
  require_five_point_kernel(kernel);
  const double k0 = kernel.at({0, 0}), k1 = kernel.at({1, 0}), k2 = kernel.at({0, 1});
  PeierlsConstants out;
  out.B = kernel.total();
  // Bits: centre, +e1, -e1, +e2, -e2; skip the two constant patterns.
  for (unsigned m = 1; m < 31; ++m) {
    const auto s = [m](unsigned b) { return (m >> b) & 1U ? 1.0 : -1.0; };
    out.A = std::max(out.A, std::fabs(k0 * s(0) + k1 * (s(1) + s(2)) + k2 * (s(3) + s(4))));
  }
  return out;
}

enum class BoundStatus { converged, non_contractive, divergent };

struct PeierlsBound {
  double A = 0.0, B = 0.0;
  double r = 0.0;  // cosh(beta A) / cosh(beta B)
  BoundStatus status = BoundStatus::converged;
  double bound = std::nan("");
  std::size_t terms = 0;
};

/// sum over even l >= 4 of l^3 3^{l-1} r^{l/4}, truncated once the geometric
/// majorant of the tail is below 1e-12 of the partial sum.
inline PeierlsBound peierls_bound(double beta, const CouplingKernel& kernel) {
  if (!(beta > 0.0)) throw Error("beta must be positive");
  const PeierlsConstants c = peierls_constants(kernel);
  PeierlsBound out;
  out.A = c.A;
  out.B = c.B;
  const double log_r = log_cosh(beta * c.A) - log_cosh(beta * c.B);
  out.r = std::exp(log_r);
  if (!(c.A < c.B)) {
    out.status = BoundStatus::non_contractive;
    return out;
  }
  if (std::log(9.0) + 0.5 * log_r >= 0.0) {
    out.status = BoundStatus::divergent;
    return out;
  }
  const auto log_term = [&](double l) { return 3.0 * std::log(l) + (l - 1.0) * std::log(3.0) + 0.25 * l * log_r; };
  double sum = 0.0;
  for (double l = 4.0;; l += 2.0) {
    sum += std::exp(log_term(l));
    ++out.terms;
    const double ratio = std::exp(log_term(l + 4.0) - log_term(l + 2.0));
    if (ratio < 1.0) {
      const double tail = std::exp(log_term(l + 2.0)) / (1.0 - ratio);
      if (tail <= 1e-12 * sum) break;
    }
    if (out.terms > 10'000'000) {
      out.status = BoundStatus::divergent;
      return out;
    }
  }
  out.bound = sum;
  return out;
}

/// Smallest beta (to `tol`) at which the Peierls bound drops below `target`.
inline std::optional<double> peierls_beta_threshold(const CouplingKernel& kernel, double target = 0.5,
                                                    double tol = 1e-6) {
  const PeierlsConstants c = peierls_constants(kernel);
  if (!(c.A < c.B)) return std::nullopt;
  const auto below = [&](double beta) {
    const PeierlsBound b = peierls_bound(beta, kernel);
    return b.status == BoundStatus::converged && b.bound < target;
  };
  double lo = 0.0, hi = 1.0;
  while (!below(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e9) return std::nullopt;
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (below(mid) ? hi : lo) = mid;
  }
  return hi;
}

inline constexpr int kContourEnumerationBudget = 14;

/// Number of self-avoiding closed dual curves of length l that enclose the origin cell.
inline std::uint64_t enumerate_contours_around_origin(int l, unsigned workers = 1) {
  if (l > kContourEnumerationBudget)
    throw Error("contour enumeration budget exceeded: length " + std::to_string(l) + " > " +
                std::to_string(kContourEnumerationBudget));
  if (l < 4 || l % 2) return 0;
  using namespace detail;
  // A curve around the origin crosses the ray {(a, 0) : a >= 0} on vertical edges
  // from (a, -1) to (a, 0); each curve is counted from its crossing with least a,
  // traversed upward there first.
  const int starts = l / 2;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(starts), 0);
  parallel_for(counts.size(), workers, [&](std::size_t slot) {
    const int a0 = static_cast<int>(slot);
    const DualVertex origin{a0, -1};
    std::set<DualVertex> visited{origin, {a0, 0}};
    std::uint64_t found = 0;
    // crossings: parity of ray crossings so far.
    const auto dfs = [&](auto&& self, DualVertex at, int steps, bool odd) -> void {
      const int left = l - steps;
      for (int d = 0; d < 4; ++d) {
        const DualVertex nx = step(at, d);
        bool cross = false;
        if ((d == north || d == south) && std::min(at.y, nx.y) == -1 && at.x >= 0) {
          if (at.x < a0) continue;
          cross = true;
        }
        const int dist = std::abs(nx.x - origin.x) + std::abs(nx.y - origin.y);
        if (dist > left - 1) continue;
        if (nx == origin) {
          if (left == 1 && (odd != cross)) ++found;
          continue;
        }
        if (left == 1 || visited.count(nx)) continue;
        visited.insert(nx);
        self(self, nx, steps + 1, odd != cross);
        visited.erase(nx);
      }
    };
    dfs(dfs, DualVertex{a0, 0}, 1, true);
    counts[slot] = found;
  });
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

}  // namespace pca
