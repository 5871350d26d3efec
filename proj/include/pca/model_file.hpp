#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pca/kernel.hpp"
#include "pca/spin.hpp"

namespace pca {

/// Plain `key = value` model description. Recognized keys: dim, sides, beta, h,
/// k.<dx>.<dy>... (mirror offsets are filled in), bc = periodic | plus | minus | file:<path>.
class ModelSpec {
 public:
  /// 64x64 box, beta = 1, h = 0, k(+-e1) = k(+-e2) = 1, plus frame.
  ModelSpec() {
    values_ = {{"dim", "2"}, {"sides", "64,64"}, {"beta", "1"}, {"h", "0"}, {"k.1.0", "1"}, {"k.0.1", "1"},
               {"bc", "plus"}};
  }

  static ModelSpec parse(std::istream& in) {
    ModelSpec spec;
    spec.merge(read_pairs(in), true);
    return spec;
  }

  static ModelSpec load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model file '" + path + "'");
    return parse(in);
  }

  /// Applies one `key=value` override; kernel overrides edit single entries.
  void set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw Error("override '" + assignment + "' is not of the form key=value");
    std::map<std::string, std::string> one{{trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1))}};
    merge(one, false);
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  std::size_t dim() const {
    const int d = to_int("dim", values_.at("dim"));
    if (d < 1) throw Error("dim must be at least 1");
    return static_cast<std::size_t>(d);
  }

  Box box() const {
    std::string s = values_.at("sides");
    for (char& c : s)
      if (c == ',' || c == 'x' || c == 'X') c = ' ';
    std::istringstream is(s);
    std::vector<int> sides;
    std::string tok;
    while (is >> tok) sides.push_back(to_int("sides", tok));
    if (sides.size() != dim()) throw Error("sides lists " + std::to_string(sides.size()) + " values for dim " +
                                           std::to_string(dim()));
    return Box(sides);
  }

  CouplingKernel kernel() const {
    std::map<Site, double> entries;
    for (const auto& [key, val] : values_) {
      if (key.rfind("k.", 0) != 0) continue;
      std::vector<int> off;
      std::istringstream is(key.substr(2));
      std::string part;
      while (std::getline(is, part, '.')) off.push_back(to_int(key, part));
      if (off.size() != dim()) throw Error("kernel key '" + key + "' does not have " + std::to_string(dim()) + " offsets");
      entries[Site(off)] = to_double(key, val);
    }
    return CouplingKernel::symmetric_completion(dim(), entries);
  }

  PcaParams params() const { return PcaParams(to_double("beta", values_.at("beta")), to_double("h", values_.at("h")), kernel()); }

  BoundaryCondition boundary() const {
    const std::string& bc = values_.at("bc");
    if (bc == "periodic") return BoundaryCondition::periodic();
    if (bc == "plus") return BoundaryCondition::plus();
    if (bc == "minus") return BoundaryCondition::minus();
    if (bc.rfind("file:", 0) == 0) return load_boundary(bc.substr(5), dim());
    throw Error("unknown bc '" + bc + "' (expected periodic, plus, minus or file:<path>)");
  }

  /// Lines `coord_1 ... coord_d spin`; '#' starts a comment.
  static BoundaryCondition load_boundary(const std::string& path, std::size_t dim) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open boundary file '" + path + "'");
    std::map<Site, Spin> spins;
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line.substr(0, line.find('#')));
      if (line.empty()) continue;
      std::istringstream is(line);
      std::vector<int> c(dim);
      int s = 0;
      for (auto& v : c)
        if (!(is >> v)) throw Error("malformed boundary line '" + line + "'");
      if (!(is >> s) || !is_spin(s)) throw Error("malformed boundary line '" + line + "'");
      spins[Site(c)] = static_cast<Spin>(s);
    }
    return BoundaryCondition::fixed(std::move(spins));
  }

  /// Resolved configuration, one `key = value` per line, each prefixed.
  std::string describe(const std::string& prefix = "# ") const {
    std::ostringstream os;
    for (const auto& [k, v] : values_) os << prefix << k << " = " << v << '\n';
    return os.str();
  }

 private:
  static std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
  }

  static std::map<std::string, std::string> read_pairs(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = trim(line.substr(0, line.find('#')));
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw Error("model line " + std::to_string(lineno) + " has no '='");
      out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
  }

  void merge(const std::map<std::string, std::string>& in, bool replace_kernel) {
    static const std::vector<std::string> known{"dim", "sides", "beta", "h", "bc"};
    bool has_kernel = false;
    for (const auto& [k, v] : in) {
      if (k.rfind("k.", 0) == 0) {
        has_kernel = true;
        continue;
      }
      if (std::find(known.begin(), known.end(), k) == known.end()) throw Error("unknown model key '" + k + "'");
    }
    if (has_kernel && replace_kernel)
      for (auto it = values_.begin(); it != values_.end();) it = it->first.rfind("k.", 0) == 0 ? values_.erase(it) : std::next(it);
    for (const auto& [k, v] : in) values_[k] = v;
  }

  static int to_int(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const int x = std::stoi(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw Error("value '" + v + "' for '" + key + "' is not an integer");
    }
  }
  static double to_double(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw Error("value '" + v + "' for '" + key + "' is not a number");
    }
  }

  std::map<std::string, std::string> values_;
};

/// Text grid of '+' / '-': line y holds the spins (x, y), x = 0 .. W-1.
inline SpinConfig read_grid(std::istream& in) {
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(line);
  }
  if (rows.empty()) throw Error("grid is empty");
  const std::size_t w = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != w) throw Error("grid rows have different lengths");
  SpinConfig config(Box({static_cast<int>(w), static_cast<int>(rows.size())}));
  for (std::size_t y = 0; y < rows.size(); ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const char c = rows[y][x];
      if (c != '+' && c != '-') throw Error(std::string("grid contains '") + c + "', expected '+' or '-'");
      config.set(Site{static_cast<int>(x), static_cast<int>(y)}, c == '+' ? 1 : -1);
    }
  return config;
}

inline void write_grid(std::ostream& os, const SpinConfig& config) {
  const Box& box = config.box();
  if (box.dim() != 2) throw Error("grid output needs a planar box");
  const Site& o = box.origin();
  for (int y = 0; y < box.sides()[1]; ++y) {
    for (int x = 0; x < box.sides()[0]; ++x) os << (config.at(Site{o[0] + x, o[1] + y}) > 0 ? '+' : '-');
    os << '\n';
  }
}

}  // namespace pca
