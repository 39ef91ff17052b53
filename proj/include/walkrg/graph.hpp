#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "walkrg/errors.hpp"
#include "walkrg/lattice.hpp"

namespace walkrg {

/// Finite graph with symmetric nonnegative edge weights. Its Laplacian
/// Δ = W - diag(W·1) is the generator of the continuous-time walk that jumps
/// x -> y at rate W_xy.
class WeightedGraph {
 public:
  explicit WeightedGraph(std::size_t n, std::string name = "graph") : n_(n), w_(n * n, 0.0), name_(std::move(name)) {
    if (n == 0) throw ConfigurationError("graph", "graph needs at least one vertex");
  }

  std::size_t size() const { return n_; }
  const std::string& name() const { return name_; }

  void add_edge(std::size_t x, std::size_t y, double weight = 1.0) {
    if (x >= n_ || y >= n_ || x == y) throw ConfigurationError("graph", "bad edge");
    if (weight < 0) throw ConfigurationError("graph", "negative edge weight");
    w_[x * n_ + y] += weight;
    w_[y * n_ + x] += weight;
  }

  double weight(std::size_t x, std::size_t y) const { return w_[x * n_ + y]; }

  double degree(std::size_t x) const {
    double s = 0;
    for (std::size_t y = 0; y < n_; ++y) s += w_[x * n_ + y];
    return s;
  }

  /// Entry of Δ (off-diagonal = weight, diagonal = -degree).
  double laplacian(std::size_t x, std::size_t y) const { return x == y ? -degree(x) : weight(x, y); }

 private:
  std::size_t n_;
  std::vector<double> w_;
  std::string name_;
};

inline WeightedGraph single_site_graph() { return WeightedGraph(1, "single-site"); }

inline WeightedGraph path_graph(std::size_t m) {
  WeightedGraph g(m, "path-" + std::to_string(m));
  for (std::size_t i = 0; i + 1 < m; ++i) g.add_edge(i, i + 1);
  return g;
}

inline WeightedGraph cycle_graph(std::size_t m) {
  if (m < 3) throw ConfigurationError("graph", "cycle needs >= 3 vertices");
  WeightedGraph g(m, "cycle-" + std::to_string(m));
  for (std::size_t i = 0; i < m; ++i) g.add_edge(i, (i + 1) % m);
  return g;
}

/// Period-2 chain: both unit vectors ±e lead to the other site, so the
/// stencil of Δ sees a doubled edge (weight 2), matching the spectrum {0, 4}.
inline WeightedGraph two_site_torus() {
  WeightedGraph g(2, "torus-P2");
  g.add_edge(0, 1, 2.0);
  return g;
}

/// Nearest-neighbour graph of a torus (P >= 3, so no doubled edges).
inline WeightedGraph torus_graph(const TorusLattice& t) {
  WeightedGraph g(t.volume(), "torus-d" + std::to_string(t.dim()) + "-P" + std::to_string(t.period()));
  for (std::size_t x = 0; x < t.volume(); ++x)
    for (auto y : t.neighbours(x))
      if (x < y) g.add_edge(x, y);
  return g;
}

/// Graphs by the names used on the command line: single-site, path-M,
/// cycle-M, torus-P2.
inline WeightedGraph graph_by_name(const std::string& name) {
  if (name == "single-site") return single_site_graph();
  if (name == "torus-P2") return two_site_torus();
  auto sized = [&](const std::string& prefix) -> std::size_t {
    const auto digits = name.substr(prefix.size());
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos || digits.size() > 3)
      throw ConfigurationError("graph", "unknown graph '" + name + "'");
    return static_cast<std::size_t>(std::stoul(digits));
  };
  if (name.rfind("path-", 0) == 0) {
    const auto m = sized("path-");
    if (m < 1) throw ConfigurationError("graph", "path needs >= 1 vertex");
    return path_graph(m);
  }
  if (name.rfind("cycle-", 0) == 0) return cycle_graph(sized("cycle-"));
  throw ConfigurationError("graph", "unknown graph '" + name + "' (single-site, path-M, cycle-M, torus-P2)");
}

}  // namespace walkrg
