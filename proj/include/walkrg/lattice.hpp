#pragma once

// Periodic lattice geometry: the period-L^N torus, its block hierarchy,
// polymers (unions of same-scale blocks) and the nearest-neighbour Laplacian.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "walkrg/errors.hpp"

namespace walkrg {

inline constexpr int kMaxDim = 5;

using Coord = std::array<std::int64_t, kMaxDim>;

inline std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

/// Discrete d-dimensional torus of period P = L^N. Site indices are
/// row-major with coordinate 0 varying fastest; every coordinate is kept in
/// its canonical representative in [0, P).
class TorusLattice {
 public:
  TorusLattice(int d, int L, int N) : d_(d), L_(L), N_(N) {
    if (d < 1 || d > kMaxDim) throw ConfigurationError("lattice", "dimension must be in 1..5");
    if (L < 2) throw ConfigurationError("lattice", "block base L must be >= 2");
    if (N < 1) throw ConfigurationError("lattice", "number of scales N must be >= 1");
    period_ = ipow(L, N);
    if (period_ < 3) throw ConfigurationError("lattice", "period L^N must be >= 3");
    volume_ = static_cast<std::size_t>(ipow(period_, d));
  }

  int dim() const { return d_; }
  int block_base() const { return L_; }
  int scales() const { return N_; }
  std::int64_t period() const { return period_; }
  std::size_t volume() const { return volume_; }

  std::int64_t wrap(std::int64_t x) const {
    const std::int64_t r = x % period_;
    return r < 0 ? r + period_ : r;
  }

  Coord coords(std::size_t site) const {
    Coord c{};
    auto s = static_cast<std::int64_t>(site);
    for (int i = 0; i < d_; ++i) {
      c[i] = s % period_;
      s /= period_;
    }
    return c;
  }

  std::size_t site(const Coord& c) const {
    std::int64_t s = 0;
    for (int i = d_ - 1; i >= 0; --i) s = s * period_ + wrap(c[i]);
    return static_cast<std::size_t>(s);
  }

  /// Site index of x - y (translation-invariant kernels are stored by it).
  std::size_t difference(std::size_t x, std::size_t y) const {
    const Coord a = coords(x), b = coords(y);
    Coord c{};
    for (int i = 0; i < d_; ++i) c[i] = a[i] - b[i];
    return site(c);
  }

  /// Circular distance along one axis.
  std::int64_t axis_distance(std::int64_t a, std::int64_t b) const {
    const std::int64_t t = wrap(a - b);
    return std::min(t, period_ - t);
  }

  std::int64_t distance_l1(std::size_t x, std::size_t y) const {
    const Coord a = coords(x), b = coords(y);
    std::int64_t s = 0;
    for (int i = 0; i < d_; ++i) s += axis_distance(a[i], b[i]);
    return s;
  }

  std::int64_t distance_linf(std::size_t x, std::size_t y) const {
    const Coord a = coords(x), b = coords(y);
    std::int64_t s = 0;
    for (int i = 0; i < d_; ++i) s = std::max(s, axis_distance(a[i], b[i]));
    return s;
  }

  /// The 2d nearest neighbours, ordered +e_0, -e_0, +e_1, -e_1, ...
  std::vector<std::size_t> neighbours(std::size_t x) const {
    std::vector<std::size_t> out;
    out.reserve(2 * static_cast<std::size_t>(d_));
    const Coord c = coords(x);
    for (int i = 0; i < d_; ++i) {
      for (int s : {+1, -1}) {
        Coord n = c;
        n[i] += s;
        out.push_back(site(n));
      }
    }
    return out;
  }

  // --- block hierarchy -------------------------------------------------

  std::int64_t block_side(int j) const { return ipow(L_, j); }
  /// Number of scale-j blocks along one axis.
  std::int64_t blocks_per_axis(int j) const { return period_ / block_side(j); }
  /// |B_j| = L^{(N-j)d}.
  std::size_t block_count(int j) const {
    check_scale(j);
    return static_cast<std::size_t>(ipow(blocks_per_axis(j), d_));
  }

  /// Block-grid coordinates of block `id` at scale j.
  Coord block_coords(int j, std::size_t id) const {
    const std::int64_t nb = blocks_per_axis(j);
    Coord c{};
    auto s = static_cast<std::int64_t>(id);
    for (int i = 0; i < d_; ++i) {
      c[i] = s % nb;
      s /= nb;
    }
    return c;
  }

  std::size_t block_id(int j, const Coord& bc) const {
    const std::int64_t nb = blocks_per_axis(j);
    std::int64_t s = 0;
    for (int i = d_ - 1; i >= 0; --i) s = s * nb + (((bc[i] % nb) + nb) % nb);
    return static_cast<std::size_t>(s);
  }

  /// Scale-j block containing a site.
  std::size_t block_of(int j, std::size_t site_index) const {
    Coord c = coords(site_index);
    const std::int64_t side = block_side(j);
    for (int i = 0; i < d_; ++i) c[i] /= side;
    return block_id(j, c);
  }

  Coord block_corner(int j, std::size_t id) const {
    Coord c = block_coords(j, id);
    const std::int64_t side = block_side(j);
    for (int i = 0; i < d_; ++i) c[i] *= side;
    return c;
  }

  std::vector<std::size_t> block_sites(int j, std::size_t id) const {
    const Coord corner = block_corner(j, id);
    const std::int64_t side = block_side(j);
    const auto count = static_cast<std::size_t>(ipow(side, d_));
    std::vector<std::size_t> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      Coord c = corner;
      auto s = static_cast<std::int64_t>(k);
      for (int i = 0; i < d_; ++i) {
        c[i] += s % side;
        s /= side;
      }
      out.push_back(site(c));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Scale-(j+1) block containing scale-j block `id`.
  std::size_t parent_block(int j, std::size_t id) const {
    if (j >= N_) throw ScaleOverflowError("lattice", "no scale above N");
    Coord c = block_coords(j, id);
    for (int i = 0; i < d_; ++i) c[i] /= L_;
    return block_id(j + 1, c);
  }

  /// Torus l-infinity distance between two scale-j blocks viewed as closed
  /// cubes [corner, corner + L^j]^d: edge-adjacent blocks are at distance 0,
  /// blocks with a one-block gap at distance L^j.
  std::int64_t block_distance(int j, std::size_t a, std::size_t b) const {
    const Coord ca = block_coords(j, a), cb = block_coords(j, b);
    const std::int64_t nb = blocks_per_axis(j);
    std::int64_t gap = 0;
    for (int i = 0; i < d_; ++i) {
      std::int64_t t = ((ca[i] - cb[i]) % nb + nb) % nb;
      t = std::min(t, nb - t);
      gap = std::max(gap, std::max<std::int64_t>(0, t - 1));
    }
    return gap * block_side(j);
  }

  bool operator==(const TorusLattice& o) const { return d_ == o.d_ && L_ == o.L_ && N_ == o.N_; }

  void check_scale(int j) const {
    if (j < 0 || j > N_) throw ScaleOverflowError("lattice", "scale " + std::to_string(j) + " outside [0, N]");
  }

 private:
  int d_;
  int L_;
  int N_;
  std::int64_t period_ = 0;
  std::size_t volume_ = 0;
};

/// A union of scale-j blocks, stored as a sorted set of block ids.
class Polymer {
 public:
  Polymer() = default;
  Polymer(int scale, std::vector<std::size_t> blocks) : scale_(scale), blocks_(std::move(blocks)) {
    std::sort(blocks_.begin(), blocks_.end());
    blocks_.erase(std::unique(blocks_.begin(), blocks_.end()), blocks_.end());
  }

  static Polymer from_mask(int scale, std::span<const std::size_t> universe, std::uint64_t mask) {
    std::vector<std::size_t> b;
    for (std::size_t i = 0; i < universe.size(); ++i)
      if (mask >> i & 1u) b.push_back(universe[i]);
    return Polymer(scale, std::move(b));
  }

  int scale() const { return scale_; }
  const std::vector<std::size_t>& blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }
  bool empty() const { return blocks_.empty(); }
  bool contains(std::size_t block) const { return std::binary_search(blocks_.begin(), blocks_.end(), block); }

  bool is_subset_of(const Polymer& o) const {
    return scale_ == o.scale_ && std::includes(o.blocks_.begin(), o.blocks_.end(), blocks_.begin(), blocks_.end());
  }

  Polymer united(const Polymer& o) const {
    check_same_scale(o);
    std::vector<std::size_t> r;
    std::set_union(blocks_.begin(), blocks_.end(), o.blocks_.begin(), o.blocks_.end(), std::back_inserter(r));
    return Polymer(scale_, std::move(r));
  }

  Polymer minus(const Polymer& o) const {
    check_same_scale(o);
    std::vector<std::size_t> r;
    std::set_difference(blocks_.begin(), blocks_.end(), o.blocks_.begin(), o.blocks_.end(), std::back_inserter(r));
    return Polymer(scale_, std::move(r));
  }

  /// All sites covered, sorted.
  std::vector<std::size_t> sites(const TorusLattice& t) const {
    std::vector<std::size_t> out;
    for (auto b : blocks_) {
      auto s = t.block_sites(scale_, b);
      out.insert(out.end(), s.begin(), s.end());
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  bool operator==(const Polymer& o) const = default;
  auto operator<=>(const Polymer& o) const = default;

 private:
  void check_same_scale(const Polymer& o) const {
    if (o.scale_ != scale_) throw ConfigurationError("lattice", "polymers at different scales");
  }

  int scale_ = 0;
  std::vector<std::size_t> blocks_;
};

/// The whole torus as a scale-j polymer.
inline Polymer full_polymer(const TorusLattice& t, int j) {
  std::vector<std::size_t> b(t.block_count(j));
  std::iota(b.begin(), b.end(), std::size_t{0});
  return Polymer(j, std::move(b));
}

/// Visit every sub-polymer of X (2^|X| of them), passing the subset mask
/// relative to X.blocks() along with the polymer.
template <class Fn>
void for_each_subpolymer(const Polymer& X, Fn&& fn) {
  if (X.size() > 62) throw ComplexityError("lattice", "too many blocks to enumerate sub-polymers");
  const std::uint64_t n = std::uint64_t{1} << X.size();
  for (std::uint64_t m = 0; m < n; ++m) fn(Polymer::from_mask(X.scale(), X.blocks(), m), m);
}

/// Smallest scale-(j+1) polymer containing X.
inline Polymer closure(const TorusLattice& t, const Polymer& X) {
  t.check_scale(X.scale());
  if (X.scale() >= t.scales()) throw ScaleOverflowError("lattice", "closure of a scale-N polymer");
  std::vector<std::size_t> parents;
  parents.reserve(X.size());
  for (auto b : X.blocks()) parents.push_back(t.parent_block(X.scale(), b));
  return Polymer(X.scale() + 1, std::move(parents));
}

/// Two polymers are disconnected when their blocks are at distance >= L^j.
inline bool disconnected(const TorusLattice& t, const Polymer& X, const Polymer& Y) {
  const std::int64_t side = t.block_side(X.scale());
  for (auto a : X.blocks())
    for (auto b : Y.blocks())
      if (t.block_distance(X.scale(), a, b) < side) return false;
  return true;
}

/// Maximal connected components of X, ordered by smallest block id.
inline std::vector<Polymer> connected_components(const TorusLattice& t, const Polymer& X) {
  const auto& b = X.blocks();
  std::vector<std::size_t> parent(b.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  const std::int64_t side = t.block_side(X.scale());
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t k = i + 1; k < b.size(); ++k)
      if (t.block_distance(X.scale(), b[i], b[k]) < side) parent[find(i)] = find(k);

  std::vector<std::vector<std::size_t>> groups(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) groups[find(i)].push_back(b[i]);
  std::vector<Polymer> out;
  for (auto& g : groups)
    if (!g.empty()) out.emplace_back(X.scale(), std::move(g));
  std::sort(out.begin(), out.end(), [](const Polymer& p, const Polymer& q) { return p.blocks()[0] < q.blocks()[0]; });
  return out;
}

/// Real field on the torus with a fixed number of components per site.
class LatticeField {
 public:
  LatticeField(TorusLattice torus, int components = 1)
      : torus_(torus), components_(components), values_(torus.volume() * static_cast<std::size_t>(components), 0.0) {
    if (components < 1 || components > 2) throw ConfigurationError("lattice", "field components must be 1 or 2");
  }

  LatticeField(TorusLattice torus, std::vector<double> values, int components = 1)
      : torus_(torus), components_(components), values_(std::move(values)) {
    if (values_.size() != torus_.volume() * static_cast<std::size_t>(components))
      throw ConfigurationError("lattice", "field length does not match torus volume");
  }

  const TorusLattice& torus() const { return torus_; }
  int components() const { return components_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t site, int c = 0) { return values_[site * static_cast<std::size_t>(components_) + static_cast<std::size_t>(c)]; }
  double operator()(std::size_t site, int c = 0) const { return values_[site * static_cast<std::size_t>(components_) + static_cast<std::size_t>(c)]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double dot(const LatticeField& o) const {
    double s = 0;
    for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * o.values_[i];
    return s;
  }

 private:
  TorusLattice torus_;
  int components_;
  std::vector<double> values_;
};

/// (Δf)_x = Σ_{|e|=1} (f_{x+e} - f_x), componentwise.
inline LatticeField laplacian_apply(const TorusLattice& torus, const LatticeField& f) {
  if (!(f.torus() == torus)) throw ConfigurationError("lattice", "field lives on a different torus");
  LatticeField out(torus, f.components());
  const double deg = 2.0 * torus.dim();
  for (std::size_t x = 0; x < torus.volume(); ++x) {
    const auto nb = torus.neighbours(x);
    for (int c = 0; c < f.components(); ++c) {
      double acc = -deg * f(x, c);
      for (auto y : nb) acc += f(y, c);
      out(x, c) = acc;
    }
  }
  return out;
}

inline LatticeField laplacian_apply(const LatticeField& f) { return laplacian_apply(f.torus(), f); }

}  // namespace walkrg
