#pragma once

// Long-range random-walk steps: jump x -> x+r with rate given by the
// off-diagonal kernel of -(-Δ)^{α/2}, which decays like |r|^{-(d+α)}.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "walkrg/errors.hpp"
#include "walkrg/lattice.hpp"
#include "walkrg/rng.hpp"
#include "walkrg/spectral.hpp"

namespace walkrg {

struct LongRangeOptions {
  int radius = 0;               ///< ℓ∞ truncation radius R; 0 picks one
  int period_factor = 4;        ///< torus period P >= period_factor * R
  double max_tail = 1e-3;       ///< allowed rate mass outside the ball
  std::size_t max_volume = std::size_t{1} << 24;  ///< torus site budget for the automatic search
};

/// Truncated long-range jump distribution. The kernel is computed on a torus
/// of period 2^N >= 4R, symmetrized under r -> -r, and cut to the ℓ∞ ball of
/// radius R; the discarded mass relative to the full off-diagonal sum is the
/// recorded tail.
class LongRangeStepSampler {
 public:
  LongRangeStepSampler(int d, double alpha, LongRangeOptions opt = {}) : d_(d), alpha_(alpha) {
    if (d < 1 || d > 3) throw ConfigurationError("walk-mc", "long-range steps need d in 1..3");
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("walk-mc", "long-range alpha must lie in (0, 2)");
    if (opt.period_factor < 3) throw ConfigurationError("walk-mc", "period factor must be >= 3");
    if (opt.radius > 0) {
      build(opt.radius, opt.period_factor);
    } else {
      int r = 8;
      for (;;) {
        build(r, opt.period_factor);
        if (tail_ <= opt.max_tail) break;
        const std::size_t next = static_cast<std::size_t>(std::pow(static_cast<double>(period_) * 2.0, d));
        if (next > opt.max_volume) break;
        r *= 2;
      }
    }
    if (!(tail_ <= opt.max_tail))
      throw ConfigurationError("walk-mc", "truncated tail mass " + std::to_string(tail_) + " exceeds " +
                                              std::to_string(opt.max_tail) + " at radius " + std::to_string(radius_) +
                                              "; increase the radius");
    std::vector<double> w;
    w.reserve(steps_.size());
    for (const auto& s : steps_) w.push_back(s.weight);
    dist_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }

  struct Entry {
    Coord displacement{};
    double weight = 0.0;  ///< jump rate -(-Δ)^{α/2}_{0,r} > 0
  };

  int dim() const { return d_; }
  double alpha() const { return alpha_; }
  int radius() const { return radius_; }
  std::int64_t period() const { return period_; }
  double tail_mass() const { return tail_; }
  /// Sum of retained jump rates (the truncated walk's total jump rate).
  double total_rate() const { return total_; }
  const std::vector<Entry>& entries() const { return steps_; }

  /// Rate for displacement r (0 outside the ball or for r = 0).
  double rate(const Coord& r) const {
    std::int64_t m = 0;
    for (int i = 0; i < d_; ++i) m = std::max<std::int64_t>(m, std::abs(r[static_cast<std::size_t>(i)]));
    if (m == 0 || m > radius_) return 0.0;
    return steps_[index_of(r)].weight;
  }

  Coord sample(Rng& rng) const { return steps_[dist_(rng)].displacement; }

 private:
  std::size_t ball_index(const Coord& r) const {
    std::size_t s = 0;
    const auto side = static_cast<std::size_t>(2 * radius_ + 1);
    for (int i = d_ - 1; i >= 0; --i) s = s * side + static_cast<std::size_t>(r[static_cast<std::size_t>(i)] + radius_);
    return s;
  }
  std::size_t index_of(const Coord& r) const {
    // steps_ skips the centre of the ball
    const std::size_t b = ball_index(r), centre = ball_count_ / 2;
    return b < centre ? b : b - 1;
  }

  void build(int r, int factor) {
    int n = 1;
    while ((std::int64_t{1} << n) < static_cast<std::int64_t>(factor) * r) ++n;
    const TorusLattice t(d_, 2, n);
    const auto op = fractional_laplacian(t, alpha_);
    const auto& row = op.row();
    radius_ = r;
    period_ = t.period();
    const auto side = static_cast<std::size_t>(2 * r + 1);
    ball_count_ = 1;
    for (int i = 0; i < d_; ++i) ball_count_ *= side;
    steps_.clear();
    steps_.reserve(ball_count_ - 1);
    total_ = 0.0;
    for (std::size_t b = 0; b < ball_count_; ++b) {
      Coord c{};
      std::size_t q = b;
      bool origin = true;
      for (int i = 0; i < d_; ++i) {
        c[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(q % side) - r;
        q /= side;
        origin = origin && c[static_cast<std::size_t>(i)] == 0;
      }
      if (origin) continue;
      Coord neg{};
      for (int i = 0; i < d_; ++i) neg[static_cast<std::size_t>(i)] = -c[static_cast<std::size_t>(i)];
      const double w = -0.5 * (row[t.site(c)] + row[t.site(neg)]);
      if (!(w > 0.0))
        throw NumericalError("walk-mc", "long-range kernel entry not positive at ball index " + std::to_string(b));
      steps_.push_back({c, w});
      total_ += w;
    }
    tail_ = std::max(0.0, 1.0 - total_ / row[0]);
  }

  int d_;
  double alpha_;
  int radius_ = 0;
  std::int64_t period_ = 0;
  std::size_t ball_count_ = 0;
  double tail_ = 1.0;
  double total_ = 0.0;
  std::vector<Entry> steps_;
  mutable std::discrete_distribution<std::size_t> dist_;
};

/// Short self-avoiding long-range walk by rejection: draw n steps, restart on
/// the first revisit. Returns nullopt if max_attempts walks all fail.
inline std::optional<std::vector<Coord>> sample_longrange_saw(int n, const LongRangeStepSampler& steps, Rng& rng,
                                                             std::uint64_t max_attempts = 1000000) {
  if (n < 0) throw ConfigurationError("walk-mc", "walk length must be >= 0");
  struct CoordHash {
    std::size_t operator()(const Coord& c) const {
      std::size_t h = 0;
      for (auto v : c) h = h * 0x9E3779B97F4A7C15ull + static_cast<std::size_t>(v);
      return h;
    }
  };
  for (std::uint64_t a = 0; a < max_attempts; ++a) {
    std::vector<Coord> path{Coord{}};
    std::unordered_set<Coord, CoordHash> seen{Coord{}};
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      Coord next = path.back();
      const Coord r = steps.sample(rng);
      for (std::size_t k = 0; k < next.size(); ++k) next[k] += r[k];
      ok = seen.insert(next).second;
      path.push_back(next);
    }
    if (ok) return path;
  }
  return std::nullopt;
}

}  // namespace walkrg
