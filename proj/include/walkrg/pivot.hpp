#pragma once

// Pivot-algorithm Markov chain for n-step self-avoiding walks on Z^D and the
// end-to-end exponent fit built on it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numeric>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "walkrg/errors.hpp"
#include "walkrg/rng.hpp"
#include "walkrg/stats.hpp"

namespace walkrg {

template <int D>
using Point = std::array<std::int64_t, D>;

/// Element of the hyperoctahedral group of Z^D (order 2^D D!): a signed
/// permutation of the axes, g(x)_i = sign_i * x_{perm_i}.
template <int D>
struct SignedPermutation {
  std::array<int, D> perm{};
  std::array<int, D> sign{};

  static SignedPermutation identity() {
    SignedPermutation g;
    for (int i = 0; i < D; ++i) {
      g.perm[static_cast<std::size_t>(i)] = i;
      g.sign[static_cast<std::size_t>(i)] = 1;
    }
    return g;
  }

  static SignedPermutation random(Rng& rng) {
    SignedPermutation g = identity();
    for (int i = D - 1; i > 0; --i) std::swap(g.perm[static_cast<std::size_t>(i)], g.perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    for (auto& s : g.sign) s = (rng() >> 63) ? -1 : 1;
    return g;
  }

  bool is_identity() const {
    for (int i = 0; i < D; ++i)
      if (perm[static_cast<std::size_t>(i)] != i || sign[static_cast<std::size_t>(i)] != 1) return false;
    return true;
  }

  Point<D> operator()(const Point<D>& x) const {
    Point<D> y{};
    for (std::size_t i = 0; i < D; ++i) y[i] = sign[i] * x[static_cast<std::size_t>(perm[i])];
    return y;
  }

  SignedPermutation inverse() const {
    SignedPermutation g;
    for (std::size_t i = 0; i < D; ++i) {
      g.perm[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
      g.sign[static_cast<std::size_t>(perm[i])] = sign[i];
    }
    return g;
  }
};

struct PivotOptions {
  /// Allow g = identity as a proposal (a guaranteed no-op acceptance).
  bool include_identity = false;
};

/// State of the pivot chain: the walk, the occupancy index site -> step,
/// the RNG stream and acceptance counters.
template <int D>
class PivotChain {
 public:
  /// Starts from the straight rod along +e_0.
  PivotChain(int n, Rng rng, PivotOptions opt = {}) : n_(n), rng_(rng), opt_(opt) {
    if (n < 2) throw ConfigurationError("walk-mc", "pivot chain needs n >= 2");
    const double span = std::pow(2.0 * n + 1.0, D);
    if (span >= 1.8e19) throw ConfigurationError("walk-mc", "walk too long to pack coordinates");
    walk_.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
      walk_[static_cast<std::size_t>(i)].fill(0);
      walk_[static_cast<std::size_t>(i)][0] = i;
    }
    rebuild(index_);
  }

  int length() const { return n_; }
  const std::vector<Point<D>>& walk() const { return walk_; }
  std::uint64_t attempted() const { return attempted_; }
  std::uint64_t accepted() const { return accepted_; }
  double acceptance_rate() const { return attempted_ ? static_cast<double>(accepted_) / static_cast<double>(attempted_) : 0.0; }

  double end_to_end_sq() const {
    double s = 0;
    for (auto c : walk_.back()) s += static_cast<double>(c * c);
    return s;
  }

  /// One proposal with pivot site k uniform in {0..n-1} and g uniform over
  /// the point group (identity excluded unless configured).
  bool step() {
    const int k = static_cast<int>(rng_.below(static_cast<std::uint64_t>(n_)));
    SignedPermutation<D> g = SignedPermutation<D>::random(rng_);
    while (!opt_.include_identity && g.is_identity()) g = SignedPermutation<D>::random(rng_);
    return try_pivot(k, g);
  }

  /// Proposes ω'(i) = ω(i) for i <= k and ω(k) + g(ω(i) - ω(k)) for i > k;
  /// accepts iff ω' is self-avoiding.
  bool try_pivot(int k, const SignedPermutation<D>& g) {
    if (k < 0 || k >= n_) throw ConfigurationError("walk-mc", "pivot index out of range");
    ++attempted_;
    const Point<D> pivot = walk_[static_cast<std::size_t>(k)];
    proposal_.clear();
    for (int i = k + 1; i <= n_; ++i) {
      Point<D> rel;
      for (std::size_t a = 0; a < D; ++a) rel[a] = walk_[static_cast<std::size_t>(i)][a] - pivot[a];
      Point<D> img = g(rel);
      for (std::size_t a = 0; a < D; ++a) img[a] += pivot[a];
      auto it = index_.find(pack(img));
      if (it != index_.end() && it->second <= k) return false;
      proposal_.push_back(img);
    }
    for (int i = k + 1; i <= n_; ++i) index_.erase(pack(walk_[static_cast<std::size_t>(i)]));
    for (int i = k + 1; i <= n_; ++i) {
      walk_[static_cast<std::size_t>(i)] = proposal_[static_cast<std::size_t>(i - k - 1)];
      index_.emplace(pack(walk_[static_cast<std::size_t>(i)]), i);
    }
    ++accepted_;
    return true;
  }

  /// Occupancy index rebuilt from scratch equals the maintained one, the
  /// walk starts at the origin, has unit steps and no repeated site.
  bool consistent() const {
    std::unordered_map<std::uint64_t, int> fresh;
    rebuild(fresh);
    if (fresh.size() != walk_.size() || fresh != index_) return false;
    for (auto c : walk_.front())
      if (c != 0) return false;
    for (std::size_t i = 1; i < walk_.size(); ++i) {
      std::int64_t l1 = 0;
      for (std::size_t a = 0; a < D; ++a) l1 += std::abs(walk_[i][a] - walk_[i - 1][a]);
      if (l1 != 1) return false;
    }
    return true;
  }

 private:
  std::uint64_t pack(const Point<D>& p) const {
    const auto side = static_cast<std::uint64_t>(2 * n_ + 1);
    std::uint64_t key = 0;
    for (int a = D - 1; a >= 0; --a) key = key * side + static_cast<std::uint64_t>(p[static_cast<std::size_t>(a)] + n_);
    return key;
  }

  void rebuild(std::unordered_map<std::uint64_t, int>& idx) const {
    idx.clear();
    idx.reserve(walk_.size() * 2);
    for (std::size_t i = 0; i < walk_.size(); ++i) idx.emplace(pack(walk_[i]), static_cast<int>(i));
  }

  int n_;
  Rng rng_;
  PivotOptions opt_;
  std::vector<Point<D>> walk_;
  std::vector<Point<D>> proposal_;
  std::unordered_map<std::uint64_t, int> index_;
  std::uint64_t attempted_ = 0;
  std::uint64_t accepted_ = 0;
};

/// Per-length end-to-end statistics.
struct DisplacementSample {
  int n = 0;
  double mean_r2 = 0.0;  ///< sample mean of |ω(n)|²
  double stderr_r2 = 0.0;
  std::uint64_t samples = 0;
  double acceptance = 0.0;
};

struct NuEstimate {
  double nu = 0.0;
  double stderr = 0.0;
  double ci_low = 0.0;   ///< nu ± 2 stderr
  double ci_high = 0.0;
  double rms_residual = 0.0;
  std::vector<DisplacementSample> per_length;
};

struct PivotRunConfig {
  std::uint64_t burn_in = 0;           ///< accepted moves discarded (0: 10 n)
  std::uint64_t accepted_samples = 100000;  ///< accepted moves while recording
  std::uint64_t seed = 1;
  unsigned threads = 1;  ///< lengths run as independent replicas
  PivotOptions options{};
};

/// Runs one chain at length n: burn-in then R² after every attempt.
template <int D>
DisplacementSample run_pivot_length(int n, const PivotRunConfig& cfg) {
  PivotChain<D> chain(n, Rng(cfg.seed, static_cast<std::uint64_t>(n)), cfg.options);
  const std::uint64_t burn = cfg.burn_in ? cfg.burn_in : 10ull * static_cast<std::uint64_t>(n);
  while (chain.accepted() < burn) {
    chain.step();
    if (chain.attempted() >= 1000 && chain.attempted() > 100 * (burn + 10) && chain.acceptance_rate() < 0.01)
      throw MixingFailure("walk-mc", "acceptance " + std::to_string(chain.acceptance_rate()) + " below 1% during burn-in at n=" +
                                         std::to_string(n) + " after " + std::to_string(chain.attempted()) + " attempts");
  }
  const std::uint64_t acc0 = chain.accepted(), att0 = chain.attempted();
  std::vector<double> series;
  series.reserve(static_cast<std::size_t>(cfg.accepted_samples * 2));
  while (chain.accepted() - acc0 < cfg.accepted_samples) {
    chain.step();
    series.push_back(chain.end_to_end_sq());
  }
  DisplacementSample s;
  s.n = n;
  s.samples = series.size();
  s.mean_r2 = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
  s.stderr_r2 = batch_means_stderr(series, 50);
  s.acceptance = static_cast<double>(chain.accepted() - acc0) / static_cast<double>(chain.attempted() - att0);
  return s;
}

inline DisplacementSample run_pivot_length(int d, int n, const PivotRunConfig& cfg) {
  switch (d) {
    case 1: return run_pivot_length<1>(n, cfg);
    case 2: return run_pivot_length<2>(n, cfg);
    case 3: return run_pivot_length<3>(n, cfg);
    case 4: return run_pivot_length<4>(n, cfg);
    case 5: return run_pivot_length<5>(n, cfg);
    default: throw ConfigurationError("walk-mc", "dimension must be in 1..5");
  }
}

/// Least-squares slope of log R_n against log n, R_n = sqrt(mean R²).
inline NuEstimate fit_nu(std::vector<DisplacementSample> samples) {
  std::vector<double> x, y, sig;
  for (const auto& s : samples) {
    x.push_back(std::log(static_cast<double>(s.n)));
    y.push_back(0.5 * std::log(s.mean_r2));
    sig.push_back(std::max(0.5 * s.stderr_r2 / s.mean_r2, 1e-12));
  }
  const auto f = fit_line_weighted(x, y, sig);
  NuEstimate e;
  e.nu = f.slope;
  e.stderr = f.slope_stderr;
  e.ci_low = f.slope - 2 * f.slope_stderr;
  e.ci_high = f.slope + 2 * f.slope_stderr;
  e.rms_residual = f.rms_residual;
  e.per_length = std::move(samples);
  return e;
}

inline NuEstimate estimate_nu(int d, const std::vector<int>& n_grid, const PivotRunConfig& cfg) {
  if (n_grid.size() < 2) throw ConfigurationError("walk-mc", "need at least two lengths");
  const auto [lo, hi] = std::minmax_element(n_grid.begin(), n_grid.end());
  if (*hi < 4 * *lo) throw ConfigurationError("walk-mc", "length grid must span at least a factor 4");
  std::vector<DisplacementSample> samples(n_grid.size());
  std::vector<std::exception_ptr> errs(n_grid.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(n_grid.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n_grid.size(); i += workers) {
          try {
            samples[i] = run_pivot_length(d, n_grid[i], cfg);
          } catch (...) {
            errs[i] = std::current_exception();
          }
        }
      });
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return fit_nu(std::move(samples));
}

}  // namespace walkrg
