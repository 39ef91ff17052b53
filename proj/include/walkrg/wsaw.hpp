#pragma once

// Continuous-time weakly self-avoiding walk: trajectories with per-site local
// times, the self-intersection local time I(T), c_{T,g} = E e^{-gI(T)} and
// the susceptibility χ(g,ν) = ∫ c_{T,g} e^{-νT} dT.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "walkrg/errors.hpp"
#include "walkrg/graph.hpp"
#include "walkrg/lattice.hpp"
#include "walkrg/longrange.hpp"
#include "walkrg/rng.hpp"
#include "walkrg/stats.hpp"

namespace walkrg {

/// Jump generator: nearest-neighbour on Z^d (rate 1 per neighbour, so mean
/// holding time 1/(2d)), truncated long-range, or the Laplacian of a finite
/// graph (site = vertex index in coordinate 0).
class WalkGenerator {
 public:
  enum class Kind { NearestNeighbour, LongRange, Graph };

  static WalkGenerator nearest_neighbour(int d) {
    if (d < 1 || d > kMaxDim) throw ConfigurationError("wsaw-ct", "dimension must be in 1..5");
    WalkGenerator g(Kind::NearestNeighbour);
    g.d_ = d;
    return g;
  }

  static WalkGenerator long_range(std::shared_ptr<const LongRangeStepSampler> steps) {
    WalkGenerator g(Kind::LongRange);
    g.d_ = steps->dim();
    g.steps_ = std::move(steps);
    return g;
  }

  static WalkGenerator graph(const WeightedGraph& graph, std::size_t start = 0) {
    if (start >= graph.size()) throw ConfigurationError("wsaw-ct", "start vertex out of range");
    WalkGenerator g(Kind::Graph);
    g.d_ = 1;
    g.start_ = start;
    g.name_ = graph.name();
    for (std::size_t x = 0; x < graph.size(); ++x) {
      std::vector<double> w(graph.size());
      for (std::size_t y = 0; y < graph.size(); ++y) w[y] = x == y ? 0.0 : graph.weight(x, y);
      g.rates_.push_back(graph.degree(x));
      g.targets_.emplace_back(w.begin(), w.end());
    }
    return g;
  }

  Kind kind() const { return kind_; }
  int dim() const { return d_; }

  Coord start() const {
    Coord c{};
    if (kind_ == Kind::Graph) c[0] = static_cast<std::int64_t>(start_);
    return c;
  }

  /// Total jump rate out of x.
  double rate(const Coord& x) const {
    switch (kind_) {
      case Kind::NearestNeighbour: return 2.0 * d_;
      case Kind::LongRange: return steps_->total_rate();
      case Kind::Graph: return rates_[static_cast<std::size_t>(x[0])];
    }
    return 0.0;
  }

  Coord jump(const Coord& x, Rng& rng) const {
    Coord y = x;
    switch (kind_) {
      case Kind::NearestNeighbour: {
        const auto dir = rng.below(2 * static_cast<std::uint64_t>(d_));
        y[dir / 2] += (dir % 2 == 0) ? 1 : -1;
        break;
      }
      case Kind::LongRange: {
        const Coord r = steps_->sample(rng);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += r[i];
        break;
      }
      case Kind::Graph: y[0] = static_cast<std::int64_t>(targets_[static_cast<std::size_t>(x[0])](rng)); break;
    }
    return y;
  }

 private:
  explicit WalkGenerator(Kind k) : kind_(k) {}

  Kind kind_;
  int d_ = 1;
  std::size_t start_ = 0;
  std::string name_;
  std::shared_ptr<const LongRangeStepSampler> steps_;
  std::vector<double> rates_;
  mutable std::vector<std::discrete_distribution<std::size_t>> targets_;
};

struct CTWalkTrajectory {
  double horizon = 0.0;
  std::vector<double> jump_times;  ///< strictly increasing, all < horizon
  std::vector<Coord> positions;    ///< positions[0] = start, positions[i] after jump i
  std::map<Coord, double> local_time;

  /// Holding interval [a, b) of the i-th position.
  std::pair<double, double> interval(std::size_t i) const {
    const double a = i == 0 ? 0.0 : jump_times[i - 1];
    const double b = i < jump_times.size() ? jump_times[i] : horizon;
    return {a, b};
  }
};

inline CTWalkTrajectory simulate_ct_walk(const WalkGenerator& gen, double T, Rng& rng) {
  if (!(T > 0.0)) throw ConfigurationError("wsaw-ct", "horizon T must be > 0");
  CTWalkTrajectory w;
  w.horizon = T;
  Coord x = gen.start();
  w.positions.push_back(x);
  double t = 0.0;
  for (;;) {
    const double r = gen.rate(x);
    const double hold = r > 0 ? -std::log1p(-rng.uniform()) / r : std::numeric_limits<double>::infinity();
    if (t + hold >= T) {
      w.local_time[x] += T - t;
      break;
    }
    w.local_time[x] += hold;
    t += hold;
    w.jump_times.push_back(t);
    x = gen.jump(x, rng);
    w.positions.push_back(x);
  }
  return w;
}

/// I(T) = Σ_x ℓ_x(T)².
inline double self_intersection_local_time(const CTWalkTrajectory& w) {
  double s = 0.0;
  for (const auto& [x, l] : w.local_time) s += l * l;
  return s;
}

struct WsawEstimate {
  double g = 0.0;
  double T = 0.0;
  std::size_t samples = 0;
  double mean = 0.0;
  double stderr = 0.0;
};

namespace detail {

// values[i] = f(i, rng for path i), computed on up to `threads` workers;
// the result does not depend on the thread count.
template <class F>
std::vector<std::vector<double>> per_path(std::size_t n, std::uint64_t seed, unsigned threads, F&& f) {
  std::vector<std::vector<double>> out(n);
  const Rng master(seed);
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<std::exception_ptr> errs(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) {
            Rng rng = master.split(i);
            out[i] = f(rng);
          }
        } catch (...) {
          errs[w] = std::current_exception();
        }
      });
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

inline std::pair<double, double> mean_stderr(const std::vector<double>& v) {
  RunningStats s;
  for (double x : v) s.add(x);
  return {s.mean(), v.size() > 1 ? std::sqrt(s.variance() / static_cast<double>(v.size())) : 0.0};
}

}  // namespace detail

/// Estimates of c_{T,g} for each g on common sample paths.
inline std::vector<WsawEstimate> estimate_c(const WalkGenerator& gen, const std::vector<double>& gs, double T,
                                            std::size_t n_samples, std::uint64_t seed, unsigned threads = 1) {
  for (double g : gs)
    if (!(g >= 0.0)) throw DomainError("wsaw-ct", "coupling g must be >= 0");
  if (n_samples == 0) throw ConfigurationError("wsaw-ct", "need at least one sample");
  const auto paths = detail::per_path(n_samples, seed, threads, [&](Rng& rng) {
    const double I = self_intersection_local_time(simulate_ct_walk(gen, T, rng));
    std::vector<double> v;
    for (double g : gs) v.push_back(std::exp(-g * I));
    return v;
  });
  std::vector<WsawEstimate> out;
  for (std::size_t k = 0; k < gs.size(); ++k) {
    std::vector<double> col(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) col[i] = paths[i][k];
    auto [m, se] = detail::mean_stderr(col);
    out.push_back({gs[k], T, n_samples, m, se});
  }
  return out;
}

inline WsawEstimate estimate_c(const WalkGenerator& gen, double g, double T, std::size_t n_samples, std::uint64_t seed,
                               unsigned threads = 1) {
  return estimate_c(gen, std::vector<double>{g}, T, n_samples, seed, threads).front();
}

struct ChiEstimate {
  double chi = 0.0;
  double mc_stderr = 0.0;
  double quadrature_error = 0.0;  ///< |Q_h - Q_{2h}|
  double tail_bound = 0.0;        ///< e^{-νT_max}/ν
  std::vector<double> T;          ///< quadrature nodes
  std::vector<double> c_mean;     ///< ĉ_{T,g} at the nodes
  std::vector<double> c_stderr;
  /// Total error bar used for comparisons.
  double error_bar() const { return 4.0 * mc_stderr + quadrature_error + tail_bound; }
};

/// I(T_k) at increasing times T_k <= horizon, sweeping the path once.
inline std::vector<double> intersection_curve(const CTWalkTrajectory& w, const std::vector<double>& times) {
  std::map<Coord, double> ell;
  std::vector<double> out;
  out.reserve(times.size());
  double I = 0.0;
  std::size_t seg = 0;
  double t = 0.0;
  for (double target : times) {
    while (t < target) {
      const auto [a, b] = w.interval(seg);
      const double stop = std::min(b, target);
      double& l = ell[w.positions[seg]];
      const double dl = stop - t;
      I += dl * (2.0 * l + dl);
      l += dl;
      t = stop;
      if (t >= b && seg + 1 < w.positions.size()) ++seg;
    }
    out.push_back(I);
  }
  return out;
}

inline ChiEstimate estimate_chi(const WalkGenerator& gen, double g, double nu, double T_max, double dT,
                                std::size_t n_samples, std::uint64_t seed, unsigned threads = 1) {
  if (!(nu > 0.0)) throw DomainError("wsaw-ct", "unsupported regime: susceptibility integration needs nu > 0");
  if (!(g >= 0.0)) throw DomainError("wsaw-ct", "coupling g must be >= 0");
  if (!(dT > 0.0) || !(T_max > dT)) throw ConfigurationError("wsaw-ct", "need 0 < dT < T_max");
  auto steps = static_cast<std::size_t>(std::llround(T_max / dT));
  if (steps % 2) ++steps;
  const double h = T_max / static_cast<double>(steps);
  std::vector<double> nodes(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) nodes[k] = h * static_cast<double>(k);

  // per path: [Q_h, Q_2h, c(T_0), ..., c(T_steps)]
  const auto paths = detail::per_path(n_samples, seed, threads, [&](Rng& rng) {
    const auto w = simulate_ct_walk(gen, T_max, rng);
    const auto I = intersection_curve(w, nodes);
    std::vector<double> v(steps + 3);
    double qh = 0, q2h = 0;
    for (std::size_t k = 0; k <= steps; ++k) {
      const double c = std::exp(-g * I[k]);
      const double f = c * std::exp(-nu * nodes[k]);
      const double end = (k == 0 || k == steps) ? 0.5 : 1.0;
      qh += end * f * h;
      if (k % 2 == 0) q2h += end * f * 2 * h;
      v[k + 2] = c;
    }
    v[0] = qh;
    v[1] = q2h;
    return v;
  });
  ChiEstimate e;
  std::vector<double> col(n_samples);
  auto column = [&](std::size_t j) {
    for (std::size_t i = 0; i < n_samples; ++i) col[i] = paths[i][j];
    return detail::mean_stderr(col);
  };
  const auto [qh, se] = column(0);
  const auto [q2h, se2] = column(1);
  e.chi = qh;
  e.mc_stderr = se;
  // the Richardson estimate |Q_h - Q_2h|/3 undershoots slightly at dT = 0.05
  e.quadrature_error = std::abs(qh - q2h);
  e.tail_bound = std::exp(-nu * T_max) / nu;
  e.T = nodes;
  for (std::size_t k = 0; k <= steps; ++k) {
    const auto [m, s] = column(k + 2);
    e.c_mean.push_back(m);
    e.c_stderr.push_back(s);
  }
  return e;
}

}  // namespace walkrg
