#include <gtest/gtest.h>

#include <cmath>

#include "walkrg/wsaw.hpp"

using namespace walkrg;

namespace {

// Double integral ∫∫ 1{X(s)=X(t)} ds dt summed over pairs of holding intervals.
double brute_force_I(const CTWalkTrajectory& w) {
  double s = 0;
  for (std::size_t i = 0; i < w.positions.size(); ++i)
    for (std::size_t j = 0; j < w.positions.size(); ++j)
      if (w.positions[i] == w.positions[j]) {
        const auto [a, b] = w.interval(i);
        const auto [c, d] = w.interval(j);
        s += (b - a) * (d - c);
      }
  return s;
}

}  // namespace

TEST(CTWalk, NoJumpProbability) {
  const auto gen = WalkGenerator::nearest_neighbour(2);
  const double T = 0.2;
  const int runs = 1'000'000;
  Rng rng(1);
  int none = 0;
  for (int i = 0; i < runs; ++i) {
    Rng r = rng.split(static_cast<std::uint64_t>(i));
    none += simulate_ct_walk(gen, T, r).jump_times.empty();
  }
  const double p = std::exp(-4 * T);
  const double sigma = std::sqrt(p * (1 - p) / runs);
  EXPECT_NEAR(static_cast<double>(none) / runs, p, 4 * sigma);
}

TEST(CTWalk, ZeroJumpTrajectory) {
  const auto gen = WalkGenerator::graph(single_site_graph());
  Rng rng(1);
  const auto w = simulate_ct_walk(gen, 3.0, rng);
  EXPECT_TRUE(w.jump_times.empty());
  ASSERT_EQ(w.local_time.size(), 1u);
  EXPECT_EQ(w.local_time.begin()->second, 3.0);
  EXPECT_EQ(self_intersection_local_time(w), 9.0);
}

TEST(CTWalk, EqualTimesOnDistinctSites) {
  CTWalkTrajectory w;
  w.horizon = 2.0;
  const int k = 4;
  for (int i = 0; i < k; ++i) {
    Coord c{};
    c[0] = i;
    w.positions.push_back(c);
    if (i > 0) w.jump_times.push_back(0.5 * i);
    w.local_time[c] = 0.5;
  }
  EXPECT_DOUBLE_EQ(self_intersection_local_time(w), 4.0 / k);
  EXPECT_DOUBLE_EQ(brute_force_I(w), 4.0 / k);
}

TEST(CTWalk, PathInvariantsAndOracle) {
  for (int d : {1, 2, 3}) {
    const auto gen = WalkGenerator::nearest_neighbour(d);
    Rng master(d);
    for (int p = 0; p < 200; ++p) {
      Rng rng = master.split(static_cast<std::uint64_t>(p));
      const double T = 0.5 + p * 0.05;
      const auto w = simulate_ct_walk(gen, T, rng);
      double total = 0;
      for (const auto& [x, l] : w.local_time) total += l;
      EXPECT_NEAR(total, T, 1e-12);
      for (std::size_t i = 1; i < w.positions.size(); ++i) {
        std::int64_t l1 = 0;
        for (std::size_t a = 0; a < w.positions[i].size(); ++a) l1 += std::abs(w.positions[i][a] - w.positions[i - 1][a]);
        ASSERT_EQ(l1, 1);
        ASSERT_LT(w.interval(i).first, w.interval(i).second);
      }
      const double I = self_intersection_local_time(w);
      EXPECT_NEAR(I, brute_force_I(w), 1e-10 * I);
      EXPECT_LE(I, T * T * (1 + 1e-14));
    }
  }
}

TEST(CTWalk, IntersectionCurveMatchesTruncatedPaths) {
  const auto gen = WalkGenerator::nearest_neighbour(1);
  Rng rng(77);
  const auto w = simulate_ct_walk(gen, 4.0, rng);
  const std::vector<double> times{0.3, 1.0, 2.5, 4.0};
  const auto I = intersection_curve(w, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    CTWalkTrajectory cut;
    cut.horizon = times[k];
    cut.positions.push_back(w.positions[0]);
    for (std::size_t i = 0; i < w.jump_times.size() && w.jump_times[i] < times[k]; ++i) {
      cut.jump_times.push_back(w.jump_times[i]);
      cut.positions.push_back(w.positions[i + 1]);
    }
    EXPECT_NEAR(I[k], brute_force_I(cut), 1e-12 * (1 + I[k]));
  }
}

TEST(WsawC, ZeroCouplingIsOne) {
  const auto e = estimate_c(WalkGenerator::nearest_neighbour(3), 0.0, 2.0, 1000, 5);
  EXPECT_EQ(e.mean, 1.0);
  EXPECT_EQ(e.stderr, 0.0);
}

TEST(WsawC, DecreasingInCoupling) {
  const auto es = estimate_c(WalkGenerator::nearest_neighbour(2), {0.0, 0.1, 0.5, 1.0, 2.0}, 1.5, 2000, 9);
  for (std::size_t i = 1; i < es.size(); ++i) EXPECT_LT(es[i].mean, es[i - 1].mean);
  for (const auto& e : es) {
    EXPECT_GT(e.mean, 0.0);
    EXPECT_LE(e.mean, 1.0);
    EXPECT_GE(e.mean, std::exp(-e.g * 1.5 * 1.5));
  }
}

TEST(WsawC, ShortTimeOneJumpExpansion) {
  // d=1: rate 2. P(no jump) = e^{-2T} with I = T²; exactly one jump at s has
  // density 2e^{-2T} and I = s² + (T-s)²; two or more jumps carry mass
  // 1 - e^{-2T}(1+2T) with e^{-gI} in [e^{-gT²}, 1].
  const double T = 0.1, g = 5.0;
  const int m = 20000;
  double one = 0;
  for (int i = 0; i < m; ++i) {
    const double s = (i + 0.5) * T / m;
    one += std::exp(-g * (s * s + (T - s) * (T - s))) * T / m;
  }
  const double base = std::exp(-2 * T) * (std::exp(-g * T * T) + 2 * one);
  const double rest = 1 - std::exp(-2 * T) * (1 + 2 * T);
  const double lo = base + rest * std::exp(-g * T * T), hi = base + rest;
  const auto e = estimate_c(WalkGenerator::nearest_neighbour(1), g, T, 200000, 3);
  EXPECT_GE(e.mean, lo - 4 * e.stderr);
  EXPECT_LE(e.mean, hi + 4 * e.stderr);
  EXPECT_NEAR(e.mean, std::exp(-g * T * T), 2 * T * (1 - std::exp(-g * T * T)) + 4 * e.stderr);
}

TEST(WsawC, ApproximatelySubmultiplicative) {
  const auto gen = WalkGenerator::nearest_neighbour(2);
  const double g = 0.5;
  const std::size_t n = 20000;
  const auto cT = estimate_c(gen, g, 1.0, n, 1);
  const auto cS = estimate_c(gen, g, 1.5, n, 2);
  const auto cTS = estimate_c(gen, g, 2.5, n, 3);
  const double prod = cT.mean * cS.mean;
  const double se = std::sqrt(cTS.stderr * cTS.stderr + cS.mean * cS.mean * cT.stderr * cT.stderr +
                              cT.mean * cT.mean * cS.stderr * cS.stderr);
  EXPECT_LE(cTS.mean, prod + 4 * se);
}

TEST(WsawC, ThreadCountDoesNotChangeResult) {
  const auto gen = WalkGenerator::nearest_neighbour(3);
  const auto a = estimate_c(gen, 0.3, 1.0, 3000, 4, 1);
  const auto b = estimate_c(gen, 0.3, 1.0, 3000, 4, 3);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.stderr, b.stderr);
}

TEST(WsawChi, FreeWalkGivesInverseMass) {
  const auto e = estimate_chi(WalkGenerator::nearest_neighbour(2), 0.0, 2.0, 10.0, 0.05, 200, 1);
  EXPECT_NEAR(e.chi, 0.5, e.error_bar() + 1e-3);
  EXPECT_LT(e.tail_bound, 1e-8);
}

TEST(WsawChi, BoundedByInverseMass) {
  const auto e = estimate_chi(WalkGenerator::nearest_neighbour(1), 1.0, 0.5, 20.0, 0.05, 500, 2);
  EXPECT_LE(e.chi, 1 / 0.5 + e.quadrature_error + 1e-12);
  EXPECT_LT(e.chi, 1 / 0.5);
}

TEST(WsawChi, NonPositiveMassRejected) {
  EXPECT_THROW(estimate_chi(WalkGenerator::nearest_neighbour(1), 1.0, 0.0, 10.0, 0.1, 10, 1), DomainError);
  EXPECT_THROW(estimate_chi(WalkGenerator::nearest_neighbour(1), 1.0, -1.0, 10.0, 0.1, 10, 1), DomainError);
}

TEST(WsawGraph, HoldingTimesFollowDegree) {
  // 2-site torus: rate 2 out of each site.
  const auto gen = WalkGenerator::graph(two_site_torus());
  Rng master(8);
  RunningStats first;
  for (int i = 0; i < 100000; ++i) {
    Rng rng = master.split(static_cast<std::uint64_t>(i));
    const auto w = simulate_ct_walk(gen, 50.0, rng);
    ASSERT_FALSE(w.jump_times.empty());
    first.add(w.jump_times.front());
    EXPECT_EQ(w.positions[1][0], 1);
  }
  EXPECT_NEAR(first.mean(), 0.5, 4 * first.stderr_of_mean());
}

TEST(WsawLongRange, JumpsUseKernel) {
  auto steps = std::make_shared<const LongRangeStepSampler>(1, 1.1);
  const auto gen = WalkGenerator::long_range(steps);
  Rng rng(2);
  const auto w = simulate_ct_walk(gen, 5.0, rng);
  double total = 0;
  for (const auto& [x, l] : w.local_time) total += l;
  EXPECT_NEAR(total, 5.0, 1e-12);
  for (std::size_t i = 1; i < w.positions.size(); ++i) {
    Coord r{};
    r[0] = w.positions[i][0] - w.positions[i - 1][0];
    EXPECT_GT(steps->rate(r), 0.0);
  }
}
