#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "walkrg/gaussian.hpp"
#include "walkrg/stats.hpp"

using namespace walkrg;

namespace {

using Poly = Polynomial<double>;

Poly var(int v) { return Poly::variable(v); }

// Isserlis by explicit enumeration of perfect matchings of the factor list.
double wick_oracle(std::vector<int> factors, const KernelCovariance& C) {
  if (factors.empty()) return 1.0;
  if (factors.size() % 2) return 0.0;
  const int first = factors.front();
  double s = 0;
  for (std::size_t k = 1; k < factors.size(); ++k) {
    std::vector<int> rest;
    for (std::size_t i = 1; i < factors.size(); ++i)
      if (i != k) rest.push_back(factors[i]);
    s += C(static_cast<std::size_t>(first), static_cast<std::size_t>(factors[k])) * wick_oracle(rest, C);
  }
  return s;
}

Poly random_poly(Rng& rng, int sites, int degree, int terms) {
  Poly p;
  for (int t = 0; t < terms; ++t) {
    Monomial m{};
    const int deg = static_cast<int>(rng.below(static_cast<std::uint64_t>(degree) + 1));
    for (int k = 0; k < deg; ++k) ++m[rng.below(static_cast<std::uint64_t>(sites))];
    p.add_term(m, 2 * rng.uniform() - 1);
  }
  return p;
}

}  // namespace

TEST(Covariance, SmallTorusMultipliers) {
  const TorusLattice t(1, 2, 2);
  const double m2 = 0.3;
  const auto C = build_covariance(t, 2.0, m2);
  const std::vector<double> want{1 / m2, 1 / (2 + m2), 1 / (4 + m2), 1 / (2 + m2)};
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(C.kernel.multipliers()[k], want[k], 1e-15);
}

TEST(Covariance, ZeroModeIdentityAndSpectrumBounds) {
  for (auto [d, L, N, alpha, m2] : {std::tuple{1, 2, 6, 0.55, 0.01}, std::tuple{2, 2, 4, 1.5, 0.2}, std::tuple{3, 3, 2, 2.0, 1.0}}) {
    const TorusLattice t(d, L, N);
    const auto C = build_covariance(t, alpha, m2);
    const auto& row = C.kernel.row();
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1 / m2, 1e-10 * std::max(1.0, 1 / m2));
    for (double m : C.kernel.multipliers()) {
      EXPECT_GT(m, 0.0);
      EXPECT_LE(m, 1 / m2 * (1 + 1e-15));
    }
    const auto back = fft::spectrum_from_kernel(t, row);
    for (std::size_t k = 0; k < back.size(); ++k) EXPECT_NEAR(back[k], C.kernel.multipliers()[k], 1e-10);
    EXPECT_NEAR(C(1, 0), C(0, 1), 1e-15);
  }
  EXPECT_THROW(build_covariance(TorusLattice(1, 2, 3), 1.0, 0.0), DomainError);
  EXPECT_THROW(build_covariance(TorusLattice(1, 2, 3), 1.0, -1.0), DomainError);
}

TEST(Decomposition, ReconstructsAndIsPositive) {
  for (auto [d, L, N] : {std::tuple{1, 2, 10}, std::tuple{2, 2, 5}, std::tuple{2, 3, 3}, std::tuple{3, 2, 3}}) {
    const TorusLattice t(d, L, N);
    const auto C = build_covariance(t, 1.2, 0.05);
    const auto dec = decompose(C);
    ASSERT_EQ(dec.size(), N);
    EXPECT_LE(dec.reconstruction_error, 1e-9);
    std::vector<double> sum(t.volume(), 0.0);
    for (int j = 1; j <= N; ++j) {
      EXPECT_GE(dec.min_multiplier[static_cast<std::size_t>(j - 1)], -1e-10);
      for (std::size_t x = 0; x < t.volume(); ++x) sum[x] += dec.piece(j).row()[x];
    }
    for (std::size_t x = 0; x < t.volume(); ++x) EXPECT_NEAR(sum[x], C.kernel.row()[x], 1e-9);
  }
}

TEST(Decomposition, SingleScaleIsWholeCovariance) {
  const TorusLattice t(1, 4, 1);
  const auto C = build_covariance(t, 2.0, 0.5);
  const auto dec = decompose(C);
  ASSERT_EQ(dec.size(), 1);
  for (std::size_t x = 0; x < t.volume(); ++x) EXPECT_NEAR(dec.piece(1).row()[x], C.kernel.row()[x], 1e-15);
}

TEST(Decomposition, WindowsFormPartitionOfUnity) {
  for (double t : {-3.0, -0.2, 0.0, 0.4, 1.0, 2.7, 5.5, 9.0, 30.0}) {
    double s = 0;
    for (int j = 1; j <= 8; ++j) {
      EXPECT_GE(scale_window(j, 8, t), 0.0);
      s += scale_window(j, 8, t);
    }
    EXPECT_NEAR(s, 1.0, 1e-15);
  }
}

TEST(Decomposition, FluctuationSizeScaling) {
  const int L = 2, N = 12;
  const double alpha = 0.55;
  const TorusLattice t(1, L, N);
  const auto dec = decompose(build_covariance(t, alpha, 1e-6));
  Rng rng(17);
  for (int j = 3; j <= 8; ++j) {
    RunningStats sq;
    for (int s = 0; s < 50; ++s) {
      const auto f = sample_field(dec.piece(j + 1), rng);
      for (double v : f.values()) sq.add(v * v);
    }
    const double rms = std::sqrt(sq.mean());
    const double typical = std::pow(static_cast<double>(L), -j * (1 - alpha) / 2);
    EXPECT_GT(rms / typical, 1.0 / 3) << "j=" << j;
    EXPECT_LT(rms / typical, 3.0) << "j=" << j;
  }
}

TEST(Sampling, ZeroCovarianceGivesZeroField) {
  const TorusLattice t(2, 2, 2);
  const auto zero = kernel_from_multipliers(t, std::vector<double>(t.volume(), 0.0));
  Rng rng(1);
  const auto f = sample_field(zero, rng);
  for (double v : f.values()) EXPECT_EQ(v, 0.0);
}

TEST(Sampling, EmpiricalCovarianceMatches) {
  const TorusLattice t(1, 2, 3);
  const auto dec = decompose(build_covariance(t, 1.0, 0.5));
  const auto& Cj = dec.piece(2);
  const std::size_t V = t.volume();
  const int samples = 10000;
  std::vector<RunningStats> prod(V * V);
  Rng rng(3);
  for (int s = 0; s < samples; ++s) {
    const auto f = sample_field(Cj, rng);
    for (std::size_t x = 0; x < V; ++x)
      for (std::size_t y = 0; y < V; ++y) prod[x * V + y].add(f(x, 0) * f(y, 0));
  }
  for (std::size_t x = 0; x < V; ++x)
    for (std::size_t y = 0; y < V; ++y)
      EXPECT_NEAR(prod[x * V + y].mean(), Cj(x, y), 5 * prod[x * V + y].stderr_of_mean() + 1e-14) << x << "," << y;
}

TEST(Sampling, FiniteRangeDecorrelatesFarSites) {
  const TorusLattice t(1, 2, 4);
  const auto C = finite_range_covariance(t, 3);
  EXPECT_EQ(C(0, 8), 0.0);
  EXPECT_EQ(C(0, 3), 0.0);
  EXPECT_GT(C(0, 2), 0.0);
  for (double m : C.multipliers()) EXPECT_GE(m, -1e-12);
  Rng rng(4);
  RunningStats corr;
  for (int s = 0; s < 10000; ++s) {
    const auto f = sample_field(C, rng);
    corr.add(f(0, 0) * f(8, 0));
  }
  EXPECT_NEAR(corr.mean(), 0.0, 5 * corr.stderr_of_mean());
}

TEST(Wick, SmallMoments) {
  const TorusLattice t(1, 2, 2);
  const auto C = build_covariance(t, 1.0, 0.7).kernel;
  const double cxx = C(1, 1), cyy = C(3, 3), cxy = C(1, 3);
  EXPECT_NEAR(expect_poly(C, var(1) * var(1)).coefficient(Monomial{}), cxx, 1e-15);
  EXPECT_NEAR(expect_poly(C, var(1).pow(4)).coefficient(Monomial{}), 3 * cxx * cxx, 1e-14);
  EXPECT_NEAR(expect_poly(C, var(1).pow(2) * var(3).pow(2)).coefficient(Monomial{}), cxx * cyy + 2 * cxy * cxy, 1e-14);
  EXPECT_EQ(expect_poly(C, var(1).pow(3)).terms().size(), 0u);
}

TEST(Wick, MatchesPairingEnumeration) {
  const TorusLattice t(1, 2, 3);
  const auto C = build_covariance(t, 1.3, 0.4).kernel;
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<int> factors;
    const int deg = 2 * static_cast<int>(1 + rng.below(4));
    Monomial m{};
    for (int k = 0; k < deg; ++k) {
      const int x = static_cast<int>(rng.below(8));
      factors.push_back(x);
      ++m[static_cast<std::size_t>(x)];
    }
    const double got = expect_poly(C, Poly::monomial(m, 1.0)).coefficient(Monomial{});
    EXPECT_NEAR(got, wick_oracle(factors, C), 1e-12 * std::abs(got) + 1e-14);
  }
}

TEST(Wick, MatchesMonteCarlo) {
  const TorusLattice t(1, 2, 2);
  const auto C = build_covariance(t, 1.0, 0.8).kernel;
  Rng prng(21);
  for (int rep = 0; rep < 5; ++rep) {
    const Poly p = random_poly(prng, 4, 4, 6);
    const double exact = expect_poly(C, p).coefficient(Monomial{});
    Rng rng(100 + static_cast<std::uint64_t>(rep));
    RunningStats mc;
    for (int s = 0; s < 100000; ++s) mc.add(p.evaluate(sample_field(C, rng).values()));
    EXPECT_NEAR(mc.mean(), exact, 5 * mc.stderr_of_mean());
  }
}

TEST(Wick, DegreeCap) {
  const TorusLattice t(1, 2, 2);
  const auto C = build_covariance(t, 1.0, 0.8).kernel;
  EXPECT_THROW(expect_poly(C, var(0).pow(10)), ComplexityError);
  EXPECT_NO_THROW(expect_poly(C, var(0).pow(10), 10));
}

TEST(Progressive, QuadraticExample) {
  const TorusLattice t(1, 2, 2);
  const auto c1 = build_covariance(t, 2.0, 1.0).kernel;
  const auto c2 = finite_range_covariance(t, 1, 0.5);
  const auto r = progressive_check(c1, c2, var(2) * var(2));
  Poly want = var(2) * var(2) + Poly::constant(c1(2, 2) + c2(2, 2));
  EXPECT_LT(max_coefficient_difference(r.direct, want), 1e-15);
  EXPECT_LT(max_coefficient_difference(r.progressive, want), 1e-15);
}

TEST(Progressive, QuarticOnFourSites) {
  const TorusLattice t(1, 2, 2);
  const auto dec = decompose(build_covariance(t, 2.0, 0.3));
  const auto r = progressive_check(dec.piece(1), dec.piece(2), var(0).pow(4));
  EXPECT_LT(r.residual, 1e-10);
  EXPECT_GT(r.direct.terms().size(), 2u);
}

TEST(Progressive, RandomSextics) {
  const TorusLattice t(1, 3, 1);
  const auto c1 = build_covariance(t, 0.7, 0.4).kernel;
  const auto c2 = finite_range_covariance(t, 1, 0.8);
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Poly p = random_poly(rng, 3, 6, 8);
    EXPECT_LT(progressive_check(c1, c2, p).residual, 1e-9);
  }
}

TEST(Beta, VanishesAtFormalMinusEight) {
  const auto dec = decompose(build_covariance(TorusLattice(1, 2, 8), 0.55, 1e-4));
  for (double b : beta_sequence(dec, -8, 0.1)) EXPECT_EQ(b, 0.0);
  EXPECT_THROW(beta_j(dec, 0, 1, 0.1), ConfigurationError);
  EXPECT_THROW(beta_j(dec, 8, 1, 0.1), ConfigurationError);
}

TEST(Beta, TailStabilizes) {
  for (int N : {8, 12}) {
    const auto dec = decompose(build_covariance(TorusLattice(1, 2, N), 0.55, 1e-6));
    const auto b = beta_sequence(dec, 1, 0.1);
    const std::size_t start = b.size() - std::max<std::size_t>(1, b.size() / 3);
    for (std::size_t j = start; j + 1 < b.size(); ++j) {
      EXPECT_TRUE(std::isfinite(b[j]));
      EXPECT_LE(std::abs(b[j + 1] - b[j]) / std::abs(b[j]), 0.2);
    }
    EXPECT_NEAR(beta_tail_average(b), b.back(), 0.2 * b.back());
  }
}

TEST(Beta, DoublingVolumeKeepsEarlyScales) {
  const auto a = decompose(build_covariance(TorusLattice(1, 2, 7), 0.55, 1e-3));
  const auto b = decompose(build_covariance(TorusLattice(1, 2, 14), 0.55, 1e-3));
  for (int j = 1; j <= 4; ++j) EXPECT_NEAR(beta_j(a, j, 1, 0.1), beta_j(b, j, 1, 0.1), 1e-6);
}

TEST(Beta, MatchesTorusParsevalAtEarlyScales) {
  const auto dec = decompose(build_covariance(TorusLattice(1, 2, 16), 0.55, 1e-3));
  for (int j = 1; j <= 4; ++j) EXPECT_NEAR(beta_j(dec, j, 1, 0.1), beta_j_torus(dec, j, 1, 0.1), 1e-6);
}
