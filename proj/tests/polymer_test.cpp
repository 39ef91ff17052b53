#include <gtest/gtest.h>

#include <map>

#include "walkrg/polymer.hpp"

using namespace walkrg;

namespace {

using Poly = Polynomial<double>;

std::int64_t small_int(Rng& rng) { return static_cast<std::int64_t>(rng.below(11)) - 5; }

// Random integer-valued functional, tabulated over all polymers of a scale.
PolymerFunctional<std::int64_t> random_int_functional(const TorusLattice& t, int j, Rng& rng) {
  auto table = std::make_shared<std::map<Polymer, std::int64_t>>();
  for_each_subpolymer(full_polymer(t, j), [&](const Polymer& X, std::uint64_t) { (*table)[X] = small_int(rng); });
  return PolymerFunctional<std::int64_t>(j, [table](const Polymer& X) { return table->at(X); });
}

Poly random_site_poly(Rng& rng, std::size_t site, int degree) {
  Poly p = Poly::constant(2 * rng.uniform() - 1);
  Poly phi = Poly::variable(static_cast<int>(site));
  Poly power = Poly::constant(1.0);
  for (int k = 1; k <= degree; ++k) {
    power = power * phi;
    p += power * (2 * rng.uniform() - 1);
  }
  return p;
}

// Random polynomial of total degree <= degree in the sites of X.
Poly random_polymer_poly(const TorusLattice& t, const Polymer& X, Rng& rng, int degree) {
  const auto sites = X.sites(t);
  Poly p = Poly::constant(2 * rng.uniform() - 1);
  if (sites.empty()) return p;
  for (int term = 0; term < 4; ++term) {
    Monomial m{};
    const int deg = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(degree)));
    for (int k = 0; k < deg; ++k) ++m[sites[rng.below(sites.size())]];
    p.add_term(m, 2 * rng.uniform() - 1);
  }
  return p;
}

PolyBlockFactorized random_block_factorized(const TorusLattice& t, int j, Rng& rng, int degree) {
  auto per = std::make_shared<std::vector<Poly>>();
  for (std::size_t b = 0; b < t.block_count(j); ++b) {
    Poly v = Poly::constant(1.0);
    for (auto x : t.block_sites(j, b)) v = v * random_site_poly(rng, x, degree);
    per->push_back(v);
  }
  return PolyBlockFactorized(j, [per](std::size_t b) { return (*per)[b]; });
}

}  // namespace

TEST(CircleProduct, UnitCommutativeAssociative) {
  const TorusLattice t(1, 2, 2);
  Rng rng(1);
  const auto F = random_int_functional(t, 0, rng);
  const auto G = random_int_functional(t, 0, rng);
  const auto H = random_int_functional(t, 0, rng);
  const auto one = circle_unit<std::int64_t>(0);
  const auto FG = circle<std::int64_t>(F, G);
  const auto GH = circle<std::int64_t>(G, H);
  for_each_subpolymer(full_polymer(t, 0), [&](const Polymer& X, std::uint64_t) {
    EXPECT_EQ(circle_product<std::int64_t>(F, one, X), F(X));
    EXPECT_EQ(circle_product<std::int64_t>(F, G, X), circle_product<std::int64_t>(G, F, X));
    EXPECT_EQ(circle_product<std::int64_t>(FG, H, X), circle_product<std::int64_t>(F, GH, X));
  });
  const Polymer empty(0, {});
  EXPECT_EQ(circle_product<std::int64_t>(F, G, empty), F(empty) * G(empty));
}

TEST(CircleProduct, BinomialForBlockFactorized) {
  const TorusLattice t(2, 2, 2);  // 16 blocks at scale 0, 4 at scale 1
  Rng rng(2);
  std::vector<std::int64_t> f(16), g(16);
  for (auto& v : f) v = small_int(rng);
  for (auto& v : g) v = small_int(rng);
  const BlockFactorized<std::int64_t> F(0, [&](std::size_t b) { return f[b]; });
  const BlockFactorized<std::int64_t> G(0, [&](std::size_t b) { return g[b]; });
  for (std::uint64_t mask : {0ull, 1ull, 0x5ull, 0xF0Full, 0x3FFull}) {
    const auto X = Polymer::from_mask(0, full_polymer(t, 0).blocks(), mask);
    std::int64_t want = 1;
    for (auto b : X.blocks()) want *= f[b] + g[b];
    EXPECT_EQ(circle_product<std::int64_t>(F, G, X), want);
  }
}

TEST(CircleProduct, PolynomialUnit) {
  const TorusLattice t(1, 2, 2);
  Rng rng(3);
  const PolyFunctional F(0, [&](const Polymer& X) { return random_polymer_poly(t, X, rng, 2); });
  const auto one = circle_unit<Poly>(0);
  for_each_subpolymer(full_polymer(t, 0), [&](const Polymer& X, std::uint64_t) {
    EXPECT_EQ(max_coefficient_difference(circle_product<Poly>(F, one, X), F(X)), 0.0);
  });
}

TEST(CircleProduct, ScaleMismatch) {
  const TorusLattice t(1, 2, 2);
  const auto one = circle_unit<std::int64_t>(0);
  EXPECT_THROW(circle_product<std::int64_t>(one, one, full_polymer(t, 1)), ConfigurationError);
}

TEST(Reblock, ClosuresPartitionPolymers) {
  const TorusLattice t(1, 2, 3);
  std::map<Polymer, int> count;
  for_each_subpolymer(full_polymer(t, 0), [&](const Polymer& X, std::uint64_t) { ++count[closure(t, X)]; });
  int total = 0;
  for (const auto& [U, c] : count) total += c;
  EXPECT_EQ(total, 256);
  EXPECT_EQ(count.size(), 16u);
}

TEST(Reblock, VanishingDeltaI) {
  const TorusLattice t(1, 2, 2);
  std::vector<double> c(4);
  Rng rng(4);
  for (auto& v : c) v = 1 + rng.uniform();
  const PolyBlockFactorized I(0, [&](std::size_t b) { return Poly::constant(c[b]); });
  const Reblocker rb(t, I, I, circle_unit<Poly>(0), GaussianStep(finite_range_covariance(t, 1)));
  for_each_subpolymer(full_polymer(t, 1), [&](const Polymer& U, std::uint64_t) {
    const auto k = rb.K_tilde(U);
    if (U.empty()) {
      EXPECT_EQ(max_coefficient_difference(k, Poly::constant(1.0)), 0.0);
    } else {
      EXPECT_TRUE(k.is_zero());
    }
  });
}

TEST(Reblock, ReblockingIdentityRandomInstances) {
  const TorusLattice t(1, 2, 2);
  const auto dec = decompose(build_covariance(t, 1.5, 0.5));
  for (int inst = 0; inst < 20; ++inst) {
    Rng rng(100 + static_cast<std::uint64_t>(inst));
    const auto I = random_block_factorized(t, 0, rng, 2);
    const auto Ip = random_block_factorized(t, 0, rng, 2);
    auto table = std::make_shared<std::map<Polymer, Poly>>();
    for_each_subpolymer(full_polymer(t, 0), [&](const Polymer& X, std::uint64_t) { (*table)[X] = random_polymer_poly(t, X, rng, 2); });
    const PolyFunctional K(0, [table](const Polymer& X) { return table->at(X); });
    const KernelCovariance cov = inst % 2 ? dec.piece(1) : dec.piece(2);
    const Reblocker rb(t, I, Ip, K, GaussianStep(cov));
    const auto lhs = rb.lhs(), rhs = rb.rhs();
    EXPECT_LT(max_coefficient_difference(lhs, rhs), 1e-9) << "instance " << inst;
    EXPECT_GT(lhs.terms().size(), 1u);
  }
}

namespace {

// K factorizing over scale-j connected components, affine on each component.
PolyFunctional component_factorized_K(const TorusLattice& t, int j, Rng& rng) {
  auto table = std::make_shared<std::map<Polymer, Poly>>();
  for_each_subpolymer(full_polymer(t, j), [&](const Polymer& X, std::uint64_t) {
    if (connected_components(t, X).size() == 1) (*table)[X] = random_polymer_poly(t, X, rng, 1);
  });
  return PolyFunctional(j, [table, t](const Polymer& X) {
    Poly v = Poly::constant(1.0);
    for (const auto& c : connected_components(t, X)) v = v * table->at(c);
    return v;
  });
}

double reblocked_defect(int range) {
  const TorusLattice t(1, 2, 3);
  Rng rng(9);
  const auto I = random_block_factorized(t, 0, rng, 1);
  const auto Ip = random_block_factorized(t, 0, rng, 1);
  const auto K = component_factorized_K(t, 0, rng);
  EXPECT_LT(component_factorization_defect(t, K), 1e-15);
  const Reblocker rb(t, I, Ip, K, GaussianStep(finite_range_covariance(t, range, 0.7)));
  return component_factorization_defect(t, rb.K_tilde_functional());
}

}  // namespace

TEST(Factorization, DisconnectedExpectationsFactor) {
  const TorusLattice t(1, 2, 3);
  const GaussianStep step(finite_range_covariance(t, 1, 0.9));
  Rng rng(6);
  const Polymer X(1, {0}), Y(1, {2});  // sites {0,1} and {4,5}
  ASSERT_TRUE(disconnected(t, X, Y));
  const Poly F = step.theta(random_polymer_poly(t, X, rng, 3));
  const Poly G = step.theta(random_polymer_poly(t, Y, rng, 3));
  EXPECT_LT(max_coefficient_difference(step.expect(F * G), step.expect(F) * step.expect(G)), 1e-12);
}

TEST(Factorization, CorrelatedNeighboursDoNotFactor) {
  const TorusLattice t(1, 2, 3);
  const GaussianStep step(finite_range_covariance(t, 2, 0.9));
  const Polymer X(1, {0}), Y(1, {1});  // adjacent blocks, C_{1,2} != 0
  const Poly F = step.theta(Poly::variable(1));
  const Poly G = step.theta(Poly::variable(2));
  EXPECT_GT(max_coefficient_difference(step.expect(F * G), step.expect(F) * step.expect(G)), 0.1);
}

TEST(Factorization, ReblockingPreservesComponents) {
  EXPECT_LT(reblocked_defect(1), 1e-12);  // finite range ½L^{j+1}: diagonal
  EXPECT_LT(reblocked_defect(2), 1e-12);  // nearest-neighbour correlations
  EXPECT_GT(reblocked_defect(4), 1e-6);   // reaches across a one-block gap
}
