#pragma once

// Random test instances shared by the CLI check modes and the acceptance
// run: polynomial observables, block-factorized I, component-factorized K.

#include <map>
#include <memory>

#include "walkrg/lattice.hpp"
#include "walkrg/polymer.hpp"
#include "walkrg/polynomial.hpp"
#include "walkrg/rng.hpp"

namespace walkrg::instances {

using Poly = Polynomial<double>;

inline double signed_unit(Rng& rng) { return 2.0 * rng.uniform() - 1.0; }

/// `terms` random monomials of degree <= degree in variables 0..vars-1.
inline Poly random_poly(Rng& rng, int vars, int degree, int terms) {
  Poly p;
  for (int t = 0; t < terms; ++t) {
    Monomial m{};
    const int deg = static_cast<int>(rng.below(static_cast<std::uint64_t>(degree) + 1));
    for (int k = 0; k < deg; ++k) ++m[rng.below(static_cast<std::uint64_t>(vars))];
    p.add_term(m, signed_unit(rng));
  }
  return p;
}

/// a_0 + a_1 φ_x + ... + a_degree φ_x^degree.
inline Poly random_site_poly(Rng& rng, std::size_t site, int degree) {
  Poly p = Poly::constant(signed_unit(rng));
  const Poly phi = Poly::variable(static_cast<int>(site));
  Poly power = Poly::constant(1.0);
  for (int k = 1; k <= degree; ++k) {
    power = power * phi;
    p += power * signed_unit(rng);
  }
  return p;
}

/// Constant plus four monomials of degree 1..degree in the sites of X.
inline Poly random_polymer_poly(const TorusLattice& t, const Polymer& X, Rng& rng, int degree) {
  const auto sites = X.sites(t);
  Poly p = Poly::constant(signed_unit(rng));
  if (sites.empty()) return p;
  for (int term = 0; term < 4; ++term) {
    Monomial m{};
    const int deg = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(degree)));
    for (int k = 0; k < deg; ++k) ++m[sites[rng.below(sites.size())]];
    p.add_term(m, signed_unit(rng));
  }
  return p;
}

inline PolyBlockFactorized random_block_factorized(const TorusLattice& t, int j, Rng& rng, int degree) {
  auto per = std::make_shared<std::vector<Poly>>();
  for (std::size_t b = 0; b < t.block_count(j); ++b) {
    Poly v = Poly::constant(1.0);
    for (auto x : t.block_sites(j, b)) v = v * random_site_poly(rng, x, degree);
    per->push_back(v);
  }
  return PolyBlockFactorized(j, [per](std::size_t b) { return (*per)[b]; });
}

/// Independent random polynomial on every scale-j polymer.
inline PolyFunctional random_functional(const TorusLattice& t, int j, Rng& rng, int degree) {
  auto table = std::make_shared<std::map<Polymer, Poly>>();
  for_each_subpolymer(full_polymer(t, j), [&](const Polymer& X, std::uint64_t) { (*table)[X] = random_polymer_poly(t, X, rng, degree); });
  return PolyFunctional(j, [table](const Polymer& X) { return table->at(X); });
}

/// K(X) = Π over connected components Y of X of a random polynomial on Y.
inline PolyFunctional component_factorized(const TorusLattice& t, int j, Rng& rng, int degree) {
  auto table = std::make_shared<std::map<Polymer, Poly>>();
  for_each_subpolymer(full_polymer(t, j), [&](const Polymer& X, std::uint64_t) {
    if (connected_components(t, X).size() == 1) (*table)[X] = random_polymer_poly(t, X, rng, degree);
  });
  return PolyFunctional(j, [table, t](const Polymer& X) {
    Poly v = Poly::constant(1.0);
    for (const auto& c : connected_components(t, X)) v = v * table->at(c);
    return v;
  });
}

}  // namespace walkrg::instances
