#pragma once

// Translation-invariant operators on the torus, diagonalized by the discrete
// Fourier basis: the -Δ spectrum and its fractional powers.

#include <cmath>
#include <numbers>
#include <vector>

#include "walkrg/errors.hpp"
#include "walkrg/fft.hpp"
#include "walkrg/lattice.hpp"

namespace walkrg {

/// Eigenvalues λ_k = Σ_i (2 - 2cos(2πk_i/P)) of -Δ, indexed like sites.
inline std::vector<double> laplacian_eigenvalues(const TorusLattice& t) {
  std::vector<double> one_axis(static_cast<std::size_t>(t.period()));
  for (std::int64_t k = 0; k < t.period(); ++k) {
    // 4 sin²(πk/P) = 2 - 2cos(2πk/P) without cancellation at small k
    const double h = std::sin(std::numbers::pi * static_cast<double>(k) / static_cast<double>(t.period()));
    one_axis[static_cast<std::size_t>(k)] = 4.0 * h * h;
  }
  std::vector<double> lam(t.volume());
  for (std::size_t s = 0; s < t.volume(); ++s) {
    const Coord k = t.coords(s);
    double v = 0;
    for (int i = 0; i < t.dim(); ++i) v += one_axis[static_cast<std::size_t>(k[i])];
    lam[s] = v;
  }
  return lam;
}

/// A real symmetric operator commuting with translations, stored as the
/// kernel row K_{0,x} together with its Fourier multipliers.
class TranslationInvariantOperator {
 public:
  TranslationInvariantOperator(TorusLattice torus, std::vector<double> row, std::vector<double> multipliers)
      : torus_(torus), row_(std::move(row)), multipliers_(std::move(multipliers)) {}

  const TorusLattice& torus() const { return torus_; }
  const std::vector<double>& row() const { return row_; }
  const std::vector<double>& multipliers() const { return multipliers_; }

  double operator()(std::size_t x, std::size_t y) const { return row_[torus_.difference(x, y)]; }

  LatticeField apply(const LatticeField& f) const {
    if (!(f.torus() == torus_)) throw ConfigurationError("lattice", "field lives on a different torus");
    LatticeField out(torus_, f.components());
    const std::size_t n = torus_.volume();
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        const double k = (*this)(x, y);
        if (k == 0.0) continue;
        for (int c = 0; c < f.components(); ++c) out(x, c) += k * f(y, c);
      }
    return out;
  }

 private:
  TorusLattice torus_;
  std::vector<double> row_;
  std::vector<double> multipliers_;
};

/// Kernel of (-Δ)^{α/2} on the torus, computed spectrally. The zero mode is
/// preserved so rows sum to 0; off-diagonal entries are <= 0 for α in (0,2].
inline TranslationInvariantOperator fractional_laplacian(const TorusLattice& t, double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("lattice", "fractional exponent alpha must lie in (0, 2]");
  auto lam = laplacian_eigenvalues(t);
  for (auto& l : lam) l = (l <= 0.0) ? 0.0 : std::pow(l, alpha / 2.0);
  auto row = fft::kernel_from_spectrum(t, lam);
  return TranslationInvariantOperator(t, std::move(row), std::move(lam));
}

}  // namespace walkrg
