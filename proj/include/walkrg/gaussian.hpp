#pragma once

// Gaussian fields on the torus with covariance C = ((-Δ)^{α/2} + m²)^{-1}:
// spectral construction, smooth scale decomposition C = Σ_j C_j, sampling,
// exact polynomial expectations and the β_j coefficients of the flow.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "walkrg/errors.hpp"
#include "walkrg/fft.hpp"
#include "walkrg/lattice.hpp"
#include "walkrg/polynomial.hpp"
#include "walkrg/quadrature.hpp"
#include "walkrg/rng.hpp"
#include "walkrg/spectral.hpp"

namespace walkrg {

/// Covariance kernel on a torus; the operator's multipliers are the Fourier
/// eigenvalues and its row is C_{0,x}.
using KernelCovariance = TranslationInvariantOperator;

struct Covariance {
  double alpha = 2.0;
  double m2 = 1.0;
  KernelCovariance kernel;

  const TorusLattice& torus() const { return kernel.torus(); }
  double operator()(std::size_t x, std::size_t y) const { return kernel(x, y); }
};

inline Covariance build_covariance(const TorusLattice& t, double alpha, double m2) {
  if (!(m2 > 0.0)) throw DomainError("gaussian-field", "singular covariance: m^2 must be > 0 (zero mode)");
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("gaussian-field", "alpha must lie in (0, 2]");
  auto mult = laplacian_eigenvalues(t);
  for (auto& l : mult) l = 1.0 / ((l <= 0.0 ? 0.0 : std::pow(l, alpha / 2.0)) + m2);
  auto row = fft::kernel_from_spectrum(t, mult);
  return {alpha, m2, KernelCovariance(t, std::move(row), std::move(mult))};
}

/// Kernel from multipliers (must be real, even, nonnegative for a covariance).
inline KernelCovariance kernel_from_multipliers(const TorusLattice& t, std::vector<double> mult) {
  auto row = fft::kernel_from_spectrum(t, mult);
  return KernelCovariance(t, std::move(row), std::move(mult));
}

/// Kernel from a row C_{0,x}; multipliers recomputed by DFT.
inline KernelCovariance kernel_from_row(const TorusLattice& t, std::vector<double> row) {
  if (row.size() != t.volume()) throw ConfigurationError("gaussian-field", "kernel row length differs from volume");
  auto mult = fft::spectrum_from_kernel(t, row);
  return KernelCovariance(t, std::move(row), std::move(mult));
}

/// Finite-range PSD covariance a² · Π_i (r - |x_i|)_+, the autocorrelation of
/// a times the indicator of [0, r)^d; vanishes once |x|_∞ >= r.
inline KernelCovariance finite_range_covariance(const TorusLattice& t, int r, double a = 1.0) {
  if (r < 1 || 2 * r > t.period()) throw ConfigurationError("gaussian-field", "range must satisfy 1 <= r <= P/2");
  std::vector<double> row(t.volume());
  for (std::size_t x = 0; x < t.volume(); ++x) {
    const Coord c = t.coords(x);
    double v = a * a;
    for (int i = 0; i < t.dim(); ++i) v *= std::max<std::int64_t>(0, r - t.axis_distance(c[i], 0));
    row[x] = v;
  }
  return kernel_from_row(t, std::move(row));
}

/// Sum of kernels on the same torus.
inline KernelCovariance operator+(const KernelCovariance& a, const KernelCovariance& b) {
  if (!(a.torus() == b.torus())) throw ConfigurationError("gaussian-field", "kernels on different tori");
  auto row = a.row();
  auto mult = a.multipliers();
  for (std::size_t i = 0; i < row.size(); ++i) {
    row[i] += b.row()[i];
    mult[i] += b.multipliers()[i];
  }
  return KernelCovariance(a.torus(), std::move(row), std::move(mult));
}

/// C² step: 0 for u <= 0, 1 for u >= 1.
inline double smooth_step(double u) {
  u = std::clamp(u, 0.0, 1.0);
  const double s = std::sin(0.5 * std::numbers::pi * u);
  const double o = std::sin(0.5 * std::numbers::pi * s * s);
  return o * o;
}

/// Scale variable of a -Δ eigenvalue: t = -½ log_L λ, so wavelength ~ L^t.
inline double scale_of_eigenvalue(double lambda, int L) {
  return lambda <= 0.0 ? std::numeric_limits<double>::infinity() : -0.5 * std::log(lambda) / std::log(static_cast<double>(L));
}

/// Window χ_j(t), j = 1..N: with W_k(t) = 1 - S(t - k + 1), W_0 = 0 and
/// W_N = 1, χ_j = W_j - W_{j-1}. Nonnegative and summing to 1.
inline double scale_window(int j, int N, double t) {
  auto W = [&](int k) -> double {
    if (k <= 0) return 0.0;
    if (k >= N) return 1.0;
    if (std::isinf(t)) return 0.0;
    return 1.0 - smooth_step(t - k + 1);
  };
  return W(j) - W(j - 1);
}

struct CovarianceDecomposition {
  Covariance parent;
  std::vector<KernelCovariance> pieces;       ///< pieces[j-1] = C_j
  std::vector<double> locality_fraction;      ///< trace share from t in [j-1.5, j-0.5]
  std::vector<double> min_multiplier;         ///< smallest eigenvalue of each piece
  double reconstruction_error = 0.0;          ///< max |Σ_j C_j - C| entrywise

  int size() const { return static_cast<int>(pieces.size()); }
  const KernelCovariance& piece(int j) const {
    if (j < 1 || j > size()) throw ConfigurationError("gaussian-field", "scale index out of range");
    return pieces[static_cast<std::size_t>(j - 1)];
  }
  const TorusLattice& torus() const { return parent.torus(); }

  /// Multipliers of w_k = Σ_{i<=k} C_i.
  std::vector<double> cumulative_multipliers(int k) const {
    std::vector<double> w(parent.kernel.multipliers().size(), 0.0);
    for (int i = 1; i <= k; ++i)
      for (std::size_t q = 0; q < w.size(); ++q) w[q] += piece(i).multipliers()[q];
    return w;
  }
};

/// Slices C into N = torus.scales() pieces with the smooth windows above; the
/// zero mode goes to C_N.
inline CovarianceDecomposition decompose(const Covariance& C) {
  const TorusLattice& t = C.torus();
  const int N = t.scales(), L = t.block_base();
  const auto lam = laplacian_eigenvalues(t);
  const auto& mult = C.kernel.multipliers();
  CovarianceDecomposition dec{C, {}, {}, {}, 0.0};
  std::vector<double> sum_row(t.volume(), 0.0);
  for (int j = 1; j <= N; ++j) {
    std::vector<double> m(mult.size());
    double trace = 0, local = 0, mn = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < m.size(); ++q) {
      const double s = scale_of_eigenvalue(lam[q], L);
      m[q] = scale_window(j, N, s) * mult[q];
      trace += m[q];
      if (s >= j - 1.5 && s <= j - 0.5) local += m[q];
      mn = std::min(mn, m[q]);
    }
    if (mn < -1e-10) throw NumericalError("gaussian-field", "decomposition piece " + std::to_string(j) + " not PSD");
    dec.pieces.push_back(kernel_from_multipliers(t, std::move(m)));
    dec.locality_fraction.push_back(trace > 0 ? local / trace : 0.0);
    dec.min_multiplier.push_back(mn);
    for (std::size_t x = 0; x < sum_row.size(); ++x) sum_row[x] += dec.pieces.back().row()[x];
  }
  for (std::size_t x = 0; x < sum_row.size(); ++x)
    dec.reconstruction_error = std::max(dec.reconstruction_error, std::abs(sum_row[x] - C.kernel.row()[x]));
  if (dec.reconstruction_error > 1e-9)
    throw NumericalError("gaussian-field", "decomposition does not reconstruct C (error " +
                                               std::to_string(dec.reconstruction_error) + ")");
  return dec;
}

/// Centred Gaussian field with the given covariance: white noise, scaled by
/// the square-root multipliers in Fourier space.
inline LatticeField sample_field(const KernelCovariance& C, Rng& rng) {
  const TorusLattice& t = C.torus();
  std::normal_distribution<double> normal;
  std::vector<std::complex<double>> xi(t.volume());
  for (auto& v : xi) v = normal(rng);
  auto hat = fft::forward(t, xi);
  for (std::size_t q = 0; q < hat.size(); ++q) hat[q] *= std::sqrt(std::max(0.0, C.multipliers()[q]));
  const auto back = fft::backward(t, hat);
  LatticeField f(t, 1);
  const double inv = 1.0 / static_cast<double>(t.volume());
  for (std::size_t x = 0; x < back.size(); ++x) f(x, 0) = back[x].real() * inv;
  return f;
}

/// Field variable of site x is polynomial variable x; fluctuation variables
/// are offset by the volume.
inline void check_polynomial_volume(const TorusLattice& t, int copies) {
  if (static_cast<std::size_t>(copies) * t.volume() > static_cast<std::size_t>(kMaxVars))
    throw ConfigurationError("gaussian-field", "torus too large for exact polynomial expectations");
}

/// E_C over the site variables 0..V-1 of p; variables >= V stay symbolic.
inline Polynomial<double> expect_poly(const KernelCovariance& C, const Polynomial<double>& p, int degree_cap = 8) {
  const std::size_t V = C.torus().volume();
  check_polynomial_volume(C.torus(), 1);
  std::vector<int> vars(V);
  for (std::size_t i = 0; i < V; ++i) vars[i] = static_cast<int>(i);
  return gaussian_expectation<double>(
      p, vars, [&](int a, int b) { return C(static_cast<std::size_t>(a), static_cast<std::size_t>(b)); }, degree_cap);
}

/// p(φ + ζ): φ_x -> φ_x + ζ_x with ζ_x = variable V + x.
inline Polynomial<double> shift_by_fluctuation(const TorusLattice& t, const Polynomial<double>& p) {
  check_polynomial_volume(t, 2);
  const int V = static_cast<int>(t.volume());
  std::vector<Polynomial<double>> img(static_cast<std::size_t>(V));
  for (int x = 0; x < V; ++x) img[static_cast<std::size_t>(x)] = Polynomial<double>::variable(x) + Polynomial<double>::variable(V + x);
  return p.substitute([&](int v) -> const Polynomial<double>* { return v < V ? &img[static_cast<std::size_t>(v)] : nullptr; });
}

/// E_C[p(φ + ζ)] as a polynomial in φ.
inline Polynomial<double> convolve(const KernelCovariance& C, const Polynomial<double>& p, int degree_cap = 8) {
  const TorusLattice& t = C.torus();
  const int V = static_cast<int>(t.volume());
  const auto shifted = shift_by_fluctuation(t, p);
  std::vector<int> vars(static_cast<std::size_t>(V));
  for (int i = 0; i < V; ++i) vars[static_cast<std::size_t>(i)] = V + i;
  return gaussian_expectation<double>(
      shifted, vars,
      [&](int a, int b) { return C(static_cast<std::size_t>(a - V), static_cast<std::size_t>(b - V)); }, degree_cap);
}

struct ProgressiveCheck {
  Polynomial<double> direct;       ///< E_{C'+C''}[p(φ+ζ)]
  Polynomial<double> progressive;  ///< E_{C''}[E_{C'}[p(φ+ζ''+ζ')]]
  double residual = 0.0;           ///< max coefficient difference
};

inline ProgressiveCheck progressive_check(const KernelCovariance& C1, const KernelCovariance& C2,
                                          const Polynomial<double>& p, int degree_cap = 8) {
  ProgressiveCheck r;
  r.direct = convolve(C1 + C2, p, degree_cap);
  r.progressive = convolve(C2, convolve(C1, p, degree_cap), degree_cap);
  r.residual = max_coefficient_difference(r.direct, r.progressive);
  return r;
}

/// (2π)^{-d} ∫_{[-π,π]^d} f(λ(k)) dk for f depending on k only through the
/// -Δ symbol λ(k) = Σ_i (2 - 2cos k_i). The positive orthant is cut into
/// nested cube shells π2^{-i-1} <= |k|_∞ <= π2^{-i}, i < levels, each split
/// into 2^d - 1 boxes with a tensor Gauss–Legendre rule.
template <class F>
double brillouin_integral(int d, F&& f, int levels, int order = 0) {
  if (d < 1 || d > kMaxDim) throw ConfigurationError("gaussian-field", "dimension must be in 1..5");
  if (order <= 0) order = d == 1 ? 96 : (d == 2 ? 32 : (d == 3 ? 12 : 6));
  const QuadratureRule unit = gauss_legendre(order);
  double total = 0.0;
  std::vector<double> nodes, weights;
  std::vector<int> idx(static_cast<std::size_t>(d));
  for (int lev = 0; lev < levels; ++lev) {
    const double a = std::numbers::pi * std::ldexp(1.0, -lev), b = 0.5 * a;
    for (unsigned box = 1; box < (1u << d); ++box) {
      // axis i uses [b, a] if bit i is set, else [0, b]
      std::vector<QuadratureRule> axes;
      for (int i = 0; i < d; ++i) {
        const bool outer = (box >> i) & 1u;
        QuadratureRule r = unit;
        const double lo = outer ? b : 0.0, hi = outer ? a : b;
        for (std::size_t q = 0; q < r.nodes.size(); ++q) {
          r.nodes[q] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * r.nodes[q];
          r.weights[q] *= 0.5 * (hi - lo);
        }
        axes.push_back(std::move(r));
      }
      std::fill(idx.begin(), idx.end(), 0);
      for (;;) {
        double lam = 0, w = 1;
        for (int i = 0; i < d; ++i) {
          const auto q = static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]);
          const double h = std::sin(0.5 * axes[static_cast<std::size_t>(i)].nodes[q]);
          lam += 4.0 * h * h;
          w *= axes[static_cast<std::size_t>(i)].weights[q];
        }
        total += w * f(lam);
        int i = 0;
        while (i < d && ++idx[static_cast<std::size_t>(i)] == order) idx[static_cast<std::size_t>(i++)] = 0;
        if (i == d) break;
      }
    }
  }
  return total * std::pow(2.0, d) / std::pow(2.0 * std::numbers::pi, d);
}

/// Infinite-volume window W_k(t) = 1 - S(t - k + 1) (W_0 = 0).
inline double cumulative_window(int k, double t) {
  if (k <= 0) return 0.0;
  if (std::isinf(t)) return 0.0;
  return 1.0 - smooth_step(t - k + 1);
}

/// β_j = (n+8) L^{-εj} Σ_{x∈Z^d} (w_{j+1;0,x}² - w_{j;0,x}²) with the
/// decomposition's windows, α and m², evaluated in infinite volume:
/// Σ_x w(0,x)² = (2π)^{-d} ∫ ŵ(k)² dk. The torus only supplies (d, L, α, m²),
/// so the value does not depend on N or on the zero mode.
inline double beta_j(int d, int L, double alpha, double m2, int j, double n, double eps) {
  if (j < 1) throw ConfigurationError("gaussian-field", "beta_j needs j >= 1");
  const double lnL = std::log(static_cast<double>(L));
  // ŵ_{j+1}² - ŵ_j² vanishes once t >= j + 1, i.e. |k| well below L^{-(j+1)}
  const int levels = static_cast<int>(std::ceil((j + 1) * lnL / std::log(2.0))) + 8;
  const double s = brillouin_integral(
      d,
      [&](double lam) {
        const double t = scale_of_eigenvalue(lam, L);
        const double a = cumulative_window(j + 1, t), b = cumulative_window(j, t);
        const double c = 1.0 / (std::pow(lam, alpha / 2.0) + m2);
        return (a * a - b * b) * c * c;
      },
      levels);
  return (n + 8.0) * std::pow(static_cast<double>(L), -eps * j) * s;
}

inline double beta_j(const CovarianceDecomposition& dec, int j, double n, double eps) {
  const int N = dec.size();
  if (j < 1 || j >= N) throw ConfigurationError("gaussian-field", "beta_j needs 1 <= j < N");
  const auto& t = dec.torus();
  return beta_j(t.dim(), t.block_base(), dec.parent.alpha, dec.parent.m2, j, n, eps);
}

/// The same sum on the finite torus, Σ_x w(0,x)² = V^{-1} Σ_k ŵ_k², including
/// the zero mode in w_N (finite-volume diagnostic).
inline double beta_j_torus(const CovarianceDecomposition& dec, int j, double n, double eps) {
  const int N = dec.size();
  if (j < 1 || j >= N) throw ConfigurationError("gaussian-field", "beta_j needs 1 <= j < N");
  const auto wj = dec.cumulative_multipliers(j);
  const auto wj1 = dec.cumulative_multipliers(j + 1);
  double s = 0;
  for (std::size_t q = 0; q < wj.size(); ++q) s += wj1[q] * wj1[q] - wj[q] * wj[q];
  s /= static_cast<double>(wj.size());
  return (n + 8.0) * std::pow(static_cast<double>(dec.torus().block_base()), -eps * j) * s;
}

/// β_1..β_{N-1}.
inline std::vector<double> beta_sequence(const CovarianceDecomposition& dec, double n, double eps) {
  std::vector<double> out;
  for (int j = 1; j < dec.size(); ++j) out.push_back(beta_j(dec, j, n, eps));
  return out;
}

/// Mean of the last third (at least one) of a β sequence: the proxy for
/// a = lim β_j(0).
inline double beta_tail_average(const std::vector<double>& betas) {
  if (betas.empty()) throw ConfigurationError("gaussian-field", "empty beta sequence");
  const std::size_t k = std::max<std::size_t>(1, betas.size() / 3);
  double s = 0;
  for (std::size_t i = betas.size() - k; i < betas.size(); ++i) s += betas[i];
  return s / static_cast<double>(k);
}

}  // namespace walkrg
