#pragma once

// |φ|⁴ susceptibility on graphs with at most four sites, by tensor trapezoid
// quadrature on a cut-off box: directly from the Boltzmann average, and through
// Z_N(φ) = E_C e^{-V₀(φ+ζ)} and its second derivative along the constant field.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "walkrg/box_quadrature.hpp"
#include "walkrg/errors.hpp"
#include "walkrg/graph.hpp"
#include "walkrg/lattice.hpp"
#include "walkrg/spectral.hpp"

namespace walkrg {

inline constexpr std::size_t kPhi4MaxSites = 4;

struct QuadratureSpec {
  int nodes = 0;             ///< per dimension; 0 picks a default from the dimension
  double cutoff = 0.0;       ///< half-width of the box in field units; 0 derives it from the potential
  bool self_check = true;    ///< rerun with 1.5x nodes and compare
  double tolerance = 1e-8;
  unsigned threads = 1;
  double max_evaluations = 5e7;
};

inline int default_nodes(int dims) {
  static constexpr int table[] = {0, 64, 48, 40, 32, 20, 14, 10, 8};
  return table[std::clamp(dims, 1, 8)];
}

/// (-Δ)^{α/2} of the graph as a dense matrix; α = 2 returns -Δ itself.
inline Eigen::MatrixXd kinetic_operator(const WeightedGraph& g, double alpha = 2.0) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("phi4-tiny", "alpha must lie in (0, 2]");
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y)
      K(x, y) = -g.laplacian(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
  if (alpha == 2.0) return K;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  Eigen::VectorXd lam = es.eigenvalues();
  for (auto& l : lam) l = l <= 1e-14 ? 0.0 : std::pow(l, alpha / 2.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

/// Same operator on a torus, taken from the spectral kernel row.
inline Eigen::MatrixXd kinetic_operator(const TorusLattice& t, double alpha = 2.0) {
  const auto op = fractional_laplacian(t, alpha);
  const auto n = static_cast<Eigen::Index>(t.volume());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) K(x, y) = op(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
  return K;
}

/// Σ_x (K + ν)^{-1}_{0x}: the g = 0 susceptibility.
inline double gaussian_chi(const Eigen::MatrixXd& K, double nu, std::size_t origin = 0) {
  if (!(nu > 0.0)) throw DomainError("phi4-tiny", "gaussian susceptibility needs nu > 0");
  const Eigen::MatrixXd A = K + nu * Eigen::MatrixXd::Identity(K.rows(), K.cols());
  const Eigen::MatrixXd G = A.ldlt().solve(Eigen::MatrixXd::Identity(K.rows(), K.cols()));
  return G.row(static_cast<Eigen::Index>(origin)).sum();
}

namespace detail {

/// ½ Σ_{x,y} K_xy φ_x·φ_y for ψ laid out as ψ[x·n + c].
inline double quadratic_form(const Eigen::MatrixXd& K, std::span<const double> psi, int n) {
  const auto s = static_cast<std::size_t>(K.rows());
  double q = 0.0;
  for (std::size_t x = 0; x < s; ++x)
    for (std::size_t y = 0; y < s; ++y) {
      const double k = K(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
      if (k == 0.0) continue;
      for (int c = 0; c < n; ++c) q += k * psi[x * n + c] * psi[y * n + c];
    }
  return 0.5 * q;
}

inline void check_sizes(std::size_t sites, int n) {
  if (sites > kPhi4MaxSites) throw ConfigurationError("phi4-tiny", "at most four sites");
  if (n != 1 && n != 2) throw ConfigurationError("phi4-tiny", "n must be 1 or 2");
}

}  // namespace detail

struct Phi4Result {
  double chi = 0.0;
  double quadrature_delta = 0.0;  ///< |χ(q) - χ(1.5q)| when self-checked
  int nodes = 0;
  double cutoff = 0.0;
};

/// (1/n) Σ_x <φ_0·φ_x> under e^{-Σ_x (g|φ_x|⁴/4 + ν|φ_x|²/2) - ½ φ·Kφ}.
inline Phi4Result chi_direct(const Eigen::MatrixXd& K, double g, double nu, int n = 1, const QuadratureSpec& spec = {},
                             std::size_t origin = 0) {
  const auto sites = static_cast<std::size_t>(K.rows());
  detail::check_sizes(sites, n);
  if (g < 0.0) throw DomainError("phi4-tiny", "g must be >= 0");
  if (!(g > 0.0 || nu > 0.0)) throw DomainError("phi4-tiny", "g = 0 needs nu > 0");
  if (origin >= sites) throw ConfigurationError("phi4-tiny", "origin outside the graph");
  auto f = [&](std::span<const double> psi, std::span<double> out) {
    double e = detail::quadratic_form(K, psi, n), corr = 0.0;
    for (std::size_t x = 0; x < sites; ++x) {
      double r2 = 0.0, dot = 0.0;
      for (int k = 0; k < n; ++k) {
        const double v = psi[x * n + k];
        r2 += v * v;
        dot += psi[origin * n + k] * v;
      }
      e += 0.25 * g * r2 * r2 + 0.5 * nu * r2;
      corr += dot;
    }
    const double w = std::exp(-e);
    out[0] = w;
    out[1] = w * corr / n;
  };
  const int dims = static_cast<int>(sites) * n;
  const auto box = detail::eigen_box(K, n, g, nu, spec.cutoff, 0.0);
  auto run = [&](int q) {
    const auto s = detail::box_sum(box.U, n, q, box.R, 2, f, spec.threads, spec.max_evaluations);
    return s[1] / s[0];
  };
  Phi4Result r;
  r.nodes = spec.nodes > 0 ? spec.nodes : default_nodes(dims);
  r.cutoff = *std::max_element(box.R.begin(), box.R.end());
  r.chi = run(r.nodes);
  if (spec.self_check) {
    r.quadrature_delta = std::abs(run(r.nodes + r.nodes / 2) - r.chi);
    if (r.quadrature_delta > spec.tolerance * std::max(1.0, std::abs(r.chi)))
      throw NumericalError("phi4-tiny", "quadrature not converged (delta " + std::to_string(r.quadrature_delta) +
                                            "); refine the grid");
  }
  return r;
}

inline Phi4Result chi_direct(const WeightedGraph& graph, double g, double nu, int n = 1, double alpha = 2.0,
                             const QuadratureSpec& spec = {}) {
  return chi_direct(kinetic_operator(graph, alpha), g, nu, n, spec);
}

struct ZNResult {
  double chi = 0.0;
  double Z0 = 0.0;
  double D2Z = 0.0;                  ///< D²Z_N(0; 𝟙, 𝟙), Richardson-extrapolated
  double derivative_error = 0.0;     ///< spread between two Richardson levels, relative
  double quadrature_delta = 0.0;
  int nodes = 0;
  double cutoff = 0.0;
};

/// χ_N(g, ν₀+m²) = 1/m² + D²Z_N(0;𝟙,𝟙) / (m⁴ |Λ| Z_N(0)) with C = (K + m²)^{-1}.
/// The derivative is a central difference in h, Richardson-extrapolated at
/// h and h/2, and compared against the same at h/2 and h/4.
inline ZNResult chi_via_ZN(const Eigen::MatrixXd& K, double g, double nu0, double m2, int n = 1,
                           const QuadratureSpec& spec = {}, double h = 0.05, double max_derivative_error = 1e-5) {
  const auto sites = static_cast<std::size_t>(K.rows());
  detail::check_sizes(sites, n);
  if (!(m2 > 0.0)) throw DomainError("phi4-tiny", "m^2 must be > 0");
  if (g < 0.0) throw DomainError("phi4-tiny", "g must be >= 0");
  if (!(g > 0.0 || nu0 + m2 > 0.0)) throw DomainError("phi4-tiny", "g = 0 needs nu0 + m^2 > 0");
  // E_C with C^{-1} = K + m²: Gaussian density of ζ, normalized
  const auto S = static_cast<Eigen::Index>(sites);
  const Eigen::MatrixXd Cinv = K + m2 * Eigen::MatrixXd::Identity(S, S);
  const double logdet = Cinv.ldlt().vectorD().array().log().sum();
  const int dims = static_cast<int>(sites) * n;
  const double lognorm = 0.5 * n * logdet - 0.5 * dims * std::log(2.0 * std::numbers::pi);
  const double shifts[7] = {0.0, h, -h, h / 2, -h / 2, h / 4, -h / 4};
  auto f = [&](std::span<const double> zeta, std::span<double> out) {
    const double gauss = lognorm - detail::quadratic_form(Cinv, zeta, n);
    for (int k = 0; k < 7; ++k) {
      double e = 0.0;
      for (std::size_t x = 0; x < sites; ++x) {
        double r2 = 0.0;
        for (int c = 0; c < n; ++c) {
          const double v = zeta[x * n + c] + (c == 0 ? shifts[k] : 0.0);
          r2 += v * v;
        }
        e += 0.25 * g * r2 * r2 + 0.5 * nu0 * r2;
      }
      out[static_cast<std::size_t>(k)] = std::exp(gauss - e);
    }
  };
  const auto box = detail::eigen_box(K, n, g, nu0 + m2, spec.cutoff, h);
  auto run = [&](int q, ZNResult& r) {
    const auto z = detail::box_sum(box.U, n, q, box.R, 7, f, spec.threads, spec.max_evaluations);
    auto second = [&](int i, double step) { return (z[i] - 2.0 * z[0] + z[i + 1]) / (step * step); };
    const double d1 = second(1, h), d2 = second(3, h / 2), d4 = second(5, h / 4);
    const double r12 = (4.0 * d2 - d1) / 3.0, r24 = (4.0 * d4 - d2) / 3.0;
    r.Z0 = z[0];
    r.D2Z = r24;
    r.derivative_error = std::abs(r12 - r24) / std::max(std::abs(r24), z[0]);
    r.chi = 1.0 / m2 + r.D2Z / (m2 * m2 * static_cast<double>(sites) * r.Z0);
  };
  ZNResult r;
  r.nodes = spec.nodes > 0 ? spec.nodes : default_nodes(dims);
  r.cutoff = *std::max_element(box.R.begin(), box.R.end());
  run(r.nodes, r);
  if (r.derivative_error > max_derivative_error)
    throw NumericalError("phi4-tiny", "second derivative sensitive to the step size (" +
                                          std::to_string(r.derivative_error) + ")");
  if (spec.self_check) {
    ZNResult fine;
    run(r.nodes + r.nodes / 2, fine);
    r.quadrature_delta = std::abs(fine.chi - r.chi);
    if (r.quadrature_delta > spec.tolerance * std::max(1.0, std::abs(r.chi)))
      throw NumericalError("phi4-tiny", "quadrature not converged (delta " + std::to_string(r.quadrature_delta) +
                                            "); refine the grid");
  }
  return r;
}

inline ZNResult chi_via_ZN(const WeightedGraph& graph, double g, double nu0, double m2, int n = 1, double alpha = 2.0,
                           const QuadratureSpec& spec = {}) {
  return chi_via_ZN(kinetic_operator(graph, alpha), g, nu0, m2, n, spec);
}

}  // namespace walkrg
