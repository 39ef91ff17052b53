#pragma once

// Tensor trapezoid sums over a box aligned with the eigenvectors of a
// quadratic form, for smooth weights that decay like Gaussians or faster.

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "walkrg/errors.hpp"

namespace walkrg::detail {

/// Radius where the 1D weight e^{-g r⁴/4 - ν r²/2} has fallen e^{-depth}
/// below its maximum.
inline double auto_cutoff(double g, double nu, double depth = 45.0) {
  const double vmin = (g > 0.0 && nu < 0.0) ? -nu * nu / (4.0 * g) : 0.0;
  auto e = [&](double r) { return 0.25 * g * r * r * r * r + 0.5 * nu * r * r - vmin - depth; };
  double hi = 1.0;
  while (e(hi) < 0.0) hi *= 2.0;
  const double lo = (g > 0.0 && nu < 0.0) ? std::sqrt(-nu / g) : 0.0;
  boost::math::tools::eps_tolerance<double> tol(40);
  std::uintmax_t it = 100;
  const auto [l, h] = boost::math::tools::bisect(e, lo, hi, tol, it);
  return 0.5 * (l + h);
}

/// Trapezoid sums over a box in the eigen-coordinates y of K: axis
/// k = c·s + i is eigen-direction i of component c, with half-width R[k] and q
/// nodes. f sees the field φ[x·n + c] = Σ_i U_xi y_{c·s+i} and writes
/// `outputs` numbers. Chunks are indexed by the first node so the summation
/// order does not depend on the thread count.
inline std::vector<double> box_sum(const Eigen::MatrixXd& U, int comps, int q, const std::vector<double>& R,
                                   std::size_t outputs,
                                   const std::function<void(std::span<const double>, std::span<double>)>& f,
                                   unsigned threads, double max_evaluations) {
  const int s = static_cast<int>(U.rows());
  const int dims = s * comps;
  if (q < 2) throw ConfigurationError("quadrature", "need at least two nodes per axis");
  if (std::pow(static_cast<double>(q), dims) > max_evaluations)
    throw ComplexityError("quadrature", "quadrature would need " + std::to_string(q) + "^" + std::to_string(dims) +
                                           " evaluations");
  std::vector<std::vector<double>> nodes(static_cast<std::size_t>(dims));
  double vol = 1.0;
  for (int k = 0; k < dims; ++k) {
    const double r = R[static_cast<std::size_t>(k)], h = 2.0 * r / (q - 1);
    vol *= h;
    for (int i = 0; i < q; ++i) nodes[static_cast<std::size_t>(k)].push_back(-r + h * i);
  }
  std::vector<std::vector<double>> partial(static_cast<std::size_t>(q), std::vector<double>(outputs, 0.0));
  auto chunk = [&](int first) {
    std::vector<int> idx(static_cast<std::size_t>(dims), 0);
    idx[0] = first;
    std::vector<double> phi(static_cast<std::size_t>(dims)), out(outputs);
    auto& acc = partial[static_cast<std::size_t>(first)];
    while (true) {
      for (int x = 0; x < s; ++x)
        for (int c = 0; c < comps; ++c) {
          double v = 0.0;
          for (int i = 0; i < s; ++i) {
            const int k = c * s + i;
            v += U(x, i) * nodes[static_cast<std::size_t>(k)][static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
          }
          phi[static_cast<std::size_t>(x * comps + c)] = v;
        }
      f(phi, out);
      for (std::size_t o = 0; o < outputs; ++o) acc[o] += out[o];
      int k = 1;
      while (k < dims && ++idx[static_cast<std::size_t>(k)] == q) idx[static_cast<std::size_t>(k++)] = 0;
      if (k >= dims) break;
    }
  };
  const unsigned nt = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(q)));
  if (nt == 1) {
    for (int i = 0; i < q; ++i) chunk(i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < nt; ++t)
      pool.emplace_back([&, t] {
        for (int i = static_cast<int>(t); i < q; i += static_cast<int>(nt)) chunk(i);
      });
  }
  std::vector<double> total(outputs, 0.0);
  for (const auto& p : partial)
    for (std::size_t o = 0; o < outputs; ++o) total[o] += p[o];
  for (auto& t : total) t *= vol;
  return total;
}

/// Eigenbasis of K and per-axis half-widths. Along eigen-direction i the
/// weight behaves like e^{-(g/s) y⁴/4 - (λ_i + ν) y²/2} (exact for the zero
/// mode, where Σ_x φ_x⁴ = y⁴/s); `pad` widens every axis.
struct EigenBox {
  Eigen::MatrixXd U;
  std::vector<double> R;
};

inline EigenBox eigen_box(const Eigen::MatrixXd& K, int comps, double g, double nu, double cutoff, double pad,
                         double depth = 45.0) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  EigenBox b;
  b.U = es.eigenvectors();
  const auto s = K.rows();
  for (int c = 0; c < comps; ++c)
    for (Eigen::Index i = 0; i < s; ++i)
      b.R.push_back(cutoff > 0.0 ? cutoff
                                 : auto_cutoff(g / static_cast<double>(s), std::max(es.eigenvalues()(i), 0.0) + nu, depth) + pad);
  return b;
}

}  // namespace walkrg::detail
