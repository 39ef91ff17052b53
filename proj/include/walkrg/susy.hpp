#pragma once

// Supersymmetric integral representation of the weakly self-avoiding walk
// susceptibility on graphs with at most three sites:
//   χ_Λ(g, ν) = Σ_x ∫ e^{-Σ_z (g τ_z² + ν τ_z + τ_{Δ,z})} φ̄_0 φ_x.
// Forms carry polynomial coefficients in u_z = Re φ_z (variable 2z) and
// v_z = Im φ_z (variable 2z+1). The fermionic algebra is expanded
// symbolically; only e^{-body} times the top coefficient is left to a
// bosonic trapezoid sum.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "walkrg/box_quadrature.hpp"
#include "walkrg/errors.hpp"
#include "walkrg/graph.hpp"
#include "walkrg/grassmann.hpp"
#include "walkrg/polynomial.hpp"

namespace walkrg {

using FormPoly = Polynomial<std::complex<double>>;
using Form = GrassmannElement<FormPoly>;

inline FormPoly phi(int z) {
  return FormPoly::variable(2 * z) + FormPoly::variable(2 * z + 1, std::complex<double>(0.0, 1.0));
}
inline FormPoly phibar(int z) {
  return FormPoly::variable(2 * z) + FormPoly::variable(2 * z + 1, std::complex<double>(0.0, -1.0));
}

inline Form form_constant(int sites, double c) { return Form::scalar(sites, FormPoly::constant(c)); }

/// τ_z = φ_z φ̄_z + ψ_z ∧ ψ̄_z.
inline Form tau(int sites, int z) {
  return Form::scalar(sites, phi(z) * phibar(z)) + Form::psi(sites, z) * Form::psibar(sites, z);
}

/// τ_{Δ,z} = φ_z (Kφ̄)_z + ψ_z ∧ (Kψ̄)_z for a symmetric operator K (K = -Δ
/// for the nearest-neighbour model).
inline Form tau_laplacian(const Eigen::MatrixXd& K, int z) {
  const int M = static_cast<int>(K.rows());
  Form t(M);
  for (int w = 0; w < M; ++w) {
    const double k = K(z, w);
    if (k == 0.0) continue;
    const FormPoly c = FormPoly::constant(k);
    t += Form::scalar(M, c * (phi(z) * phibar(w))) + c * (Form::psi(M, z) * Form::psibar(M, w));
  }
  return t;
}

inline Eigen::MatrixXd minus_laplacian(const WeightedGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y)
      K(x, y) = -g.laplacian(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
  return K;
}

/// Σ_z (g τ_z² + ν τ_z + τ_{Δ,z}).
inline Form susy_action(const Eigen::MatrixXd& K, double g, double nu) {
  const int M = static_cast<int>(K.rows());
  if (M < 1 || M > kMaxFormSites || K.cols() != K.rows())
    throw ConfigurationError("susy-saw", "operator must be square on 1..3 sites");
  Form S(M);
  for (int z = 0; z < M; ++z) {
    const Form t = tau(M, z);
    S += FormPoly::constant(g) * (t * t) + FormPoly::constant(nu) * t + tau_laplacian(K, z);
  }
  return S;
}

/// e^{-S} split as e^{-body S} · factor, factor = e^{-(S - body S)} expanded
/// as a terminating Taylor series.
struct ExpForm {
  FormPoly body;
  Form factor;
};

inline ExpForm exp_minus(const Form& S) {
  auto derivs = [](int k, const FormPoly&) { return FormPoly::constant(k % 2 ? -1.0 : 1.0); };
  return {S.body(), smooth_function_of_form<FormPoly>(S.nilpotent(), derivs)};
}

namespace detail {

/// A polynomial in the 2M real variables flattened for fast evaluation; the
/// imaginary parts must vanish.
class RealPoly {
 public:
  RealPoly(const FormPoly& p, int vars, const char* what) {
    for (const auto& [m, c] : p.terms()) {
      if (std::abs(c.imag()) > 1e-12 * std::max(1.0, std::abs(c.real())))
        throw NumericalError("susy-saw", std::string(what) + " has an imaginary part");
      if (c.real() == 0.0) continue;
      coeff_.push_back(c.real());
      start_.push_back(factors_.size());
      for (int v = 0; v < kMaxVars; ++v) {
        const int e = m[static_cast<std::size_t>(v)];
        if (!e) continue;
        if (v >= vars) throw ConfigurationError("susy-saw", "polynomial uses an unexpected variable");
        factors_.push_back(static_cast<std::uint16_t>(v * 64 + e));
        max_power_ = std::max(max_power_, e);
      }
    }
  }

  int max_power() const { return max_power_; }

  /// pw[v * stride + k] = x_v^k.
  double operator()(const std::vector<double>& pw, int stride) const {
    double s = 0.0;
    for (std::size_t t = 0; t < coeff_.size(); ++t) {
      double term = coeff_[t];
      const std::size_t end = t + 1 < start_.size() ? start_[t + 1] : factors_.size();
      for (std::size_t f = start_[t]; f < end; ++f)
        term *= pw[static_cast<std::size_t>((factors_[f] / 64) * stride + factors_[f] % 64)];
      s += term;
    }
    return s;
  }

 private:
  int max_power_ = 0;
  std::vector<double> coeff_;
  std::vector<std::size_t> start_;       ///< first factor of each term
  std::vector<std::uint16_t> factors_;   ///< variable·64 + exponent
};

}  // namespace detail

struct BerezinOptions {
  int nodes = 0;  ///< per axis; 0 picks a default from M
  double cutoff = 0.0;
  double depth = 20.0;  ///< the box ends where the weight bound has dropped by e^{-depth}
  bool self_check = true;  ///< rerun on a 3/4-size grid; the spread bounds the error of the finer run
  double tolerance = 1e-5;
  unsigned threads = 1;
  double max_evaluations = 5e7;
};

inline int default_form_nodes(int sites) {
  static constexpr int table[] = {0, 40, 28, 16};
  return table[std::clamp(sites, 1, kMaxFormSites)];
}

struct BerezinResult {
  std::vector<double> values;  ///< one per observable
  double quadrature_delta = 0.0;
  int nodes = 0;
};

/// ∫ e^{-body} factor · O_k over R^{2M} for each 0-form observable O_k (real
/// part). The bosonic box is aligned with K and sized from the quadratic
/// part ν|φ|² + φ·Kφ̄ and the quartic part g|φ|⁴ of the body.
inline BerezinResult berezin_integrate(const ExpForm& F, const std::vector<FormPoly>& observables,
                                       const Eigen::MatrixXd& K, double g, double nu, const BerezinOptions& opt = {}) {
  const int M = F.factor.sites();
  const int vars = 2 * M;
  const detail::RealPoly body(F.body, vars, "form body");
  const detail::RealPoly top(F.factor.top(), vars, "top coefficient");
  std::vector<detail::RealPoly> obs;
  for (const auto& o : observables) {
    FormPoly re;
    for (const auto& [m, c] : o.terms()) re += FormPoly::monomial(m, c.real());
    obs.emplace_back(re, vars, "observable");
  }
  const int stride = std::max({body.max_power(), top.max_power(), 2}) + 1;
  for (const auto& o : obs)
    if (o.max_power() >= stride) throw ConfigurationError("susy-saw", "observable degree too high");
  const double norm = berezin_normalization(M);
  const auto box = detail::eigen_box(2.0 * K, 2, 4.0 * g, 2.0 * nu, opt.cutoff, 0.0, opt.depth);

  auto f = [&](std::span<const double> x, std::span<double> out) {
    thread_local std::vector<double> pw;
    pw.assign(static_cast<std::size_t>(vars * stride), 1.0);
    for (int v = 0; v < vars; ++v)
      for (int k = 1; k < stride; ++k)
        pw[static_cast<std::size_t>(v * stride + k)] = pw[static_cast<std::size_t>(v * stride + k - 1)] * x[static_cast<std::size_t>(v)];
    const double w = norm * std::exp(-body(pw, stride)) * top(pw, stride);
    for (std::size_t k = 0; k < obs.size(); ++k) out[k] = w * obs[k](pw, stride);
  };
  auto run = [&](int q) {
    return detail::box_sum(box.U, 2, q, box.R, obs.size(), f, opt.threads, opt.max_evaluations);
  };
  BerezinResult r;
  r.nodes = opt.nodes > 0 ? opt.nodes : default_form_nodes(M);
  r.values = run(r.nodes);
  if (opt.self_check) {
    const auto coarse = run(r.nodes - r.nodes / 4);
    for (std::size_t k = 0; k < coarse.size(); ++k)
      r.quadrature_delta = std::max(r.quadrature_delta, std::abs(coarse[k] - r.values[k]));
    double scale = 1.0;
    for (double v : r.values) scale = std::max(scale, std::abs(v));
    if (r.quadrature_delta > opt.tolerance * scale)
      throw NumericalError("susy-saw", "bosonic quadrature not converged (delta " + std::to_string(r.quadrature_delta) +
                                           "); refine the grid");
  }
  return r;
}

struct IntrepResult {
  std::vector<double> contributions;  ///< ∫ e^{-S} φ̄_0 φ_x for each x
  double chi = 0.0;
  double normalization = 0.0;         ///< ∫ e^{-S}; supersymmetry makes it 1
  double quadrature_delta = 0.0;
  int nodes = 0;
};

inline void check_intrep_domain(double g, double nu) {
  if (g < 0.0) throw DomainError("susy-saw", "g must be >= 0");
  if (!(g > 0.0 || nu > 0.0)) throw DomainError("susy-saw", "g = 0 needs nu > 0");
}

inline IntrepResult evaluate_intrep(const Eigen::MatrixXd& K, double g, double nu, const BerezinOptions& opt = {},
                                    int origin = 0) {
  check_intrep_domain(g, nu);
  const int M = static_cast<int>(K.rows());
  if (origin < 0 || origin >= M) throw ConfigurationError("susy-saw", "origin outside the graph");
  const auto F = exp_minus(susy_action(K, g, nu));
  std::vector<FormPoly> obs{FormPoly::constant(1.0)};
  for (int x = 0; x < M; ++x) obs.push_back(phibar(origin) * phi(x));
  const auto b = berezin_integrate(F, obs, K, g, nu, opt);
  IntrepResult r;
  r.normalization = b.values[0];
  r.contributions.assign(b.values.begin() + 1, b.values.end());
  for (double c : r.contributions) r.chi += c;
  r.quadrature_delta = b.quadrature_delta;
  r.nodes = b.nodes;
  return r;
}

inline IntrepResult evaluate_intrep(const WeightedGraph& graph, double g, double nu, const BerezinOptions& opt = {}) {
  return evaluate_intrep(minus_laplacian(graph), g, nu, opt);
}

/// One site: the walk never jumps, I(T) = T², so χ = ∫_0^∞ e^{-gT² - νT} dT
/// = √(π/4g) e^{ν²/4g} erfc(ν / 2√g).
inline double single_site_walk_chi(double g, double nu) {
  check_intrep_domain(g, nu);
  if (g == 0.0) return 1.0 / nu;
  const double a = nu / (2.0 * std::sqrt(g));
  // e^{a²} erfc(a) loses everything for large a; use the asymptotic series there
  if (a > 25.0) {
    const double inv = 1.0 / (2.0 * a * a);
    return std::sqrt(std::numbers::pi / (4.0 * g)) / (std::sqrt(std::numbers::pi) * a) *
           (1.0 - inv + 3.0 * inv * inv - 15.0 * inv * inv * inv);
  }
  return std::sqrt(std::numbers::pi / (4.0 * g)) * std::exp(a * a) * std::erfc(a);
}

}  // namespace walkrg
