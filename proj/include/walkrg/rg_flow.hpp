#pragma once

// Second-order RG dynamics for the rescaled couplings (s, μ):
//   s_+ = L^ε s (1 - βs),   μ_+ = L^α (1 - kβs) μ,   k = (n+2)/(n+8),
// with fixed points, the mass scale, critical shooting, the susceptibility
// exponent from the μ₀-sensitivity, and phase portraits.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "walkrg/errors.hpp"
#include "walkrg/gaussian.hpp"
#include "walkrg/stats.hpp"

namespace walkrg {

struct FlowParams {
  int L = 2;
  double eps = 0.1;
  double alpha = 0.55;
  double n = 1.0;
  double m2 = 0.0;  ///< <= 0: massless, no mass scale
  double overflow = 1e12;

  double k() const { return (n + 2.0) / (n + 8.0); }
};

/// Smallest j >= 0 with L^{αj} m² >= 1.
inline int mass_scale(double m2, double alpha, int L) {
  if (!(m2 > 0.0)) throw DomainError("rg-flow", "mass scale needs m^2 > 0");
  if (m2 >= 1.0) return 0;
  const double lnL = std::log(static_cast<double>(L));
  int j = static_cast<int>(std::ceil(std::log(1.0 / m2) / (alpha * lnL)));
  j = std::max(j, 0);
  // exact boundaries such as 2^3 · (1/8) must count as reached
  auto reached = [&](int i) { return std::pow(static_cast<double>(L), alpha * i) * m2 >= 1.0 - 1e-12; };
  while (j > 0 && reached(j - 1)) --j;
  while (!reached(j)) ++j;
  return j;
}

/// β_j as a function of (j, m²): a constant a, or the table computed from
/// the smooth covariance decomposition (memoized).
class BetaSource {
 public:
  static BetaSource constant(double a) {
    BetaSource b;
    b.kind_ = "constant";
    b.a_ = a;
    return b;
  }

  static BetaSource decomposition(int d, const FlowParams& p) {
    BetaSource b;
    b.kind_ = "decomposition";
    b.d_ = d;
    b.L_ = p.L;
    b.alpha_ = p.alpha;
    b.n_ = p.n;
    b.eps_ = p.eps;
    b.memo_ = std::make_shared<Memo>();
    return b;
  }

  const std::string& kind() const { return kind_; }
  double constant_value() const { return a_; }

  double operator()(int j, double m2) const {
    if (kind_ == "constant") return a_;
    const auto key = std::make_pair(j, m2);
    {
      std::lock_guard lock(memo_->mutex);
      if (auto it = memo_->values.find(key); it != memo_->values.end()) return it->second;
    }
    // massless requests use a tiny positive mass
    const double v = beta_j(d_, L_, alpha_, m2 > 0 ? m2 : 1e-12, std::max(j, 1), n_, eps_);
    std::lock_guard lock(memo_->mutex);
    memo_->values.emplace(key, v);
    return v;
  }

  /// Proxy for a = lim β_j(0): tail mean of β_1..β_J at tiny mass.
  double limit(int J = 24) const {
    if (kind_ == "constant") return a_;
    std::vector<double> b;
    for (int j = 1; j <= J; ++j) b.push_back((*this)(j, 1e-12));
    return beta_tail_average(b);
  }

 private:
  struct Memo {
    std::mutex mutex;
    std::map<std::pair<int, double>, double> values;
  };
  std::string kind_;
  double a_ = 0.0;
  int d_ = 1, L_ = 2;
  double alpha_ = 1.0, n_ = 1.0, eps_ = 0.0;
  std::shared_ptr<Memo> memo_;
};

struct FlowState {
  int j = 0;
  double s = 0.0;
  double mu = 0.0;
  double ds_dmu0 = 0.0;  ///< always 0: the s-equation does not see μ
  double dmu_dmu0 = 1.0;
};

/// One step with coefficient β; the exact Jacobian advances the sensitivities.
inline FlowState step_flow(const FlowState& x, double beta, const FlowParams& p) {
  const double Le = std::pow(static_cast<double>(p.L), p.eps);
  const double La = std::pow(static_cast<double>(p.L), p.alpha);
  const double k = p.k();
  FlowState y;
  y.j = x.j + 1;
  y.s = Le * x.s * (1.0 - beta * x.s);
  y.mu = La * (1.0 - k * beta * x.s) * x.mu;
  y.ds_dmu0 = Le * (1.0 - 2.0 * beta * x.s) * x.ds_dmu0;
  y.dmu_dmu0 = La * (1.0 - k * beta * x.s) * x.dmu_dmu0 - La * k * beta * x.mu * x.ds_dmu0;
  return y;
}

enum class FlowEnd { Completed, Diverged, PastMassScale };

inline const char* to_string(FlowEnd e) {
  switch (e) {
    case FlowEnd::Completed: return "completed";
    case FlowEnd::Diverged: return "diverged";
    case FlowEnd::PastMassScale: return "past-mass-scale";
  }
  return "?";
}

struct FlowTrajectory {
  std::vector<FlowState> states;
  FlowEnd end = FlowEnd::Completed;
  int mass_scale = std::numeric_limits<int>::max();
};

/// Iterates j = 0..j_max-1 from (s₀, μ₀). β is frozen to 0 from the mass
/// scale on; stop_at_mass_scale ends the run there instead.
inline FlowTrajectory run_flow(double s0, double mu0, int j_max, const BetaSource& beta, const FlowParams& p,
                               bool stop_at_mass_scale = false) {
  FlowTrajectory tr;
  tr.mass_scale = p.m2 > 0 ? mass_scale(p.m2, p.alpha, p.L) : std::numeric_limits<int>::max();
  FlowState x{0, s0, mu0, 0.0, 1.0};
  tr.states.push_back(x);
  for (int j = 0; j < j_max; ++j) {
    if (j >= tr.mass_scale && stop_at_mass_scale) {
      tr.end = FlowEnd::PastMassScale;
      return tr;
    }
    const double b = j >= tr.mass_scale ? 0.0 : beta(j, p.m2);
    x = step_flow(x, b, p);
    tr.states.push_back(x);
    if (!(std::abs(x.s) <= p.overflow && std::abs(x.mu) <= p.overflow)) {
      tr.end = FlowEnd::Diverged;
      return tr;
    }
  }
  return tr;
}

struct FixedPoint {
  double s = 0.0;
  double multiplier = 0.0;  ///< derivative of s -> L^ε s(1-as) at the point
  bool stable = false;
};

/// Roots of s = L^ε s(1 - as): 0 and s̄ = (1 - L^{-ε})/a.
inline std::vector<FixedPoint> find_fixed_points(double eps, double a, int L) {
  if (!(a > 0.0)) throw DomainError("rg-flow", "no nontrivial fixed point: a must be > 0");
  const double Le = std::pow(static_cast<double>(L), eps);
  const double sbar = (1.0 - std::pow(static_cast<double>(L), -eps)) / a;
  std::vector<FixedPoint> out;
  out.push_back({0.0, Le, std::abs(Le) < 1.0});
  const double m = Le * (1.0 - 2.0 * a * sbar);
  out.push_back({sbar, m, std::abs(m) < 1.0});
  return out;
}

struct ShootResult {
  double mu0 = 0.0;
  double mu_final = 0.0;
  int iterations = 0;
};

/// Bisection on μ₀ for the trajectory whose μ stays bounded to j_max.
inline ShootResult shoot_critical_mu0(double s0, int j_max, const BetaSource& beta, const FlowParams& p,
                                      double bracket = 1.0, double tol = 1e-15) {
  auto final_mu = [&](double mu0) {
    const auto tr = run_flow(s0, mu0, j_max, beta, p);
    return tr.states.back().mu;
  };
  double lo = -bracket, hi = bracket;
  double flo = final_mu(lo), fhi = final_mu(hi);
  if (!(flo < 0.0 && fhi > 0.0))
    throw NumericalError("rg-flow", "bracketing failure: mu_jmax(" + std::to_string(lo) + ") = " + std::to_string(flo) +
                                        ", mu_jmax(" + std::to_string(hi) + ") = " + std::to_string(fhi));
  ShootResult r;
  while (hi - lo > tol * std::max(1.0, std::abs(lo) + std::abs(hi)) && r.iterations < 200) {
    const double mid = 0.5 * (lo + hi);
    const double f = final_mu(mid);
    ++r.iterations;
    if (f == 0.0) {
      lo = hi = mid;
      break;
    }
    (f < 0.0 ? lo : hi) = mid;
  }
  r.mu0 = 0.5 * (lo + hi);
  r.mu_final = final_mu(r.mu0);
  return r;
}

struct GammaPoint {
  double m2 = 0.0;
  int mass_scale = 0;
  double mu0_c = 0.0;
  double nu_N = 0.0;          ///< L^{-αN} μ_N
  double dnuN_dnu0 = 0.0;     ///< L^{-αN} ∂μ_N/∂μ₀
};

struct GammaEstimate {
  double slope = 0.0;              ///< d log(∂ν_N/∂ν₀) / d log m²
  double slope_stderr = 0.0;
  double rms_residual = 0.0;
  double gamma = 0.0;              ///< 1/(1 - slope), integrating ∂χ/∂ν ≍ -χ^{2-slope}
  double gamma_first_order = 0.0;  ///< 1 + slope
  double first_order_target = 0.0;  ///< 1 + kε/α
  double s0 = 0.0;
  int N = 0;
  std::vector<GammaPoint> points;
};

/// For each m², shoot μ₀^c over N scales starting at s₀ (default s̄ for the
/// β limit), read ν_N and its ν₀-sensitivity, then fit the log-log slope.
inline GammaEstimate extract_gamma(const FlowParams& base, const BetaSource& beta, const std::vector<double>& m2_grid,
                                   int N = 0, double s0 = -1.0, double max_rms = 0.05) {
  if (m2_grid.size() < 3) throw ConfigurationError("rg-flow", "m^2 grid needs at least three points");
  const auto [lo, hi] = std::minmax_element(m2_grid.begin(), m2_grid.end());
  if (!(*lo > 0.0)) throw DomainError("rg-flow", "m^2 grid must be positive");
  if (*hi < 100.0 * *lo) throw ConfigurationError("rg-flow", "m^2 grid must span at least two decades");
  const int jm_max = mass_scale(*lo, base.alpha, base.L);
  if (N <= 0) N = jm_max + 2;
  if (jm_max > N) throw ConfigurationError("rg-flow", "mass scale of the smallest m^2 exceeds N");
  GammaEstimate g;
  g.N = N;
  const double a = beta.limit();
  g.s0 = s0 >= 0.0 ? s0 : (1.0 - std::pow(static_cast<double>(base.L), -base.eps)) / a;
  std::vector<double> x, y;
  for (double m2 : m2_grid) {
    FlowParams p = base;
    p.m2 = m2;
    GammaPoint pt;
    pt.m2 = m2;
    pt.mass_scale = mass_scale(m2, p.alpha, p.L);
    pt.mu0_c = shoot_critical_mu0(g.s0, N, beta, p).mu0;
    const auto tr = run_flow(g.s0, pt.mu0_c, N, beta, p);
    if (tr.end != FlowEnd::Completed) throw NumericalError("rg-flow", "critical trajectory did not complete");
    const double scale = std::pow(static_cast<double>(p.L), -p.alpha * N);
    pt.nu_N = scale * tr.states.back().mu;
    pt.dnuN_dnu0 = scale * tr.states.back().dmu_dmu0;
    x.push_back(std::log(m2));
    y.push_back(std::log(pt.dnuN_dnu0));
    g.points.push_back(pt);
  }
  const auto fit = fit_line(x, y);
  g.slope = fit.slope;
  g.slope_stderr = fit.slope_stderr;
  g.rms_residual = fit.rms_residual;
  g.gamma = 1.0 / (1.0 - g.slope);
  g.gamma_first_order = 1.0 + g.slope;
  g.first_order_target = 1.0 + base.k() * base.eps / base.alpha;
  if (g.rms_residual > max_rms)
    throw NumericalError("rg-flow", "exponent fit did not converge (rms residual " + std::to_string(g.rms_residual) + ")");
  return g;
}

/// Log-spaced grid from hi down to lo.
inline std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g;
  for (int i = 0; i < points; ++i)
    g.push_back(std::exp(std::log(hi) + (std::log(lo) - std::log(hi)) * i / std::max(1, points - 1)));
  return g;
}

enum class PortraitClass { ConvergesToFixedPoint, MuDivergesUp, MuDivergesDown, SDiverges };

inline const char* to_string(PortraitClass c) {
  switch (c) {
    case PortraitClass::ConvergesToFixedPoint: return "fixed-point";
    case PortraitClass::MuDivergesUp: return "mu-up";
    case PortraitClass::MuDivergesDown: return "mu-down";
    case PortraitClass::SDiverges: return "s-diverges";
  }
  return "?";
}

struct PortraitTrajectory {
  double s0 = 0.0;
  double mu0 = 0.0;
  FlowTrajectory flow;
  PortraitClass cls = PortraitClass::ConvergesToFixedPoint;
};

/// Massless constant-β trajectories from each (s₀, μ₀); |μ| beyond mu_escape
/// (or overflow) classifies as μ-divergence.
inline std::vector<PortraitTrajectory> phase_portrait(const FlowParams& base, double a, const std::vector<double>& s0s,
                                                      const std::vector<double>& mu0s, int j_max,
                                                      double mu_escape = 1e3) {
  FlowParams p = base;
  p.m2 = 0.0;
  const BetaSource beta = BetaSource::constant(a);
  std::vector<PortraitTrajectory> out;
  for (double s0 : s0s)
    for (double mu0 : mu0s) {
      PortraitTrajectory t;
      t.s0 = s0;
      t.mu0 = mu0;
      t.flow = run_flow(s0, mu0, j_max, beta, p);
      const auto& last = t.flow.states.back();
      if (!std::isfinite(last.s) || std::abs(last.s) > p.overflow || last.s < -1.0 / a) {
        t.cls = PortraitClass::SDiverges;
      } else if (last.mu > mu_escape) {
        t.cls = PortraitClass::MuDivergesUp;
      } else if (last.mu < -mu_escape) {
        t.cls = PortraitClass::MuDivergesDown;
      } else {
        t.cls = PortraitClass::ConvergesToFixedPoint;
      }
      out.push_back(std::move(t));
    }
  return out;
}

}  // namespace walkrg
