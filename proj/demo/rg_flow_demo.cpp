// Fixed points of the toy flow, a few trajectories, and gamma for n = 0, 1, 2.
#include <fmt/format.h>

#include "walkrg/rg_flow.hpp"

int main() {
  using namespace walkrg;
  FlowParams p;  // L = 2, eps = 0.1, alpha = 0.55
  const auto beta = BetaSource::decomposition(1, p);
  const double a = beta.limit();
  fmt::print("a = {:.4f}\n", a);
  for (const auto& f : find_fixed_points(p.eps, a, p.L))
    fmt::print("fixed point s = {:.6f}, multiplier {:.4f}, {}\n", f.s, f.multiplier, f.stable ? "stable" : "unstable");

  const double sbar = find_fixed_points(p.eps, a, p.L).back().s;
  for (const auto& t : phase_portrait(p, a, {0.5 * sbar, 2.0 * sbar}, {-0.01, 0.0, 0.01}, 60))
    fmt::print("s0 = {:.4f} mu0 = {:+.3f}: {} after {} steps, s = {:.5f}\n", t.s0, t.mu0, to_string(t.cls),
               t.flow.states.size() - 1, t.flow.states.back().s);

  for (double n : {0.0, 1.0, 2.0}) {
    FlowParams q = p;
    q.n = n;
    const auto g = extract_gamma(q, BetaSource::decomposition(1, q), log_grid(1e-6, 1e-2, 21));
    fmt::print("n = {}: gamma = {:.4f}, 1 + k eps/alpha = {:.4f}\n", n, g.gamma, g.first_order_target);
  }
}
