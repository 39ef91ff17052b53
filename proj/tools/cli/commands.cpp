#include "commands.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <map>
#include <memory>
#include <numeric>

#include "params.hpp"
#include "walkrg/gaussian.hpp"
#include "walkrg/instances.hpp"
#include "walkrg/longrange.hpp"
#include "walkrg/phi4_tiny.hpp"
#include "walkrg/pivot.hpp"
#include "walkrg/polymer.hpp"
#include "walkrg/rg_flow.hpp"
#include "walkrg/saw_enum.hpp"
#include "walkrg/susy.hpp"
#include "walkrg/wsaw.hpp"

#ifndef WALKRG_DATA_DIR
#define WALKRG_DATA_DIR "data"
#endif

namespace walkrg::cli {

std::string num(double x) { return fmt::format("{}", x); }

std::ofstream RunContext::open(const std::string& name) {
  std::ofstream f(out_dir / name, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + (out_dir / name).string());
  files.push_back(name);
  return f;
}

void RunContext::write_summary(const std::string& name, const json& summary) { open(name) << summary.dump() << '\n'; }

namespace {

int geti(const json& p, const char* k) { return static_cast<int>(p.at(k).get<std::int64_t>()); }
double getd(const json& p, const char* k) { return p.at(k).get<double>(); }

bool verdict(RunContext& ctx, const std::string& what, bool ok) {
  if (ctx.check) fmt::print(ctx.say(), "check {}: {}\n", what, ok ? "PASS" : "FAIL");
  return ok;
}

std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 1) throw ConfigError("points", "need at least one point");
  std::vector<double> g;
  for (int i = 0; i < points; ++i) g.push_back(points == 1 ? lo : lo + (hi - lo) * i / (points - 1));
  return g;
}

// ---------------------------------------------------------------------------

bool enumerate(const json& p, RunContext& ctx) {
  EnumerationOptions opt;
  opt.threads = ctx.threads;
  opt.symmetry_reduction = p.at("symmetry").get<bool>();
  if (const double b = getd(p, "budget_seconds"); b > 0) opt.time_budget_seconds = b;
  const int d = geti(p, "d");
  const auto r = count_saw(d, geti(p, "n"), opt);
  const auto bad = submultiplicativity_violations(r.counts);

  auto csv = ctx.open("enumerate.csv");
  csv << "n,c_n,ratio,nth_root\n";
  std::vector<double> ratio(r.counts.size(), 0.0), root(r.counts.size(), 0.0);
  if (r.counts.size() >= 3) {
    const auto e = connective_estimates(r.counts);
    ratio = e.ratio;
    root = e.nth_root;
  }
  for (std::size_t n = 1; n < r.counts.size(); ++n)
    csv << n << ',' << r.counts[n].str() << ',' << num(ratio[n]) << ',' << num(root[n]) << '\n';
  csv.close();

  ctx.write_summary("enumerate.summary.jsonl", {{"d", d},
                                                {"n_max", r.n_max},
                                                {"high_water", r.high_water},
                                                {"complete", r.complete()},
                                                {"c_last", r.counts.back().str()},
                                                {"submultiplicativity_violations", bad.size()}});
  fmt::print(ctx.say(), "c_{} = {} (d = {}){}\n", r.high_water, r.counts.back().str(), d,
             r.complete() ? "" : fmt::format(", budget reached before n = {}", r.n_max));
  if (!ctx.check) return true;

  std::string golden = p.at("golden").get<std::string>();
  if (golden.empty()) {
    if (d != 3) throw ConfigError("golden", "no bundled table for d != 3; pass a counts file");
    golden = std::string(WALKRG_DATA_DIR) + "/saw_d3_counts.csv";
  }
  std::ifstream in(golden);
  if (!in) throw ConfigError("golden", "cannot read " + golden);
  const auto ref = read_counts_csv(in);
  bool match = r.complete();
  const std::size_t top = std::min(ref.size(), r.counts.size());
  for (std::size_t n = 1; n < top; ++n) match = match && ref[n] == r.counts[n];
  bool ok = verdict(ctx, fmt::format("counts equal the table for n <= {}", top - 1), match);
  ok = verdict(ctx, "submultiplicativity", bad.empty()) && ok;
  return ok;
}

bool pivot(const json& p, RunContext& ctx) {
  PivotRunConfig cfg;
  cfg.seed = ctx.seed;
  cfg.threads = ctx.threads;
  cfg.accepted_samples = p.at("samples").get<std::uint64_t>();
  cfg.burn_in = p.at("burn_in").get<std::uint64_t>();
  const int d = geti(p, "d");
  const auto lengths = p.at("lengths").get<std::vector<int>>();
  const auto est = estimate_nu(d, lengths, cfg);

  auto csv = ctx.open("pivot.csv");
  csv << "n,R2,stderr,acceptance,samples\n";
  for (const auto& s : est.per_length)
    csv << s.n << ',' << num(s.mean_r2) << ',' << num(s.stderr_r2) << ',' << num(s.acceptance) << ',' << s.samples << '\n';
  csv.close();
  ctx.write_summary("pivot.summary.jsonl", {{"d", d},
                                            {"nu", est.nu},
                                            {"stderr", est.stderr},
                                            {"ci_low", est.ci_low},
                                            {"ci_high", est.ci_high},
                                            {"rms_residual", est.rms_residual}});
  fmt::print(ctx.say(), "nu = {:.4f} +- {:.4f} (d = {})\n", est.nu, est.stderr, d);
  if (!ctx.check) return true;

  double lo = getd(p, "nu_min"), hi = getd(p, "nu_max");
  if (lo == 0.0 && hi == 0.0) {
    static const std::map<int, std::pair<double, double>> windows{{2, {0.72, 0.78}}, {3, {0.5576, 0.6176}}, {5, {0.46, 0.54}}};
    const auto it = windows.find(d);
    if (it == windows.end()) throw ConfigError("nu_min", "no built-in window for this dimension; set nu_min and nu_max");
    std::tie(lo, hi) = it->second;
  }
  return verdict(ctx, fmt::format("nu in [{}, {}]", lo, hi), est.nu >= lo && est.nu <= hi);
}

WalkGenerator make_walk(const json& p) {
  const auto walk = p.at("walk").get<std::string>();
  if (walk == "nn") return WalkGenerator::nearest_neighbour(geti(p, "d"));
  if (walk == "longrange")
    return WalkGenerator::long_range(std::make_shared<LongRangeStepSampler>(geti(p, "d"), getd(p, "alpha")));
  return WalkGenerator::graph(graph_by_name(walk));
}

bool wsaw(const json& p, RunContext& ctx) {
  const double g = getd(p, "g"), nu = getd(p, "nu");
  const auto e = estimate_chi(make_walk(p), g, nu, getd(p, "T_max"), getd(p, "dT"), p.at("samples").get<std::size_t>(),
                              ctx.seed, ctx.threads);
  auto csv = ctx.open("wsaw.csv");
  csv << "T,c,stderr\n";
  for (std::size_t k = 0; k < e.T.size(); ++k) csv << num(e.T[k]) << ',' << num(e.c_mean[k]) << ',' << num(e.c_stderr[k]) << '\n';
  csv.close();
  ctx.write_summary("wsaw.summary.jsonl", {{"chi", e.chi},
                                           {"mc_stderr", e.mc_stderr},
                                           {"quadrature_error", e.quadrature_error},
                                           {"tail_bound", e.tail_bound},
                                           {"error_bar", e.error_bar()},
                                           {"inverse_mass", 1.0 / nu}});
  fmt::print(ctx.say(), "chi = {:.6f} +- {:.6f}\n", e.chi, e.error_bar());
  if (!ctx.check) return true;
  bool ok = verdict(ctx, "chi <= 1/nu", e.chi <= 1.0 / nu + e.quadrature_error + e.tail_bound);
  if (g == 0.0) ok = verdict(ctx, "g = 0 gives 1/nu", std::abs(e.chi - 1.0 / nu) <= e.error_bar()) && ok;
  return ok;
}

bool gaussian_check(const json& p, RunContext& ctx) {
  const TorusLattice t(geti(p, "d"), geti(p, "L"), geti(p, "N"));
  const double m2 = getd(p, "m2");
  const auto C = build_covariance(t, getd(p, "alpha"), m2);
  const auto& row = C.kernel.row();
  const double zero_mode = std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0 / m2) / std::max(1.0, 1.0 / m2);
  const auto dec = decompose(C);
  const double min_mult = *std::min_element(dec.min_multiplier.begin(), dec.min_multiplier.end());

  auto csv = ctx.open("gaussian-check.csv");
  csv << "check,instance,value\n";
  csv << "zero_mode,0," << num(zero_mode) << '\n';
  csv << "reconstruction,0," << num(dec.reconstruction_error) << '\n';
  for (int j = 1; j <= dec.size(); ++j) csv << "min_multiplier," << j << ',' << num(dec.min_multiplier[static_cast<std::size_t>(j - 1)]) << '\n';

  const int observables = geti(p, "observables");
  double progressive = 0.0;
  if (observables > 0) {
    if (dec.size() < 2) throw ConfigError("N", "the progressive identity needs N >= 2");
    const int vars = static_cast<int>(t.volume());
    for (int i = 0; i < observables; ++i) {
      Rng rng(ctx.seed, static_cast<std::uint64_t>(i));
      const auto obs = instances::random_poly(rng, vars, geti(p, "degree"), geti(p, "terms"));
      const double r = progressive_check(dec.piece(1), dec.piece(2), obs).residual;
      progressive = std::max(progressive, r);
      csv << "progressive," << i << ',' << num(r) << '\n';
    }
  }
  csv.close();
  ctx.write_summary("gaussian-check.summary.jsonl", {{"zero_mode_residual", zero_mode},
                                                     {"reconstruction_error", dec.reconstruction_error},
                                                     {"min_multiplier", min_mult},
                                                     {"progressive_residual", progressive},
                                                     {"observables", observables}});
  fmt::print(ctx.say(), "zero mode {:.3g}, reconstruction {:.3g}, progressive {:.3g}\n", zero_mode,
             dec.reconstruction_error, progressive);
  if (!ctx.check) return true;
  bool ok = verdict(ctx, "zero-mode identity", zero_mode <= 1e-10);
  ok = verdict(ctx, "decomposition reconstructs C", dec.reconstruction_error <= 1e-9) && ok;
  ok = verdict(ctx, "pieces positive semidefinite", min_mult >= -1e-10) && ok;
  if (observables > 0) ok = verdict(ctx, "progressive integration", progressive <= 1e-9) && ok;
  return ok;
}

bool polymer_check(const json& p, RunContext& ctx) {
  const int L = geti(p, "L");
  const TorusLattice t(1, L, geti(p, "N"));
  const auto dec = decompose(build_covariance(t, getd(p, "alpha"), getd(p, "m2")));
  const int degree = geti(p, "degree");
  auto csv = ctx.open("polymer-check.csv");
  csv << "check,instance,value\n";
  double worst = 0.0;
  for (int inst = 0; inst < geti(p, "instances"); ++inst) {
    Rng rng(ctx.seed, static_cast<std::uint64_t>(inst));
    const auto I = instances::random_block_factorized(t, 0, rng, degree);
    const auto Ip = instances::random_block_factorized(t, 0, rng, degree);
    const auto K = instances::random_functional(t, 0, rng, degree);
    const Reblocker rb(t, I, Ip, K, GaussianStep(dec.piece(1 + inst % std::min(2, dec.size()))));
    const double r = max_coefficient_difference(rb.lhs(), rb.rhs());
    worst = std::max(worst, r);
    csv << "reblocking," << inst << ',' << num(r) << '\n';
  }

  const TorusLattice tf(1, L, geti(p, "factor_N"));
  Rng rng(ctx.seed, 1u << 20);
  const auto I = instances::random_block_factorized(tf, 0, rng, 1);
  const auto Ip = instances::random_block_factorized(tf, 0, rng, 1);
  const auto K = instances::component_factorized(tf, 0, rng, 1);
  const double before = component_factorization_defect(tf, K);
  const Reblocker rb(tf, I, Ip, K, GaussianStep(finite_range_covariance(tf, geti(p, "factor_range"), 0.7)));
  const double after = component_factorization_defect(tf, rb.K_tilde_functional());
  csv << "factorization_in,0," << num(before) << '\n' << "factorization_out,0," << num(after) << '\n';
  csv.close();
  ctx.write_summary("polymer-check.summary.jsonl",
                    {{"reblocking_residual", worst}, {"factorization_defect_in", before}, {"factorization_defect_out", after}});
  fmt::print(ctx.say(), "reblocking residual {:.3g}, factorization defect {:.3g}\n", worst, after);
  if (!ctx.check) return true;
  bool ok = verdict(ctx, "reblocking identity", worst <= 1e-9);
  ok = verdict(ctx, "component factorization preserved", before <= 1e-12 && after <= 1e-12) && ok;
  return ok;
}

FlowParams flow_params(const json& p) {
  FlowParams f;
  f.L = geti(p, "L");
  f.eps = getd(p, "eps");
  f.alpha = getd(p, "alpha");
  f.n = getd(p, "n");
  return f;
}

bool rg_flow(const json& p, RunContext& ctx) {
  FlowParams fp = flow_params(p);
  const auto kind = p.at("beta").get<std::string>();
  if (kind != "decomposition" && kind != "constant") throw ConfigError("beta", "expected 'decomposition' or 'constant'");
  const int d = geti(p, "d");
  if (fp.alpha == 0.0) {
    fp.alpha = 0.5 * (d + fp.eps);
  } else if (kind == "decomposition" && std::abs(2.0 * fp.alpha - d - fp.eps) > 1e-12) {
    // the table's L^{-eps j} only cancels the growth of the sum when eps = 2 alpha - d
    throw ConfigError("alpha", fmt::format("decomposition beta needs eps = 2 alpha - d, got eps {} with 2 alpha - d = {}",
                                           fp.eps, 2.0 * fp.alpha - d));
  }
  const BetaSource beta = kind == "constant" ? BetaSource::constant(getd(p, "a")) : BetaSource::decomposition(d, fp);
  const double a = beta.limit();
  json fixed = json::array();
  double residual = 0.0;
  for (const auto& f : find_fixed_points(fp.eps, a, fp.L)) {
    const double r = std::abs(step_flow(FlowState{0, f.s, 0.0, 0.0, 1.0}, a, fp).s - f.s);
    residual = std::max(residual, r);
    fixed.push_back({{"s", f.s}, {"multiplier", f.multiplier}, {"stable", f.stable}, {"residual", r}});
  }
  const auto g = extract_gamma(fp, beta, log_grid(getd(p, "m2_min"), getd(p, "m2_max"), geti(p, "points")), geti(p, "N"));
  const double gamma_err = g.slope_stderr / ((1.0 - g.slope) * (1.0 - g.slope));

  auto csv = ctx.open("rg-flow.csv");
  csv << "m2,mass_scale,mu0_c,nu_N,dnuN_dnu0\n";
  for (const auto& pt : g.points)
    csv << num(pt.m2) << ',' << pt.mass_scale << ',' << num(pt.mu0_c) << ',' << num(pt.nu_N) << ',' << num(pt.dnuN_dnu0) << '\n';
  csv.close();
  ctx.write_summary("rg-flow.summary.jsonl", {{"gamma", g.gamma},
                                              {"gamma_fit_error", gamma_err},
                                              {"slope", g.slope},
                                              {"slope_stderr", g.slope_stderr},
                                              {"rms_residual", g.rms_residual},
                                              {"gamma_first_order", g.gamma_first_order},
                                              {"first_order_target", g.first_order_target},
                                              {"a", a},
                                              {"s0", g.s0},
                                              {"N", g.N},
                                              {"alpha", fp.alpha},
                                              {"fixed_points", fixed},
                                              {"fixed_point_residual", residual}});
  fmt::print(ctx.say(), "gamma = {:.3f} +- {:.3f} (1 + k eps/alpha = {:.4f}, a = {:.4f})\n", g.gamma, gamma_err,
             g.first_order_target, a);
  if (!ctx.check) return true;
  bool ok = verdict(ctx, "fixed-point residual <= 1e-14", residual <= 1e-14);
  ok = verdict(ctx, "gamma near 1 + k eps/alpha", std::abs(g.gamma - g.first_order_target) <= getd(p, "tolerance")) && ok;
  return ok;
}

bool phase_portrait_cmd(const json& p, RunContext& ctx) {
  const FlowParams fp = flow_params(p);
  const double a = getd(p, "a");
  const auto s0s = linear_grid(getd(p, "s_min"), getd(p, "s_max"), geti(p, "s_points"));
  const auto mu0s = linear_grid(getd(p, "mu_min"), getd(p, "mu_max"), geti(p, "mu_points"));
  const auto traj = phase_portrait(fp, a, s0s, mu0s, geti(p, "j_max"), getd(p, "mu_escape"));

  auto csv = ctx.open("phase-portrait.csv");
  csv << "trajectory,s0,mu0,j,s,mu,class\n";
  std::map<std::string, int> counts;
  bool signs = true;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& t = traj[i];
    ++counts[to_string(t.cls)];
    for (const auto& x : t.flow.states)
      csv << i << ',' << num(t.s0) << ',' << num(t.mu0) << ',' << x.j << ',' << num(x.s) << ',' << num(x.mu) << ','
          << to_string(t.cls) << '\n';
    const double mu = t.flow.states.back().mu;
    if (t.cls == PortraitClass::MuDivergesUp) signs = signs && mu > 0;
    if (t.cls == PortraitClass::MuDivergesDown) signs = signs && mu < 0;
  }
  csv.close();
  const auto fixed = find_fixed_points(fp.eps, a, fp.L);
  const auto stay = phase_portrait(fp, a, {fixed.back().s}, {0.0}, geti(p, "j_max"));
  double drift = 0.0;
  for (const auto& x : stay[0].flow.states) drift = std::max(drift, std::abs(x.s - fixed.back().s) + std::abs(x.mu));
  ctx.write_summary("phase-portrait.summary.jsonl",
                    {{"trajectories", traj.size()}, {"classes", counts}, {"s_bar", fixed.back().s},
                     {"multiplier", fixed.back().multiplier}, {"fixed_point_drift", drift}});
  for (const auto& [k, v] : counts) fmt::print(ctx.say(), "{}: {}\n", k, v);
  if (!ctx.check) return true;
  bool ok = verdict(ctx, "(s_bar, 0) is fixed", drift <= 1e-14);
  ok = verdict(ctx, "divergence classes match the sign of mu", signs) && ok;
  return ok;
}

bool phi4(const json& p, RunContext& ctx) {
  const auto K = kinetic_operator(graph_by_name(p.at("graph").get<std::string>()), getd(p, "kinetic_alpha"));
  const int n = geti(p, "components");
  QuadratureSpec spec;
  spec.nodes = geti(p, "nodes");
  spec.threads = ctx.threads;
  const double m2 = getd(p, "m2"), m2b = getd(p, "m2_alt");
  auto csv = ctx.open("phi4.csv");
  csv << "g,nu,chi_direct,chi_zn,chi_zn_alt,diff,split_diff,quadrature_delta,derivative_error\n";
  double worst = 0.0, worst_split = 0.0;
  for (double g : p.at("g").get<std::vector<double>>())
    for (double nu : p.at("nu").get<std::vector<double>>()) {
      const auto d = chi_direct(K, g, nu, n, spec);
      const auto z = chi_via_ZN(K, g, nu - m2, m2, n, spec);
      const auto zb = chi_via_ZN(K, g, nu - m2b, m2b, n, spec);
      const double diff = std::abs(z.chi - d.chi), split = std::abs(z.chi - zb.chi);
      worst = std::max(worst, diff);
      worst_split = std::max(worst_split, split);
      csv << num(g) << ',' << num(nu) << ',' << num(d.chi) << ',' << num(z.chi) << ',' << num(zb.chi) << ',' << num(diff)
          << ',' << num(split) << ',' << num(std::max(d.quadrature_delta, z.quadrature_delta)) << ','
          << num(z.derivative_error) << '\n';
    }
  csv.close();
  ctx.write_summary("phi4.summary.jsonl", {{"max_direct_vs_zn", worst}, {"max_split_difference", worst_split}});
  fmt::print(ctx.say(), "max |chi_ZN - chi_direct| = {:.3g}, split spread {:.3g}\n", worst, worst_split);
  if (!ctx.check) return true;
  const double tol = getd(p, "tolerance");
  bool ok = verdict(ctx, "chi_via_ZN equals chi_direct", worst <= tol);
  ok = verdict(ctx, "split invariance", worst_split <= tol) && ok;
  return ok;
}

bool susy_check(const json& p, RunContext& ctx) {
  const auto graph = graph_by_name(p.at("graph").get<std::string>());
  const double g = getd(p, "g"), nu = getd(p, "nu");
  BerezinOptions opt;
  opt.nodes = geti(p, "nodes");
  opt.threads = ctx.threads;
  const auto form = evaluate_intrep(minus_laplacian(graph), g, nu, opt);
  const double T_max = getd(p, "T_max") > 0 ? getd(p, "T_max") : 25.0 / nu;
  const auto walk = estimate_chi(WalkGenerator::graph(graph), g, nu, T_max, getd(p, "dT"),
                                 p.at("walk_samples").get<std::size_t>(), ctx.seed, ctx.threads);

  auto csv = ctx.open("susy-check.csv");
  csv << "x,contribution\n";
  for (std::size_t x = 0; x < form.contributions.size(); ++x) csv << x << ',' << num(form.contributions[x]) << '\n';
  csv.close();
  json report{{"graph", graph.name()},
              {"g", g},
              {"nu", nu},
              {"form_chi", form.chi},
              {"normalization", form.normalization},
              {"quadrature_delta", form.quadrature_delta},
              {"walk_chi", walk.chi},
              {"walk_error_bar", walk.error_bar()},
              {"walk_mc_stderr", walk.mc_stderr}};
  const bool single = graph.size() == 1;
  if (single) report["closed_form_chi"] = single_site_walk_chi(g, nu);
  ctx.write_summary("susy-check.summary.jsonl", report);
  fmt::print(ctx.say(), "form chi = {:.6f}, walk chi = {:.6f} +- {:.6f}, normalization = {:.8f}\n", form.chi, walk.chi,
             walk.error_bar(), form.normalization);
  if (!ctx.check) return true;
  bool ok = verdict(ctx, "normalization is 1", std::abs(form.normalization - 1.0) <= getd(p, "tolerance"));
  ok = verdict(ctx, "form side matches the walk", std::abs(form.chi - walk.chi) <= walk.error_bar() + 1e-3) && ok;
  if (single) ok = verdict(ctx, "form side matches the closed form", std::abs(form.chi - single_site_walk_chi(g, nu)) <= 1e-4) && ok;
  return ok;
}

}  // namespace

bool dispatch(const std::string& subcommand, const json& params, RunContext& ctx) {
  using Fn = bool (*)(const json&, RunContext&);
  static const std::map<std::string, Fn> table{
      {"enumerate", enumerate},     {"pivot", pivot},   {"wsaw", wsaw},
      {"gaussian-check", gaussian_check}, {"polymer-check", polymer_check}, {"rg-flow", rg_flow},
      {"phase-portrait", phase_portrait_cmd}, {"phi4", phi4}, {"susy-check", susy_check}};
  const auto it = table.find(subcommand);
  if (it == table.end()) throw ConfigError("", "unknown subcommand '" + subcommand + "'");
  return it->second(params, ctx);
}

}  // namespace walkrg::cli
