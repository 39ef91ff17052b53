// End-to-end acceptance run: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <fmt/format.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "walkrg/gaussian.hpp"
#include "walkrg/instances.hpp"
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
#ifndef WALKRG_SOURCE_DIR
#define WALKRG_SOURCE_DIR "."
#endif

using namespace walkrg;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, std::string what) {
    pass = pass && ok;
    notes.push_back((ok ? "" : "[failed] ") + std::move(what));
  }
};

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<BigInt> golden_counts() {
  std::ifstream in(std::string(WALKRG_DATA_DIR) + "/saw_d3_counts.csv");
  if (!in) throw std::runtime_error("cannot read the stored d = 3 count table");
  return read_counts_csv(in);
}

// Pulls (n, c_n) pairs out of the published LaTeX count table that ships
// with the sources; digits are grouped with "\,".
std::map<int, std::string> published_counts() {
  std::ifstream in(std::string(WALKRG_SOURCE_DIR) + "/paper.md");
  if (!in) return {};
  std::stringstream all;
  all << in.rdbuf();
  const std::string text = all.str();
  const auto start = text.find("\\label{table:sawcount}");
  if (start == std::string::npos) return {};
  const auto stop = text.find("\\end{tabular}", start);
  std::string body = text.substr(start, stop - start);
  body = body.substr(body.find("\\hline", body.find("$c_n$\\\\")) + 6);
  body = std::regex_replace(body, std::regex(R"(\\,)"), "");
  body = std::regex_replace(body, std::regex(R"(\\\\|\\hline)"), " ");
  std::vector<std::string> tok;
  std::istringstream is(std::regex_replace(body, std::regex("&"), " "));
  for (std::string t; is >> t;) tok.push_back(t);
  std::map<int, std::string> out;
  for (std::size_t i = 0; i + 1 < tok.size(); i += 2) out[std::stoi(tok[i])] = tok[i + 1];
  return out;
}

// ---------------------------------------------------------------------------

Outcome exact_enumeration() {
  Outcome o;
  EnumerationOptions opt;
  opt.threads = threads();
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = count_saw(3, 12, opt);
  const double secs = seconds_since(t0);
  const auto table = golden_counts();
  bool same = r.complete() && table.size() > 12;
  for (int n = 1; same && n <= 12; ++n) same = r.counts[static_cast<std::size_t>(n)] == table[static_cast<std::size_t>(n)];
  o.require(same, fmt::format("enumerated c_1..c_12 equal the stored table, c_12 = {}", r.counts.back().str()));
  o.require(r.counts.back().str() == "198842742", "c_12 = 198842742");
  o.require(secs < 600.0, fmt::format("enumeration took {:.1f} s (limit 600 s)", secs));

  const auto published = published_counts();
  bool same_as_published = published.size() == 36 && table.size() == 37;
  for (const auto& [n, c] : published) same_as_published = same_as_published && n >= 1 && n <= 36 && table[static_cast<std::size_t>(n)].str() == c;
  o.require(same_as_published, fmt::format("stored table equals the {} published entries for n <= 36", published.size()));

  const auto e = connective_estimates(table);
  bool pipeline = true;
  for (std::size_t n = 2; n < table.size(); ++n) {
    const double q = static_cast<double>(table[n]) / static_cast<double>(table[n - 1]);
    pipeline = pipeline && std::abs(e.ratio[n] - q) <= 1e-12 * q;
  }
  for (std::size_t n = 3; n < table.size(); ++n) pipeline = pipeline && e.nth_root[n] < e.nth_root[n - 1];
  for (const auto& b : check_bounds(table, 4.68, 3.0)) pipeline = pipeline && b.lower_holds;
  o.require(pipeline, fmt::format("ratio and n-th root estimators consistent to n = 36 (ratio_36 = {:.4f}, root_36 = {:.4f})",
                                  e.ratio[36], e.nth_root[36]));
  return o;
}

Outcome submultiplicativity() {
  Outcome o;
  EnumerationOptions opt;
  opt.threads = threads();
  std::size_t pairs = 0;
  bool ok = true;
  auto check = [&](const std::vector<BigInt>& c, const std::string& label) {
    const auto bad = submultiplicativity_violations(c);
    const std::size_t N = c.size() - 1;
    pairs += N * (N - 1) / 2;
    ok = ok && bad.empty();
    o.notes.push_back(fmt::format("{}: {} violation(s)", label, bad.size()));
  };
  for (int d = 2; d <= 5; ++d) {
    const int n = d == 2 ? 16 : d == 3 ? 12 : d == 4 ? 9 : 8;
    check(count_saw(d, n, opt).counts, fmt::format("d = {} enumerated to n = {}", d, n));
  }
  check(golden_counts(), "stored d = 3 table to n = 36");
  o.require(ok, fmt::format("c_(n+m) <= c_n c_m for every pair with n + m in range ({} pairs)", pairs));
  return o;
}

Outcome pivot_exponents() {
  Outcome o;
  const std::vector<int> lengths{64, 128, 256, 512, 1024};
  struct Case {
    int d;
    double lo, hi;
  };
  for (const Case c : {Case{2, 0.72, 0.78}, Case{5, 0.46, 0.54}}) {
    PivotRunConfig cfg;
    cfg.accepted_samples = 100000;
    cfg.seed = 2024 + static_cast<std::uint64_t>(c.d);
    cfg.threads = threads();
    const auto t0 = std::chrono::steady_clock::now();
    const auto est = estimate_nu(c.d, lengths, cfg);
    const double secs = seconds_since(t0);
    std::uint64_t fewest = std::numeric_limits<std::uint64_t>::max();
    for (const auto& s : est.per_length) fewest = std::min(fewest, s.samples);
    o.require(est.nu >= c.lo && est.nu <= c.hi,
              fmt::format("d = {}: nu = {:.4f} +- {:.4f}, window [{}, {}]", c.d, est.nu, est.stderr, c.lo, c.hi));
    o.require(fewest >= 100000, fmt::format("d = {}: >= 1e5 accepted moves per length (fewest {})", c.d, fewest));
    o.require(secs <= 1800.0, fmt::format("d = {}: {:.1f} s (limit 1800 s)", c.d, secs));
  }
  return o;
}

// ∫∫ 1{X(s) = X(t)} ds dt by summing over pairs of holding intervals.
double brute_force_I(const CTWalkTrajectory& w) {
  double s = 0;
  for (std::size_t i = 0; i < w.positions.size(); ++i)
    for (std::size_t j = 0; j < w.positions.size(); ++j)
      if (w.positions[i] == w.positions[j]) {
        const auto [a, b] = w.interval(i);
        const auto [c, d] = w.interval(j);
        s += (b - a) * (d - c);
      }
  return s;
}

Outcome wsaw_checks() {
  Outcome o;
  const auto e = estimate_chi(WalkGenerator::nearest_neighbour(1), 0.0, 2.0, 10.0, 0.05, 2000, 7, threads());
  const double rel = std::abs(e.chi - 0.5) / 0.5;
  o.require(rel <= 0.01 && e.error_bar() <= 0.005,
            fmt::format("g = 0, nu = 2: chi = {:.6f}, combined error bar {:.2e}, |chi - 0.5|/0.5 = {:.2e}", e.chi,
                        e.error_bar(), rel));
  o.require(std::abs(e.chi - 0.5) <= e.error_bar(), "0.5 lies inside the reported error bar");

  const std::size_t paths = 1000000;
  std::size_t violations = 0;
  double worst_ratio = 0.0;
  Rng master(99);
  for (std::size_t p = 0; p < paths; ++p) {
    const int d = 1 + static_cast<int>(p % 3);
    static const WalkGenerator gens[] = {WalkGenerator::nearest_neighbour(1), WalkGenerator::nearest_neighbour(2),
                                         WalkGenerator::nearest_neighbour(3)};
    Rng rng = master.split(p);
    const double T = 0.1 + 3.9 * rng.uniform();
    const auto w = simulate_ct_walk(gens[d - 1], T, rng);
    const double I = self_intersection_local_time(w);
    worst_ratio = std::max(worst_ratio, I / (T * T));
    if (I > T * T * (1 + 1e-14)) ++violations;
  }
  o.require(violations == 0, fmt::format("I(T) <= T^2 on {} paths (max I/T^2 = {:.15f})", paths, worst_ratio));

  double worst = 0.0;
  Rng oracle(5);
  for (int p = 0; p < 100; ++p) {
    Rng rng = oracle.split(static_cast<std::uint64_t>(p));
    const auto w = simulate_ct_walk(WalkGenerator::nearest_neighbour(1 + p % 3), 2.0 + 0.1 * p, rng);
    const double I = self_intersection_local_time(w);
    worst = std::max(worst, std::abs(I - brute_force_I(w)) / std::max(1.0, I));
  }
  o.require(worst <= 1e-10, fmt::format("sum of squared local times vs double integral on 100 paths: {:.2e}", worst));
  return o;
}

Outcome gaussian_engine() {
  Outcome o;
  const TorusLattice t(1, 2, 2);
  const double m2 = 0.3;
  const auto C = build_covariance(t, 1.5, m2);
  const auto& row = C.kernel.row();
  const double zero_mode = std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0 / m2);
  const auto dec = decompose(C);
  double progressive = 0.0;
  for (int i = 0; i < 20; ++i) {
    Rng rng(31, static_cast<std::uint64_t>(i));
    const auto obs = instances::random_poly(rng, static_cast<int>(t.volume()), 6, 8);
    progressive = std::max(progressive, progressive_check(dec.piece(1), dec.piece(2), obs).residual);
  }
  o.require(progressive <= 1e-9, fmt::format("progressive integration on 20 random sextics: {:.2e}", progressive));
  o.require(dec.reconstruction_error <= 1e-9, fmt::format("sum of C_j reconstructs C: {:.2e}", dec.reconstruction_error));
  o.require(zero_mode <= 1e-10, fmt::format("sum_x C(0, x) = 1/m^2: {:.2e}", zero_mode));
  return o;
}

Outcome polymer_algebra() {
  Outcome o;
  const TorusLattice t(1, 2, 2);
  const auto dec = decompose(build_covariance(t, 1.5, 0.5));
  double worst = 0.0;
  const int instances = 24;
  for (int inst = 0; inst < instances; ++inst) {
    Rng rng(41, static_cast<std::uint64_t>(inst));
    const auto I = instances::random_block_factorized(t, 0, rng, 2);
    const auto Ip = instances::random_block_factorized(t, 0, rng, 2);
    const auto K = instances::random_functional(t, 0, rng, 2);
    const Reblocker rb(t, I, Ip, K, GaussianStep(dec.piece(1 + inst % 2)));
    worst = std::max(worst, max_coefficient_difference(rb.lhs(), rb.rhs()));
  }
  o.require(worst <= 1e-9, fmt::format("reblocking identity on {} random (I, I+, K): {:.2e}", instances, worst));

  // every polymer of a 3-block circle, range-2 covariance
  const TorusLattice tf(1, 2, 3);
  double defect = 0.0, defect_in = 0.0;
  for (int inst = 0; inst < 5; ++inst) {
    Rng rng(43, static_cast<std::uint64_t>(inst));
    const auto I = instances::random_block_factorized(tf, 0, rng, 1);
    const auto Ip = instances::random_block_factorized(tf, 0, rng, 1);
    const auto K = instances::component_factorized(tf, 0, rng, 1);
    defect_in = std::max(defect_in, component_factorization_defect(tf, K));
    const Reblocker rb(tf, I, Ip, K, GaussianStep(finite_range_covariance(tf, 2, 0.7)));
    defect = std::max(defect, component_factorization_defect(tf, rb.K_tilde_functional()));
  }
  o.require(defect_in <= 1e-12 && defect <= 1e-12,
            fmt::format("component factorization preserved, finite-range covariance: defect {:.2e}", defect));
  return o;
}

Outcome rg_flow_checks() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  auto params = [](double n, double eps) {
    FlowParams p;
    p.n = n;
    p.eps = eps;
    p.alpha = (1.0 + eps) / 2.0;
    return p;
  };
  const auto p = params(1, 0.1);
  const auto beta = BetaSource::decomposition(1, p);
  const double a = beta.limit();
  const double sbar = (1.0 - std::pow(2.0, -0.1)) / a;
  const double residual = std::abs(step_flow(FlowState{0, sbar, 0.0, 0.0, 1.0}, a, p).s - sbar);
  o.require(residual <= 1e-14, fmt::format("fixed-point residual at s_bar = {:.6f}: {:.1e}", sbar, residual));

  const auto grid = log_grid(1e-6, 1e-2, 41);
  const auto g1 = extract_gamma(p, beta, grid);
  o.require(std::abs(g1.gamma - 1.0606) <= 0.02, fmt::format("n = 1: gamma = {:.4f} (target 1.0606 +- 0.02)", g1.gamma));

  const auto p0 = params(0, 0.1);
  const auto g0 = extract_gamma(p0, BetaSource::decomposition(1, p0), grid);
  const double coeff = (g0.gamma - 1.0) * p0.alpha / p0.eps;
  o.require(std::abs(g0.gamma - (1.0 + 0.25 * p0.eps / p0.alpha)) <= 0.02,
            fmt::format("n = 0: gamma = {:.4f}, coefficient of eps/alpha = {:.3f} (1/4)", g0.gamma, coeff));

  std::string sweep;
  bool down = true;
  double prev = INFINITY;
  for (double eps : {0.1, 0.05, 0.02, 0.01}) {
    const auto pe = params(1, eps);
    const double g = extract_gamma(pe, BetaSource::decomposition(1, pe), log_grid(1e-6, 1e-2, 21)).gamma;
    down = down && g - 1.0 < prev;
    prev = g - 1.0;
    sweep += fmt::format(" {}:{:.4f}", eps, g);
  }
  const double g_zero = extract_gamma(params(1, 0.0), BetaSource::constant(1.0), log_grid(1e-6, 1e-2, 21)).gamma;
  o.require(down && prev < 0.01 && std::abs(g_zero - 1.0) < 1e-9,
            fmt::format("eps sweep{} and eps = 0 gives {:.6f}", sweep, g_zero));
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, fmt::format("runtime {:.1f} s (limit 60 s)", secs));
  return o;
}

Outcome phi4_oracle() {
  Outcome o;
  const auto K = kinetic_operator(two_site_torus());
  QuadratureSpec spec;
  spec.threads = threads();
  double worst = 0.0, split = 0.0;
  for (double g : {0.2, 1.0, 3.0})
    for (double nu : {0.3, 0.7, 1.4}) {
      const double direct = chi_direct(K, g, nu, 1, spec).chi;
      const double a = chi_via_ZN(K, g, nu - 0.4, 0.4, 1, spec).chi;
      const double b = chi_via_ZN(K, g, nu - 0.2, 0.2, 1, spec).chi;
      worst = std::max(worst, std::abs(a - direct));
      split = std::max(split, std::abs(a - b));
    }
  o.require(worst <= 1e-6, fmt::format("chi_via_ZN vs chi_direct on the 2-site torus, 3x3 (g, nu): {:.2e}", worst));
  o.require(split <= 1e-6, fmt::format("(nu0, m^2) split at fixed sum: {:.2e}", split));
  return o;
}

Outcome supersymmetry() {
  Outcome o;
  BerezinOptions opt;
  opt.threads = threads();
  double worst = 0.0;
  for (const auto& graph : {single_site_graph(), path_graph(2), two_site_torus()})
    for (double g : {0.3, 1.0, 2.5})
      for (double nu : {-0.5, 0.0, 1.0}) worst = std::max(worst, std::abs(evaluate_intrep(graph, g, nu, opt).normalization - 1.0));
  o.require(worst <= 1e-4, fmt::format("normalization on M in {{1, 2}}, 3x3 (g, nu) grid: {:.2e}", worst));

  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double single = 0.0;
  for (double g : {0.2, 1.0, 4.0})
    for (double nu : {-1.0, 0.0, 1.0}) {
      const double ref = GK::integrate([&](double T) { return std::exp(-g * T * T - nu * T); }, 0.0,
                                       std::numeric_limits<double>::infinity(), 15, 1e-13);
      single = std::max(single, std::abs(evaluate_intrep(single_site_graph(), g, nu, opt).chi - ref));
    }
  o.require(single <= 1e-4, fmt::format("single site vs the closed-form integral: {:.2e}", single));

  struct Case {
    WeightedGraph graph;
    double g, nu;
  };
  std::uint64_t seed = 11;
  for (const Case& c : {Case{path_graph(2), 1.0, 1.0}, Case{two_site_torus(), 0.5, 0.5}, Case{path_graph(3), 0.5, 1.0}}) {
    const double form = evaluate_intrep(c.graph, c.g, c.nu, opt).chi;
    const auto walk = estimate_chi(WalkGenerator::graph(c.graph), c.g, c.nu, 25.0 / c.nu, 0.05, 20000, seed++, threads());
    const double tol = walk.error_bar() + 1e-3;
    o.require(std::abs(form - walk.chi) <= tol, fmt::format("{}: form {:.6f} vs walk {:.6f} (tolerance {:.2e})",
                                                           c.graph.name(), form, walk.chi, tol));
  }
  return o;
}

Outcome stated_limits() {
  Outcome o;
  o.notes = {"not reproducible at desk scale and not attempted:",
             "the d = 4 logarithmic corrections |log t|^(1/4) and |log t|^((n+2)/(n+8))",
             "d = 3 exponents beyond the pivot windows",
             "the stable-process scaling limit of the long-range walk",
             "covered instead by the property checks of criteria 2 and 4-9"};
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact enumeration, d = 3", exact_enumeration},
      {"submultiplicativity", submultiplicativity},
      {"pivot exponents", pivot_exponents},
      {"weakly self-avoiding walk", wsaw_checks},
      {"Gaussian engine", gaussian_engine},
      {"polymer reblocking", polymer_algebra},
      {"RG flow", rg_flow_checks},
      {"phi^4 oracle", phi4_oracle},
      {"supersymmetric representation", supersymmetry},
      {"stated limits", stated_limits}};
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("threw: ") + e.what());
    }
    fmt::print("{} criterion {}: {} ({:.1f} s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, seconds_since(t0));
    for (const auto& n : o.notes) fmt::print("    {}\n", n);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
