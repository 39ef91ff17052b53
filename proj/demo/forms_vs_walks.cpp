// The WSAW susceptibility two ways: Berezin integral of a form, and Monte
// Carlo over continuous-time walks on the same small graph.
#include <fmt/format.h>

#include "walkrg/susy.hpp"
#include "walkrg/wsaw.hpp"

int main() {
  using namespace walkrg;
  struct Case {
    WeightedGraph graph;
    double g;
  };
  // three sites at the default grid only converge for moderate g
  const Case cases[] = {{single_site_graph(), 0.5}, {single_site_graph(), 2.0}, {path_graph(2), 0.5},
                        {path_graph(2), 2.0}, {path_graph(3), 0.5}};
  const double nu = 1.0;
  std::uint64_t seed = 1;
  for (const auto& [graph, g] : cases) {
    const auto form = evaluate_intrep(graph, g, nu);
    const auto walk = estimate_chi(WalkGenerator::graph(graph), g, nu, 25.0, 0.05, 20000, seed++);
    fmt::print("{:<12} g = {:<4} form {:.6f}  walk {:.6f} +- {:.6f}  (normalization {:.8f})\n", graph.name(), g,
               form.chi, walk.chi, walk.error_bar(), form.normalization);
  }
}
