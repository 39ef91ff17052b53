// Counts SAWs in d = 2..4 and prints the two connective-constant estimators.
#include <fmt/format.h>

#include "walkrg/saw_enum.hpp"

int main(int argc, char** argv) {
  using namespace walkrg;
  const int n_max = argc > 1 ? std::atoi(argv[1]) : 12;
  for (int d = 2; d <= 4; ++d) {
    const int n = d == 4 ? std::min(n_max, 9) : n_max;
    const auto r = count_saw(d, n);
    const auto e = connective_estimates(r);
    fmt::print("d = {}\n{:>4} {:>16} {:>9} {:>9}\n", d, "n", "c_n", "ratio", "root");
    for (std::size_t k = 1; k < r.counts.size(); ++k)
      fmt::print("{:>4} {:>16} {:>9.4f} {:>9.4f}\n", k, r.counts[k].str(), k >= 2 ? e.ratio[k] : 0.0, e.nth_root[k]);
    fmt::print("violations of c_(n+m) <= c_n c_m: {}\n\n", submultiplicativity_violations(r.counts).size());
  }
}
