#pragma once

// Exact enumeration of n-step self-avoiding walks on Z^d by depth-first
// backtracking over a direct-addressed occupancy box, plus the elementary
// connective-constant diagnostics built on the counts.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "walkrg/errors.hpp"

namespace walkrg {

using BigInt = boost::multiprecision::cpp_int;
using BigFloat = boost::multiprecision::cpp_bin_float_50;

struct EnumerationOptions {
  bool symmetry_reduction = true;
  unsigned threads = 1;
  /// Wall-clock budget over all lengths; enumeration stops before a length
  /// whose predicted cost would overrun it.
  double time_budget_seconds = std::numeric_limits<double>::infinity();
};

struct EnumerationResult {
  int d = 0;
  int n_max = 0;      ///< requested
  int high_water = 0; ///< largest n actually counted
  /// counts[n] = c_n for 0 <= n <= high_water (c_0 = 1).
  std::vector<BigInt> counts;
  std::vector<double> seconds;
  bool complete() const { return high_water == n_max; }
};

namespace detail {

class SawCounter {
 public:
  SawCounter(int d, int n) : d_(d), n_(n), side_(2 * n + 1) {
    std::int64_t stride = 1;
    for (int i = 0; i < d; ++i) {
      offsets_.push_back(stride);
      offsets_.push_back(-stride);
      stride *= side_;
    }
    box_size_ = static_cast<std::size_t>(stride);
    origin_ = 0;
    for (int i = 0; i < d; ++i) origin_ += static_cast<std::int64_t>(n) * offsets_[2 * static_cast<std::size_t>(i)];
  }

  std::size_t directions() const { return offsets_.size(); }
  std::int64_t origin() const { return origin_; }
  std::int64_t offset(std::size_t dir) const { return offsets_[dir]; }

  /// Number of SAW continuations of length `remaining` from `path`, a
  /// self-avoiding prefix (list of box indices) that starts at the origin.
  std::uint64_t count_from(const std::vector<std::int64_t>& path, int remaining) const {
    std::vector<std::uint8_t> occ(box_size_, 0);
    for (auto p : path) occ[static_cast<std::size_t>(p)] = 1;
    if (remaining == 0) return 1;
    return dfs(occ, path.back(), remaining);
  }

 private:
  std::uint64_t dfs(std::vector<std::uint8_t>& occ, std::int64_t pos, int remaining) const {
    if (remaining == 1) {
      std::uint64_t free = 0;
      for (auto off : offsets_) free += occ[static_cast<std::size_t>(pos + off)] == 0;
      return free;
    }
    std::uint64_t total = 0;
    for (auto off : offsets_) {
      const std::int64_t next = pos + off;
      auto& cell = occ[static_cast<std::size_t>(next)];
      if (cell) continue;
      cell = 1;
      total += dfs(occ, next, remaining - 1);
      cell = 0;
    }
    return total;
  }

  int d_;
  int n_;
  std::int64_t side_;
  std::vector<std::int64_t> offsets_;
  std::size_t box_size_ = 0;
  std::int64_t origin_ = 0;
};

}  // namespace detail

/// c_n for a single n. With symmetry reduction only walks whose first step
/// is +e_0 are enumerated and the count is multiplied by 2d; the tree below
/// is split over second-step branches, one task per branch.
inline BigInt count_saw_length(int d, int n, const EnumerationOptions& opt = {}) {
  if (d < 1) throw ConfigurationError("saw-enum", "dimension must be >= 1");
  if (n < 0) throw ConfigurationError("saw-enum", "length must be >= 0");
  if (n == 0) return 1;
  detail::SawCounter counter(d, n);

  // Prefixes of length min(n, 2) to distribute.
  std::vector<std::vector<std::int64_t>> prefixes;
  const std::int64_t o = counter.origin();
  const std::size_t first_dirs = opt.symmetry_reduction ? 1 : counter.directions();
  for (std::size_t a = 0; a < first_dirs; ++a) {
    const std::int64_t p1 = o + counter.offset(a);
    if (n == 1) {
      prefixes.push_back({o, p1});
      continue;
    }
    for (std::size_t b = 0; b < counter.directions(); ++b) {
      const std::int64_t p2 = p1 + counter.offset(b);
      if (p2 == o) continue;
      prefixes.push_back({o, p1, p2});
    }
  }

  std::vector<std::uint64_t> partial(prefixes.size(), 0);
  const int remaining = n - static_cast<int>(prefixes.front().size() - 1);
  const unsigned workers = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(prefixes.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < prefixes.size(); ++i) partial[i] = counter.count_from(prefixes[i], remaining);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < prefixes.size(); i += workers) partial[i] = counter.count_from(prefixes[i], remaining);
      });
  }
  BigInt total = 0;
  for (auto p : partial) total += p;
  if (opt.symmetry_reduction) total *= static_cast<unsigned>(2 * d);
  return total;
}

/// Counts c_1..c_{n_max}, one length at a time so wall-clock per n is known.
inline EnumerationResult count_saw(int d, int n_max, const EnumerationOptions& opt = {}) {
  if (n_max < 1) throw ConfigurationError("saw-enum", "n_max must be >= 1");
  if (d < 1) throw ConfigurationError("saw-enum", "dimension must be >= 1");
  EnumerationResult r;
  r.d = d;
  r.n_max = n_max;
  r.counts.push_back(1);
  r.seconds.push_back(0.0);
  double spent = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    if (n >= 3) {
      const double last = r.seconds[static_cast<std::size_t>(n - 1)];
      const double prev = std::max(r.seconds[static_cast<std::size_t>(n - 2)], 1e-6);
      const double predicted = last * std::max(1.0, last / prev);
      if (spent + predicted > opt.time_budget_seconds) break;
    }
    const auto t0 = std::chrono::steady_clock::now();
    BigInt c = count_saw_length(d, n, opt);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    spent += dt;
    r.counts.push_back(std::move(c));
    r.seconds.push_back(dt);
    r.high_water = n;
    if (spent > opt.time_budget_seconds) break;
  }
  return r;
}

struct ConnectiveEstimates {
  /// nth_root[n] = c_n^{1/n}, ratio[n] = c_n / c_{n-1}; index 0 unused
  /// (ratio[1] = c_1).
  std::vector<double> nth_root;
  std::vector<double> ratio;
};

inline ConnectiveEstimates connective_estimates(const std::vector<BigInt>& counts) {
  if (counts.size() < 3) throw ConfigurationError("saw-enum", "need counts up to n >= 2");
  ConnectiveEstimates e;
  e.nth_root.assign(counts.size(), 0.0);
  e.ratio.assign(counts.size(), 0.0);
  for (std::size_t n = 1; n < counts.size(); ++n) {
    const BigFloat c(counts[n]);
    e.nth_root[n] = static_cast<double>(boost::multiprecision::pow(c, BigFloat(1) / BigFloat(n)));
    e.ratio[n] = static_cast<double>(c / BigFloat(counts[n - 1]));
  }
  return e;
}

inline ConnectiveEstimates connective_estimates(const EnumerationResult& r) { return connective_estimates(r.counts); }

struct BoundCheck {
  int n = 0;
  bool lower_holds = false;  ///< μ^n <= c_n
  bool upper_holds = false;  ///< c_n <= μ^n e^{B√n}
};

/// Hammersley–Welsh-type sandwich evaluated at every computed n. The
/// inequality is asymptotic, so a failure at small n is information, not a
/// bug.
inline std::vector<BoundCheck> check_bounds(const std::vector<BigInt>& counts, double mu, double B) {
  if (!(mu > 0)) throw DomainError("saw-enum", "mu candidate must be positive");
  const double b_min = std::numbers::pi * std::sqrt(2.0 / 3.0);
  if (!(B > b_min)) throw DomainError("saw-enum", "B must exceed pi*sqrt(2/3)");
  std::vector<BoundCheck> out;
  const BigFloat m(mu);
  for (std::size_t n = 1; n < counts.size(); ++n) {
    const BigFloat c(counts[n]);
    const BigFloat lower = boost::multiprecision::pow(m, static_cast<int>(n));
    const BigFloat upper = lower * boost::multiprecision::exp(BigFloat(B) * boost::multiprecision::sqrt(BigFloat(n)));
    out.push_back({static_cast<int>(n), lower <= c, c <= upper});
  }
  return out;
}

inline std::vector<BoundCheck> check_bounds(const EnumerationResult& r, double mu, double B) {
  return check_bounds(r.counts, mu, B);
}

/// Submultiplicativity c_{n+m} <= c_n c_m over all computed pairs; returns
/// the violating (n, m) pairs (empty when the property holds).
inline std::vector<std::pair<int, int>> submultiplicativity_violations(const std::vector<BigInt>& counts) {
  std::vector<std::pair<int, int>> bad;
  const int top = static_cast<int>(counts.size()) - 1;
  for (int n = 1; n <= top; ++n)
    for (int m = n; n + m <= top; ++m)
      if (counts[static_cast<std::size_t>(n + m)] > counts[static_cast<std::size_t>(n)] * counts[static_cast<std::size_t>(m)])
        bad.emplace_back(n, m);
  return bad;
}

// --- golden-file serialization (columns n,c_n) -----------------------------

inline void write_counts_csv(std::ostream& os, const std::vector<BigInt>& counts) {
  os << "n,c_n\n";
  for (std::size_t n = 1; n < counts.size(); ++n) os << n << ',' << counts[n].str() << '\n';
}

/// Reads n,c_n rows (header required, n contiguous from 1).
inline std::vector<BigInt> read_counts_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("n,c_n", 0) != 0)
    throw ConfigurationError("saw-enum", "counts file must start with header n,c_n");
  std::vector<BigInt> counts{1};
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigurationError("saw-enum", "malformed counts row: " + line);
    const int n = std::stoi(line.substr(0, comma));
    if (n != static_cast<int>(counts.size())) throw ConfigurationError("saw-enum", "counts rows must be contiguous from n=1");
    auto end = line.find(',', comma + 1);
    counts.emplace_back(line.substr(comma + 1, end == std::string::npos ? std::string::npos : end - comma - 1));
  }
  return counts;
}

}  // namespace walkrg
