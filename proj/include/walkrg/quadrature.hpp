#pragma once

// Gauss–Legendre rules of arbitrary order (nodes from Boost's Legendre zeros).

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <vector>

#include "walkrg/errors.hpp"

namespace walkrg {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point rule on [-1, 1], nodes ascending.
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw ConfigurationError("quadrature", "rule order must be >= 1");
  const auto zeros = boost::math::legendre_p_zeros<double>(n);  // nonnegative half
  QuadratureRule r;
  auto weight = [n](double x) {
    const double dp = boost::math::legendre_p_prime(n, x);
    return 2.0 / ((1.0 - x * x) * dp * dp);
  };
  for (double z : zeros) {
    r.nodes.push_back(z);
    r.weights.push_back(weight(z));
    if (z != 0.0) {
      r.nodes.push_back(-z);
      r.weights.push_back(weight(z));
    }
  }
  std::vector<std::size_t> idx(r.nodes.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return r.nodes[a] < r.nodes[b]; });
  QuadratureRule s;
  for (auto i : idx) {
    s.nodes.push_back(r.nodes[i]);
    s.weights.push_back(r.weights[i]);
  }
  return s;
}

/// The rule mapped to [a, b].
inline QuadratureRule gauss_legendre(int n, double a, double b) {
  QuadratureRule r = gauss_legendre(n);
  const double h = 0.5 * (b - a), c = 0.5 * (a + b);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    r.nodes[i] = c + h * r.nodes[i];
    r.weights[i] *= h;
  }
  return r;
}

}  // namespace walkrg
