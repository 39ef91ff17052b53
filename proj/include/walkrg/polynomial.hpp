#pragma once

// Sparse multivariate polynomials in up to 64 real variables, with exact
// Gaussian expectation over a chosen subset of the variables (Wick).

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "walkrg/errors.hpp"

namespace walkrg {

inline constexpr int kMaxVars = 64;

/// Exponent vector; entry v is the power of variable v.
using Monomial = std::array<std::uint8_t, kMaxVars>;

inline int total_degree(const Monomial& m) {
  int s = 0;
  for (auto e : m) s += e;
  return s;
}

template <class T>
class Polynomial {
 public:
  using Terms = std::map<Monomial, T>;

  Polynomial() = default;

  static Polynomial constant(T c) {
    Polynomial p;
    if (c != T(0)) p.terms_[Monomial{}] = c;
    return p;
  }

  static Polynomial variable(int v, T c = T(1)) {
    check_var(v);
    Monomial m{};
    m[static_cast<std::size_t>(v)] = 1;
    Polynomial p;
    if (c != T(0)) p.terms_[m] = c;
    return p;
  }

  static Polynomial monomial(const Monomial& m, T c) {
    Polynomial p;
    if (c != T(0)) p.terms_[m] = c;
    return p;
  }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  T coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? T(0) : it->second;
  }

  int degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, total_degree(m));
    return d;
  }

  /// Highest variable index used, or -1.
  int max_variable() const {
    int v = -1;
    for (const auto& [m, c] : terms_)
      for (int i = kMaxVars - 1; i > v; --i)
        if (m[static_cast<std::size_t>(i)]) {
          v = i;
          break;
        }
    return v;
  }

  void add_term(const Monomial& m, T c) {
    if (c == T(0)) return;
    auto [it, fresh] = terms_.emplace(m, c);
    if (!fresh) {
      it->second += c;
      if (it->second == T(0)) terms_.erase(it);
    }
  }

  Polynomial& operator+=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Polynomial& operator*=(T s) {
    if (s == T(0)) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, T s) { return a *= s; }
  friend Polynomial operator*(T s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial out;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        Monomial m;
        for (std::size_t i = 0; i < m.size(); ++i) {
          const int e = ma[i] + mb[i];
          if (e > 255) throw ComplexityError("polynomial", "exponent overflow");
          m[i] = static_cast<std::uint8_t>(e);
        }
        out.add_term(m, ca * cb);
      }
    return out;
  }

  Polynomial pow(int k) const {
    Polynomial r = constant(T(1));
    for (int i = 0; i < k; ++i) r = r * *this;
    return r;
  }

  /// Value with variable v set to x[v] (missing entries read as 0).
  T evaluate(std::span<const T> x) const {
    T s(0);
    for (const auto& [m, c] : terms_) {
      T t = c;
      for (std::size_t i = 0; i < m.size(); ++i)
        for (int e = 0; e < m[i]; ++e) t *= i < x.size() ? x[i] : T(0);
      s += t;
    }
    return s;
  }

  /// Replaces each variable v by image(v) (a polynomial); variables for which
  /// image returns nullptr are left as they are.
  Polynomial substitute(const std::function<const Polynomial*(int)>& image) const {
    std::map<std::pair<int, int>, Polynomial> powers;
    auto power_of = [&](int v, int e) -> const Polynomial& {
      auto key = std::make_pair(v, e);
      auto it = powers.find(key);
      if (it != powers.end()) return it->second;
      return powers.emplace(key, image(v)->pow(e)).first->second;
    };
    Polynomial out;
    for (const auto& [m, c] : terms_) {
      Monomial kept{};
      Polynomial term = constant(c);
      for (int v = 0; v < kMaxVars; ++v) {
        const int e = m[static_cast<std::size_t>(v)];
        if (!e) continue;
        if (image(v)) {
          term = term * power_of(v, e);
        } else {
          kept[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(e);
        }
      }
      out += term * monomial(kept, T(1));
    }
    return out;
  }

  /// max over monomials of |coefficient difference|.
  friend double max_coefficient_difference(const Polynomial& a, const Polynomial& b) {
    double r = 0;
    for (const auto& [m, c] : (a - b).terms_) r = std::max(r, static_cast<double>(std::abs(c)));
    return r;
  }

 private:
  static void check_var(int v) {
    if (v < 0 || v >= kMaxVars) throw ConfigurationError("polynomial", "variable index out of range 0..63");
  }

  Terms terms_;
};

/// Gaussian expectation over the variables listed in `integrated`, whose
/// joint law is centred normal with covariance cov(a, b) (a, b variable
/// indices). Other variables are treated as constants and stay in the result.
/// Uses E[ζ_i F(ζ)] = Σ_j C_ij E[∂_j F(ζ)], memoized over exponent vectors.
template <class T>
Polynomial<T> gaussian_expectation(const Polynomial<T>& p, const std::vector<int>& integrated,
                                   const std::function<T(int, int)>& cov, int degree_cap = 8) {
  std::array<bool, kMaxVars> in{};
  for (int v : integrated) {
    if (v < 0 || v >= kMaxVars) throw ConfigurationError("polynomial", "variable index out of range 0..63");
    in[static_cast<std::size_t>(v)] = true;
  }
  std::map<Monomial, T> memo;
  std::function<T(const Monomial&)> moment = [&](const Monomial& b) -> T {
    const int deg = total_degree(b);
    if (deg == 0) return T(1);
    if (deg % 2) return T(0);
    if (auto it = memo.find(b); it != memo.end()) return it->second;
    int i = 0;
    while (!b[static_cast<std::size_t>(i)]) ++i;
    Monomial rest = b;
    --rest[static_cast<std::size_t>(i)];
    T s(0);
    for (int j = 0; j < kMaxVars; ++j) {
      const int e = rest[static_cast<std::size_t>(j)];
      if (!e) continue;
      const T c = cov(i, j);
      if (c == T(0)) continue;
      Monomial next = rest;
      --next[static_cast<std::size_t>(j)];
      s += c * T(e) * moment(next);
    }
    memo.emplace(b, s);
    return s;
  };
  Polynomial<T> out;
  for (const auto& [m, c] : p.terms()) {
    Monomial inner{}, outer{};
    for (std::size_t v = 0; v < m.size(); ++v) (in[v] ? inner : outer)[v] = m[v];
    if (total_degree(inner) > degree_cap)
      throw ComplexityError("polynomial", "monomial degree " + std::to_string(total_degree(inner)) +
                                              " in integrated variables exceeds cap " + std::to_string(degree_cap));
    const T e = moment(inner);
    if (e != T(0)) out.add_term(outer, c * e);
  }
  return out;
}

}  // namespace walkrg
