#pragma once

// Differential forms on R^{2M} written in the fermion generators
// ψ_1, ψ̄_1, ..., ψ_M, ψ̄_M: a dense table of 2^{2M} coefficients indexed by
// monomial bitmasks (bit 2z is ψ_z, bit 2z+1 is ψ̄_z, ascending order).

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "walkrg/errors.hpp"
#include "walkrg/polynomial.hpp"

namespace walkrg {

inline constexpr int kMaxFormSites = 3;

template <class T>
struct CoefficientTraits {
  static T zero() { return T(0); }
  static T from_real(double x) { return T(x); }
  static bool is_zero(const T& x) { return x == T(0); }
};

template <class U>
struct CoefficientTraits<Polynomial<U>> {
  static Polynomial<U> zero() { return Polynomial<U>(); }
  static Polynomial<U> from_real(double x) { return Polynomial<U>::constant(U(x)); }
  static bool is_zero(const Polynomial<U>& p) { return p.is_zero(); }
};

using FormMask = std::uint32_t;

/// Sign of a ∧ b relative to the ascending monomial a|b: one factor -1 for
/// every generator of a standing to the right of a generator of b.
inline int reorder_sign(FormMask a, FormMask b) {
  int swaps = 0;
  for (FormMask rest = b; rest; rest &= rest - 1) {
    const FormMask low = rest & (~rest + 1);
    swaps += std::popcount(a & ~(low | (low - 1)));
  }
  return swaps % 2 ? -1 : 1;
}

template <class T>
class GrassmannElement {
  using Tr = CoefficientTraits<T>;

 public:
  explicit GrassmannElement(int sites) : sites_(sites) {
    if (sites < 1 || sites > kMaxFormSites) throw ConfigurationError("susy-saw", "forms support 1..3 sites");
    coeff_.assign(std::size_t{1} << (2 * sites), Tr::zero());
  }

  static GrassmannElement scalar(int sites, T c) {
    GrassmannElement e(sites);
    e.coeff_[0] = std::move(c);
    return e;
  }
  static GrassmannElement generator(int sites, int k, T c) {
    GrassmannElement e(sites);
    if (k < 0 || k >= 2 * sites) throw ConfigurationError("susy-saw", "generator index out of range");
    e.coeff_[FormMask{1} << k] = std::move(c);
    return e;
  }
  static GrassmannElement psi(int sites, int z) { return generator(sites, 2 * z, Tr::from_real(1.0)); }
  static GrassmannElement psibar(int sites, int z) { return generator(sites, 2 * z + 1, Tr::from_real(1.0)); }

  int sites() const { return sites_; }
  FormMask top_mask() const { return static_cast<FormMask>(coeff_.size() - 1); }
  const T& coefficient(FormMask m) const { return coeff_.at(m); }
  T& coefficient(FormMask m) { return coeff_.at(m); }
  const T& body() const { return coeff_[0]; }
  const T& top() const { return coeff_.back(); }

  GrassmannElement nilpotent() const {
    GrassmannElement e = *this;
    e.coeff_[0] = Tr::zero();
    return e;
  }

  bool is_zero() const {
    for (const auto& c : coeff_)
      if (!Tr::is_zero(c)) return false;
    return true;
  }
  /// True when every nonzero coefficient sits on a monomial of even (odd) degree.
  bool has_parity(int p) const {
    for (FormMask m = 0; m < coeff_.size(); ++m)
      if (!Tr::is_zero(coeff_[m]) && std::popcount(m) % 2 != p) return false;
    return true;
  }
  bool is_even() const { return has_parity(0); }
  bool is_odd() const { return has_parity(1); }

  GrassmannElement& operator+=(const GrassmannElement& o) {
    check(o);
    for (std::size_t i = 0; i < coeff_.size(); ++i)
      if (!Tr::is_zero(o.coeff_[i])) coeff_[i] = coeff_[i] + o.coeff_[i];
    return *this;
  }
  GrassmannElement& operator-=(const GrassmannElement& o) {
    check(o);
    for (std::size_t i = 0; i < coeff_.size(); ++i)
      if (!Tr::is_zero(o.coeff_[i])) coeff_[i] = coeff_[i] - o.coeff_[i];
    return *this;
  }
  GrassmannElement operator-() const {
    GrassmannElement e(sites_);
    return e -= *this;
  }
  friend GrassmannElement operator+(GrassmannElement a, const GrassmannElement& b) { return a += b; }
  friend GrassmannElement operator-(GrassmannElement a, const GrassmannElement& b) { return a -= b; }

  /// Multiply every coefficient by the 0-form c.
  friend GrassmannElement operator*(const T& c, GrassmannElement a) {
    for (auto& x : a.coeff_)
      if (!Tr::is_zero(x)) x = c * x;
    return a;
  }

  /// Wedge product.
  friend GrassmannElement operator*(const GrassmannElement& a, const GrassmannElement& b) {
    a.check(b);
    GrassmannElement out(a.sites_);
    const auto n = static_cast<FormMask>(a.coeff_.size());
    for (FormMask i = 0; i < n; ++i) {
      if (Tr::is_zero(a.coeff_[i])) continue;
      for (FormMask j = 0; j < n; ++j) {
        if ((i & j) || Tr::is_zero(b.coeff_[j])) continue;
        const T prod = a.coeff_[i] * b.coeff_[j];
        out.coeff_[i | j] = reorder_sign(i, j) > 0 ? out.coeff_[i | j] + prod : out.coeff_[i | j] - prod;
      }
    }
    return out;
  }

  friend bool operator==(const GrassmannElement& a, const GrassmannElement& b) {
    return a.sites_ == b.sites_ && a.coeff_ == b.coeff_;
  }

 private:
  void check(const GrassmannElement& o) const {
    if (o.sites_ != sites_) throw ConfigurationError("susy-saw", "forms on different numbers of sites");
  }

  int sites_;
  std::vector<T> coeff_;
};

template <class T>
GrassmannElement<T> wedge(const GrassmannElement<T>& a, const GrassmannElement<T>& b) {
  return a * b;
}

/// f(τ) = Σ_k f^{(k)}(body τ) n^k / k!, n the nilpotent part; the sum stops at
/// k = M since n has no degree-0 part. derivs(k, b) returns f^{(k)}(b).
template <class T>
GrassmannElement<T> smooth_function_of_form(const GrassmannElement<T>& tau,
                                            const std::function<T(int, const T&)>& derivs) {
  if (!tau.is_even()) throw DomainError("susy-saw", "smooth functions are defined for even forms only");
  const int M = tau.sites();
  const auto nil = tau.nilpotent();
  auto out = GrassmannElement<T>::scalar(M, derivs(0, tau.body()));
  auto power = GrassmannElement<T>::scalar(M, CoefficientTraits<T>::from_real(1.0));
  double factorial = 1.0;
  for (int k = 1; k <= M; ++k) {
    power = power * nil;
    if (power.is_zero()) break;
    factorial *= k;
    out += (derivs(k, tau.body()) * CoefficientTraits<T>::from_real(1.0 / factorial)) * power;
  }
  return out;
}

/// With ψ = (2πi)^{-1/2} dφ one has ψ_z ∧ ψ̄_z = -(1/π) du_z ∧ dv_z, so the
/// ψ-top coefficient times (-1/π)^M is the du_1 dv_1 ... du_M dv_M density.
inline double berezin_normalization(int sites) { return std::pow(-1.0 / std::numbers::pi, sites); }

}  // namespace walkrg
