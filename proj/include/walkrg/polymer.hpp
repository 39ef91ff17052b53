#pragma once

// Functionals on polymers: the circle product, block factorization, and the
// reblocking map K -> K̃_+ with an exact harness for E_+θ(I∘K) = I_+∘K̃_+.

#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "walkrg/errors.hpp"
#include "walkrg/gaussian.hpp"
#include "walkrg/lattice.hpp"
#include "walkrg/polynomial.hpp"

namespace walkrg {

/// Additive and multiplicative units for a value algebra.
template <class V>
struct ValueTraits {
  static V zero() { return V(0); }
  static V one() { return V(1); }
};

template <class T>
struct ValueTraits<Polynomial<T>> {
  static Polynomial<T> zero() { return Polynomial<T>(); }
  static Polynomial<T> one() { return Polynomial<T>::constant(T(1)); }
};

/// Map from scale-j polymers to values, evaluated lazily and cached.
template <class V>
class PolymerFunctional {
 public:
  using Fn = std::function<V(const Polymer&)>;

  PolymerFunctional(int scale, Fn fn) : scale_(scale), fn_(std::move(fn)), cache_(std::make_shared<Cache>()) {}

  int scale() const { return scale_; }

  V operator()(const Polymer& X) const {
    if (X.scale() != scale_)
      throw ConfigurationError("polymer-algebra", "polymer at scale " + std::to_string(X.scale()) +
                                                      " passed to functional at scale " + std::to_string(scale_));
    {
      std::lock_guard lock(cache_->mutex);
      if (auto it = cache_->values.find(X); it != cache_->values.end()) return it->second;
    }
    V v = fn_(X);
    std::lock_guard lock(cache_->mutex);
    return cache_->values.emplace(X, std::move(v)).first->second;
  }

 private:
  struct Cache {
    std::mutex mutex;
    std::map<Polymer, V> values;
  };
  int scale_;
  Fn fn_;
  std::shared_ptr<Cache> cache_;
};

/// Unit of the circle product: 1 on the empty polymer, 0 elsewhere.
template <class V>
PolymerFunctional<V> circle_unit(int scale) {
  return PolymerFunctional<V>(scale, [](const Polymer& X) { return X.empty() ? ValueTraits<V>::one() : ValueTraits<V>::zero(); });
}

/// F(X) = Π_{B ∈ B(X)} F(B), given per-block values.
template <class V>
class BlockFactorized {
 public:
  using BlockFn = std::function<V(std::size_t block)>;

  BlockFactorized(int scale, BlockFn per_block) : scale_(scale), per_block_(std::move(per_block)) {}

  int scale() const { return scale_; }
  V block(std::size_t b) const { return per_block_(b); }

  V operator()(const Polymer& X) const {
    if (X.scale() != scale_) throw ConfigurationError("polymer-algebra", "scale mismatch in block-factorized functional");
    V v = ValueTraits<V>::one();
    for (auto b : X.blocks()) v = v * per_block_(b);
    return v;
  }

  PolymerFunctional<V> functional() const {
    return PolymerFunctional<V>(scale_, [self = *this](const Polymer& X) { return self(X); });
  }

 private:
  int scale_;
  BlockFn per_block_;
};

/// (F ∘ G)(X) = Σ_{Y ⊆ X} F(Y) G(X \ Y).
template <class V, class F, class G>
V circle_product(const F& f, const G& g, const Polymer& X) {
  if (f.scale() != X.scale() || g.scale() != X.scale())
    throw ConfigurationError("polymer-algebra", "circle product of functionals at different scales");
  V sum = ValueTraits<V>::zero();
  for_each_subpolymer(X, [&](const Polymer& Y, std::uint64_t) { sum = sum + f(Y) * g(X.minus(Y)); });
  return sum;
}

template <class V, class F, class G>
PolymerFunctional<V> circle(F f, G g) {
  const int s = f.scale();
  return PolymerFunctional<V>(s, [f, g](const Polymer& X) { return circle_product<V>(f, g, X); });
}

/// Gaussian context for one reblocking step on a small torus: θ shifts the
/// field by the fluctuation variables, E_+ integrates them with C_{j+1}.
class GaussianStep {
 public:
  GaussianStep(KernelCovariance cov, int degree_cap = 8) : cov_(std::move(cov)), cap_(degree_cap) {
    check_polynomial_volume(cov_.torus(), 2);
  }

  const TorusLattice& torus() const { return cov_.torus(); }
  const KernelCovariance& covariance() const { return cov_; }

  Polynomial<double> theta(const Polynomial<double>& p) const { return shift_by_fluctuation(torus(), p); }

  Polynomial<double> expect(const Polynomial<double>& p) const {
    const int V = static_cast<int>(torus().volume());
    std::vector<int> vars(static_cast<std::size_t>(V));
    for (int i = 0; i < V; ++i) vars[static_cast<std::size_t>(i)] = V + i;
    return gaussian_expectation<double>(
        p, vars, [&](int a, int b) { return cov_(static_cast<std::size_t>(a - V), static_cast<std::size_t>(b - V)); },
        cap_);
  }

 private:
  KernelCovariance cov_;
  int cap_;
};

using PolyFunctional = PolymerFunctional<Polynomial<double>>;
using PolyBlockFactorized = BlockFactorized<Polynomial<double>>;

/// K̃_+(U) = Σ_{X ⊆ U} I_+(U \ X) E_+[(δI ∘ θK)(X)] 1{closure X = U}, with
/// δI(X) = Π_B (θI(B) - I_+(B)). U is a scale-(j+1) polymer; I, I_+ and K
/// live at scale j, I_+(U \ X) is read through the scale-j blocks of U.
class Reblocker {
 public:
  Reblocker(const TorusLattice& t, PolyBlockFactorized I, PolyBlockFactorized I_plus, PolyFunctional K, GaussianStep step)
      : t_(t),
        j_(K.scale()),
        I_(std::move(I)),
        Ip_(std::move(I_plus)),
        K_(std::move(K)),
        step_(std::move(step)),
        theta_K_(j_, [this](const Polymer& X) { return step_.theta(K_(X)); }),
        delta_I_(j_, [this](std::size_t b) { return step_.theta(I_.block(b)) - Ip_.block(b); }),
        expected_J_(j_, [this](const Polymer& X) {
          return step_.expect(circle_product<Polynomial<double>>(delta_I_, theta_K_, X));
        }) {
    if (I_.scale() != j_ || Ip_.scale() != j_) throw ConfigurationError("polymer-algebra", "I, I_+ and K must share a scale");
    if (j_ >= t_.scales()) throw ScaleOverflowError("polymer-algebra", "cannot reblock the top scale");
    if (!(step_.torus() == t_)) throw ConfigurationError("polymer-algebra", "Gaussian step lives on a different torus");
  }

  // member functionals capture this
  Reblocker(const Reblocker&) = delete;
  Reblocker& operator=(const Reblocker&) = delete;

  int scale() const { return j_; }

  /// Scale-j sub-blocks of a scale-(j+1) polymer.
  Polymer refine(const Polymer& U) const {
    std::vector<std::size_t> b;
    for (std::size_t x = 0; x < t_.block_count(j_); ++x)
      if (U.contains(t_.parent_block(j_, x))) b.push_back(x);
    return Polymer(j_, std::move(b));
  }

  Polynomial<double> K_tilde(const Polymer& U) const {
    if (U.scale() != j_ + 1) throw ConfigurationError("polymer-algebra", "K_tilde takes a scale-(j+1) polymer");
    const Polymer fine = refine(U);
    Polynomial<double> sum;
    for_each_subpolymer(fine, [&](const Polymer& X, std::uint64_t) {
      if (!(closure(t_, X) == U)) return;
      sum += Ip_(fine.minus(X)) * expected_J_(X);
    });
    return sum;
  }

  PolyFunctional K_tilde_functional() const {
    return PolyFunctional(j_ + 1, [this](const Polymer& U) { return K_tilde(U); });
  }

  /// E_+θ(I ∘ K)(Λ), the left side of the identity.
  Polynomial<double> lhs() const {
    const Polymer all = full_polymer(t_, j_);
    return step_.expect(step_.theta(circle_product<Polynomial<double>>(I_, K_, all)));
  }

  /// (I_+ ∘ K̃_+)(Λ) as a scale-(j+1) circle product.
  Polynomial<double> rhs() const {
    const PolyFunctional Ip_plus(j_ + 1, [this](const Polymer& U) { return Ip_(refine(U)); });
    return circle_product<Polynomial<double>>(Ip_plus, K_tilde_functional(), full_polymer(t_, j_ + 1));
  }

 private:
  TorusLattice t_;
  int j_;
  PolyBlockFactorized I_;
  PolyBlockFactorized Ip_;
  PolyFunctional K_;
  GaussianStep step_;
  PolyFunctional theta_K_;
  PolyBlockFactorized delta_I_;
  PolyFunctional expected_J_;
};

/// Largest coefficient deviation of F(X) from Π_{Y ∈ Comp(X)} F(Y) over all
/// polymers of F's scale with at least two components.
inline double component_factorization_defect(const TorusLattice& t, const PolyFunctional& F) {
  double worst = 0;
  for_each_subpolymer(full_polymer(t, F.scale()), [&](const Polymer& X, std::uint64_t) {
    const auto comps = connected_components(t, X);
    if (comps.size() < 2) return;
    Polynomial<double> prod = Polynomial<double>::constant(1.0);
    for (const auto& c : comps) prod = prod * F(c);
    worst = std::max(worst, max_coefficient_difference(prod, F(X)));
  });
  return worst;
}

}  // namespace walkrg
