#pragma once

// The completely multiplicative extension g of a real character, its
// squarefree restriction f = mu^2 g, and the common shape every sieveable
// function shares: a value at each prime plus an optional squarefree support.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mobius_like/characters.hpp"
#include "mobius_like/core_arith.hpp"
#include "mobius_like/errors.hpp"

namespace mobius_like {

/// A multiplicative function determined by its prime values: completely
/// multiplicative when squarefree_support() is false, otherwise the mu^2
/// restriction of that completely multiplicative function.
template <class F>
concept PrimeDetermined = requires(const F& f, std::uint64_t p) {
  { f.prime_value(p) } -> std::convertible_to<int>;
  { f.squarefree_support() } -> std::convertible_to<bool>;
  { f.id() } -> std::convertible_to<std::string>;
  { f.log_exponent() } -> std::convertible_to<int>;
};

struct Mobius {
  int prime_value(std::uint64_t) const noexcept { return -1; }
  bool squarefree_support() const noexcept { return true; }
  std::string id() const { return "mu"; }
  int log_exponent() const noexcept { return 1; }
};

/// chi itself viewed as a completely multiplicative function on all of N.
struct CharacterFunction {
  Character chi;

  int prime_value(std::uint64_t p) const noexcept { return chi(p); }
  bool squarefree_support() const noexcept { return false; }
  std::string id() const { return "chi[k=" + std::to_string(chi.modulus()) + "]"; }
  int log_exponent() const noexcept { return chi.omega_k(); }
};

inline std::string character_tag(const Character& chi) {
  if (chi.discriminant()) return "d=" + std::to_string(*chi.discriminant());
  return "k=" + std::to_string(chi.modulus());
}

class ExtendedMultiplicative {
 public:
  const Character& chi() const noexcept { return chi_; }

  /// Sign chosen at each prime dividing the modulus, ascending by prime.
  const std::vector<std::pair<std::uint64_t, int>>& bad_prime_signs() const noexcept {
    return signs_;
  }

  bool all_signs_positive() const noexcept {
    return std::all_of(signs_.begin(), signs_.end(),
                       [](const auto& s) { return s.second == 1; });
  }

  int prime_value(std::uint64_t p) const noexcept {
    const int v = chi_(p);
    if (v != 0) return v;
    for (const auto& [q, s] : signs_) {
      if (q == p) return s;
    }
    // p shares a factor with k but is not one of its primes: only reachable
    // for composite p, which callers never pass.
    return 0;
  }
  bool squarefree_support() const noexcept { return false; }
  std::string id() const { return "g[" + tag() + "]"; }
  int log_exponent() const noexcept { return chi_.omega_k(); }

  std::string tag() const {
    std::string s = character_tag(chi_);
    for (const auto& [p, v] : signs_) {
      s += ";" + std::to_string(p) + (v > 0 ? ":+1" : ":-1");
    }
    return s;
  }

  friend ExtendedMultiplicative extend_character(const Character&,
                                                 const std::map<std::uint64_t, int>&);

 private:
  Character chi_;
  std::vector<std::pair<std::uint64_t, int>> signs_;
};

inline ExtendedMultiplicative extend_character(const Character& chi,
                                               const std::map<std::uint64_t, int>& signs) {
  const auto bad = chi.bad_primes();
  for (const auto& [p, s] : signs) {
    if (std::find(bad.begin(), bad.end(), p) == bad.end()) {
      throw InvalidArgument("sign given for " + std::to_string(p) +
                            ", which does not divide the modulus " +
                            std::to_string(chi.modulus()));
    }
    if (s != 1 && s != -1) {
      throw InvalidArgument("sign at " + std::to_string(p) + " must be +1 or -1");
    }
  }
  for (const auto p : bad) {
    if (!signs.contains(p)) {
      throw InvalidArgument("missing sign for prime " + std::to_string(p) +
                            " dividing the modulus");
    }
  }
  ExtendedMultiplicative g;
  g.chi_ = chi;
  g.signs_.assign(signs.begin(), signs.end());
  return g;
}

/// The extension with g(p) = +1 at every p | k.
inline ExtendedMultiplicative default_extension(const Character& chi) {
  std::map<std::uint64_t, int> signs;
  for (const auto p : chi.bad_primes()) signs[p] = 1;
  return extend_character(chi, signs);
}

/// f = mu^2 g.
class ResemblingFunction {
 public:
  explicit ResemblingFunction(ExtendedMultiplicative g) : g_(std::move(g)) {}

  const ExtendedMultiplicative& g() const noexcept { return g_; }
  const Character& chi() const noexcept { return g_.chi(); }

  int prime_value(std::uint64_t p) const noexcept { return g_.prime_value(p); }
  bool squarefree_support() const noexcept { return true; }
  std::string id() const { return "f[" + g_.tag() + "]"; }
  int log_exponent() const noexcept { return g_.log_exponent(); }

 private:
  ExtendedMultiplicative g_;
};

/// g^{-1} = mu g: squarefree support, prime values -g(p).
class MobiusTwist {
 public:
  explicit MobiusTwist(ExtendedMultiplicative g) : g_(std::move(g)) {}

  int prime_value(std::uint64_t p) const noexcept { return -g_.prime_value(p); }
  bool squarefree_support() const noexcept { return true; }
  std::string id() const { return "mu*g[" + g_.tag() + "]"; }
  int log_exponent() const noexcept { return g_.log_exponent(); }

 private:
  ExtendedMultiplicative g_;
};

/// Pointwise value via the sieve's factorization.
template <PrimeDetermined F>
int evaluate(const F& fn, std::uint64_t n, const FactoredSieve& sieve) {
  if (n < 1 || n > sieve.limit()) {
    throw InvalidArgument("n=" + std::to_string(n) + " outside sieve range [1, " +
                          std::to_string(sieve.limit()) + "]");
  }
  int v = 1;
  for (const auto& [p, a] : sieve.factorize(n)) {
    if (a >= 2 && fn.squarefree_support()) return 0;
    const int s = fn.prime_value(p);
    for (int i = 0; i < a; ++i) v *= s;
  }
  return v;
}

inline int eval_g(const ExtendedMultiplicative& g, std::uint64_t n,
                  const FactoredSieve& sieve) {
  return evaluate(g, n, sieve);
}

inline int eval_f(const ResemblingFunction& f, std::uint64_t n,
                  const FactoredSieve& sieve) {
  return evaluate(f, n, sieve);
}

/// Values at 0..sieve.limit() (index 0 holds 0) in one linear pass over spf.
template <PrimeDetermined F>
std::vector<std::int8_t> sieve_table(const F& fn, const FactoredSieve& sieve) {
  const std::uint64_t n_max = sieve.limit();
  std::vector<std::int8_t> v(n_max + 1, 0);
  v[1] = 1;
  const bool sqfree = fn.squarefree_support();
  for (std::uint64_t n = 2; n <= n_max; ++n) {
    const std::uint64_t p = sieve.spf(n);
    const std::uint64_t m = n / p;
    if (sqfree && m % p == 0) {
      v[n] = 0;
    } else {
      v[n] = static_cast<std::int8_t>(v[m] * fn.prime_value(p));
    }
  }
  return v;
}

}  // namespace mobius_like
