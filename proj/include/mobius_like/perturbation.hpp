#pragma once

// Functions that agree with chi except on a chosen set of primes, where the
// sign is flipped. The size of the flip set controls the deviation sum
// sum_{p<=x} |1 - f(p) chi(p)|.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mobius_like/core_arith.hpp"
#include "mobius_like/errors.hpp"
#include "mobius_like/mult_functions.hpp"

namespace mobius_like {

enum class FlipRule { none, doubly_exponential, positive_density };

inline FlipRule parse_flip_rule(const std::string& name) {
  if (name == "none") return FlipRule::none;
  if (name == "doubly-exponential") return FlipRule::doubly_exponential;
  if (name == "positive-density") return FlipRule::positive_density;
  throw InvalidArgument("unknown flip rule '" + name + "'");
}

inline std::string to_string(FlipRule r) {
  switch (r) {
    case FlipRule::none: return "none";
    case FlipRule::doubly_exponential: return "doubly-exponential";
    case FlipRule::positive_density: return "positive-density";
  }
  return "none";
}

struct PerturbOptions {
  double delta = 0.5;           // positive-density rule flips every ceil(1/delta)-th prime
  bool squarefree_support = true;
  std::uint64_t memory_cap = kDefaultMemoryCap;
};

class PerturbedFunction {
 public:
  const ExtendedMultiplicative& base() const noexcept { return base_; }
  FlipRule rule() const noexcept { return rule_; }
  std::uint64_t x_max() const noexcept { return x_max_; }
  const std::vector<std::uint64_t>& flip_primes() const noexcept { return flips_; }

  bool is_flipped(std::uint64_t p) const noexcept {
    if (!bits_.empty()) {
      return p <= x_max_ && ((bits_[p >> 6] >> (p & 63)) & 1u);
    }
    return std::binary_search(flips_.begin(), flips_.end(), p);
  }

  int prime_value(std::uint64_t p) const noexcept {
    const int v = base_.prime_value(p);
    return is_flipped(p) ? -v : v;
  }
  bool squarefree_support() const noexcept { return squarefree_; }
  std::string id() const {
    return std::string(squarefree_ ? "perturbed-f[" : "perturbed-g[") + base_.tag() +
           ";rule=" + to_string(rule_) + "]";
  }
  int log_exponent() const noexcept { return base_.log_exponent(); }

  /// D(x) = sum over flipped p <= x of |1 - f(p) chi(p)| = 2 #{flips <= x}.
  std::uint64_t condition_sum(std::uint64_t x) const {
    const auto n = std::upper_bound(flips_.begin(), flips_.end(), x) - flips_.begin();
    return 2 * static_cast<std::uint64_t>(n);
  }

  friend PerturbedFunction perturb(const ExtendedMultiplicative&, FlipRule, std::uint64_t,
                                   const PerturbOptions&);

 private:
  explicit PerturbedFunction(ExtendedMultiplicative base) : base_(std::move(base)) {}

  ExtendedMultiplicative base_;
  bool squarefree_ = true;
  FlipRule rule_ = FlipRule::none;
  std::uint64_t x_max_ = 0;
  std::vector<std::uint64_t> flips_;
  std::vector<std::uint64_t> bits_;
};

/// Flip primes are never divisors of the modulus: at those chi vanishes and
/// the deviation |1 - f(p) chi(p)| does not depend on f(p).
inline PerturbedFunction perturb(const ExtendedMultiplicative& base, FlipRule rule,
                                 std::uint64_t x_max, const PerturbOptions& opts = {}) {
  if (x_max < 1) throw InvalidArgument("x_max must be >= 1");
  PerturbedFunction out(base);
  out.rule_ = rule;
  out.x_max_ = x_max;
  out.squarefree_ = opts.squarefree_support;
  const std::uint64_t k = base.chi().modulus();

  switch (rule) {
    case FlipRule::none:
      break;
    case FlipRule::doubly_exponential:
      for (int j = 1;; ++j) {
        const double t = std::floor(std::exp(static_cast<double>(j) * j));
        if (!(t <= static_cast<double>(x_max))) break;
        auto p = static_cast<std::uint64_t>(t);
        while (!is_prime(p) || k % p == 0) ++p;
        if (p <= x_max) out.flips_.push_back(p);
      }
      break;
    case FlipRule::positive_density: {
      if (!(opts.delta > 0.0 && opts.delta <= 1.0)) {
        throw InvalidArgument("positive-density rule needs 0 < delta <= 1");
      }
      const auto step = static_cast<std::uint64_t>(std::ceil(1.0 / opts.delta));
      const std::uint64_t words = x_max / 64 + 1;
      if (words * 8 + x_max / 8 > opts.memory_cap) {
        throw ResourceLimit("positive-density flip set to " + std::to_string(x_max) +
                            " exceeds memory cap");
      }
      std::uint64_t index = 0;
      for_each_prime(2, x_max + 1, [&](std::uint64_t p) {
        if (k % p == 0) return;
        if (++index % step == 0) out.flips_.push_back(p);
      });
      if (out.flips_.size() > 256) {
        out.bits_.assign(words, 0);
        for (const auto p : out.flips_) out.bits_[p >> 6] |= std::uint64_t{1} << (p & 63);
      }
      break;
    }
  }
  return out;
}

/// Perturbation of f = mu^2 g for the default (+1) extension of chi.
inline PerturbedFunction perturb(const Character& chi, FlipRule rule, std::uint64_t x_max,
                                 const PerturbOptions& opts = {}) {
  return perturb(default_extension(chi), rule, x_max, opts);
}

}  // namespace mobius_like
