#pragma once

// Truncated Dirichlet series with exact integer coefficients, and the
// convolution identities relating f = mu^2 g, g, chi and mu.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mobius_like/characters.hpp"
#include "mobius_like/core_arith.hpp"
#include "mobius_like/errors.hpp"
#include "mobius_like/mult_functions.hpp"
#include "mobius_like/partial_sums.hpp"

namespace mobius_like {

/// Coefficients a(1..N); a(0) is stored but always 0.
class TruncatedDirichletSeries {
 public:
  TruncatedDirichletSeries() = default;
  explicit TruncatedDirichletSeries(std::uint64_t limit)
      : coeffs_(check_limit(limit) + 1, 0) {}

  template <class T>
  static TruncatedDirichletSeries from_values(std::uint64_t limit, const std::vector<T>& v) {
    if (v.size() < limit + 1) throw InvalidArgument("value table shorter than limit");
    TruncatedDirichletSeries s(limit);
    for (std::uint64_t n = 1; n <= limit; ++n) s.coeffs_[n] = static_cast<std::int64_t>(v[n]);
    return s;
  }

  static TruncatedDirichletSeries identity(std::uint64_t limit) {
    TruncatedDirichletSeries s(limit);
    s.coeffs_[1] = 1;
    return s;
  }

  static TruncatedDirichletSeries ones(std::uint64_t limit) {
    TruncatedDirichletSeries s(limit);
    std::fill(s.coeffs_.begin() + 1, s.coeffs_.end(), 1);
    return s;
  }

  std::uint64_t limit() const noexcept { return coeffs_.empty() ? 0 : coeffs_.size() - 1; }
  std::int64_t operator[](std::uint64_t n) const { return coeffs_[n]; }
  std::int64_t& operator[](std::uint64_t n) { return coeffs_[n]; }
  const std::vector<std::int64_t>& coeffs() const noexcept { return coeffs_; }

  bool operator==(const TruncatedDirichletSeries&) const = default;

 private:
  static std::uint64_t check_limit(std::uint64_t limit) {
    if (limit < 1) throw InvalidArgument("series limit must be >= 1");
    return limit;
  }

  std::vector<std::int64_t> coeffs_;
};

namespace detail {

inline std::int64_t checked_muladd(std::int64_t acc, std::int64_t a, std::int64_t b) {
  std::int64_t prod;
  if (__builtin_mul_overflow(a, b, &prod) || __builtin_add_overflow(acc, prod, &acc)) {
    throw ArithmeticOverflow("Dirichlet series coefficient overflow");
  }
  return acc;
}

}  // namespace detail

inline TruncatedDirichletSeries convolve(const TruncatedDirichletSeries& a,
                                         const TruncatedDirichletSeries& b) {
  if (a.limit() != b.limit()) {
    throw InvalidArgument("convolve: limits differ (" + std::to_string(a.limit()) + " vs " +
                          std::to_string(b.limit()) + ")");
  }
  const std::uint64_t n_max = a.limit();
  TruncatedDirichletSeries c(n_max);
  for (std::uint64_t d = 1; d <= n_max; ++d) {
    const std::int64_t ad = a[d];
    if (ad == 0) continue;
    for (std::uint64_t m = 1, n = d; n <= n_max; ++m, n += d) {
      if (b[m] != 0) c[n] = detail::checked_muladd(c[n], ad, b[m]);
    }
  }
  return c;
}

/// Convolution inverse over the integers; needs a(1) = +-1.
inline TruncatedDirichletSeries dirichlet_inverse(const TruncatedDirichletSeries& a) {
  const std::uint64_t n_max = a.limit();
  if (n_max < 1) throw InvalidArgument("dirichlet_inverse: empty series");
  const std::int64_t a1 = a[1];
  if (a1 != 1 && a1 != -1) {
    throw InvalidArgument("dirichlet_inverse: a(1) = " + std::to_string(a1) +
                          " is not a unit over the integers");
  }
  // acc[n] collects sum_{d | n, d > 1} a(d) inv(n/d); inv(n) is final once
  // every smaller index has been pushed.
  TruncatedDirichletSeries inv(n_max);
  std::vector<std::int64_t> acc(n_max + 1, 0);
  for (std::uint64_t m = 1; m <= n_max; ++m) {
    std::int64_t v;
    if (m == 1) {
      v = a1;
    } else if (__builtin_mul_overflow(-a1, acc[m], &v)) {
      throw ArithmeticOverflow("Dirichlet inverse coefficient overflow");
    }
    inv[m] = v;
    if (v == 0) continue;
    for (std::uint64_t d = 2, n = 2 * m; n <= n_max; ++d, n += m) {
      if (a[d] != 0) acc[n] = detail::checked_muladd(acc[n], a[d], v);
    }
  }
  return inv;
}

/// Coefficient series of any prime-determined function, via the linear sieve.
template <PrimeDetermined F>
TruncatedDirichletSeries series_of(const F& fn, const FactoredSieve& sieve) {
  return TruncatedDirichletSeries::from_values(sieve.limit(), sieve_table(fn, sieve));
}

struct Counterexample {
  std::uint64_t n = 0;
  std::int64_t expected = 0;
  std::int64_t actual = 0;
};

struct VerificationReport {
  std::string identity;
  std::uint64_t limit = 0;
  bool passed = true;
  std::optional<Counterexample> first_counterexample;
};

inline void to_json(nlohmann::json& j, const VerificationReport& r) {
  j = nlohmann::json{{"identity", r.identity},
                     {"limit", r.limit},
                     {"status", r.passed ? "pass" : "fail"}};
  if (r.first_counterexample) {
    j["first_counterexample"] = {{"n", r.first_counterexample->n},
                                 {"expected", r.first_counterexample->expected},
                                 {"actual", r.first_counterexample->actual}};
  }
}

namespace detail {

// Report for "actual(n) == expected(n) for all 1 <= n <= limit".
template <class Actual, class Expected>
VerificationReport compare_all(std::string identity, std::uint64_t limit, Actual&& actual,
                               Expected&& expected) {
  VerificationReport r{std::move(identity), limit, true, std::nullopt};
  for (std::uint64_t n = 1; n <= limit; ++n) {
    const std::int64_t want = expected(n);
    const std::int64_t got = actual(n);
    if (want != got) {
      r.passed = false;
      r.first_counterexample = Counterexample{n, want, got};
      break;
    }
  }
  return r;
}

}  // namespace detail

/// mu * 1 = e up to N.
inline VerificationReport verify_mobius_inversion(std::uint64_t n_max) {
  const auto sieve = build_factored_sieve(std::max<std::uint64_t>(n_max, 2));
  const auto mu = series_of(Mobius{}, sieve);
  TruncatedDirichletSeries mu_n = TruncatedDirichletSeries::from_values(n_max, mu.coeffs());
  const auto e = convolve(mu_n, TruncatedDirichletSeries::ones(n_max));
  return detail::compare_all(
      "mu*1=e", n_max, [&](std::uint64_t n) { return e[n]; },
      [](std::uint64_t n) -> std::int64_t { return n == 1 ? 1 : 0; });
}

/// h = f * g^{-1} equals mu(sqrt n) on perfect squares and 0 elsewhere.
inline VerificationReport verify_h_is_mu_at_squares(const ResemblingFunction& fr,
                                                    std::uint64_t n_max) {
  if (n_max < 4) throw InvalidArgument("verify_h_is_mu_at_squares needs N >= 4");
  const auto sieve = build_factored_sieve(n_max);
  const auto f = series_of(fr, sieve);
  const auto g_inv = dirichlet_inverse(series_of(fr.g(), sieve));
  const auto h = convolve(f, g_inv);
  const auto root = isqrt(n_max);
  const MobiusTable mu(build_factored_sieve(std::max<std::uint64_t>(root, 2)));
  return detail::compare_all(
      "f*g^-1=mu(sqrt n) on squares [" + fr.g().tag() + "]", n_max,
      [&](std::uint64_t n) { return h[n]; },
      [&](std::uint64_t n) -> std::int64_t {
        const auto r = isqrt(n);
        return r * r == n ? mu[r] : 0;
      });
}

/// (1/omega(k)!) prod_{p|k} log x / log p.
inline double karamata_target(const Character& chi, double x) {
  double t = 1.0;
  int w = 0;
  for (const auto p : chi.bad_primes()) {
    t *= std::log(x) / std::log(static_cast<double>(p));
    ++w;
    t /= w;
  }
  return t;
}

/// sum_{n<=x} h(n) for h = g * chi^{-1}, summed over the only integers where
/// h can be nonzero: those built from primes dividing k. At those h is
/// g itself (chi^{-1} vanishes at every p^i, i >= 1, with p | k); at every
/// prime p not dividing k, h(p^a) = chi(p)^a - chi(p)^{a-1} chi(p) = 0.
inline std::int64_t lemma2_h_partial_sum(const ExtendedMultiplicative& g, std::uint64_t x) {
  const auto& signs = g.bad_prime_signs();
  std::int64_t total = 0;
  auto walk = [&](auto&& self, std::size_t i, std::uint64_t n, int sign) -> void {
    if (i == signs.size()) {
      total += sign;
      return;
    }
    const std::uint64_t p = signs[i].first;
    for (;;) {
      self(self, i + 1, n, sign);
      if (n > x / p) break;
      n *= p;
      sign *= signs[i].second;
    }
  };
  if (x >= 1) walk(walk, 0, 1, 1);
  return total;
}

struct Lemma2Verification {
  std::vector<VerificationReport> reports;
  std::int64_t partial_sum = 0;  // M_h(N)
  double karamata_target = 0.0;
  double karamata_ratio = 0.0;

  bool passed() const {
    return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed; });
  }
};

/// h = g * chi^{-1} for the all-(+1) extension: nonnegative, supported on
/// integers whose primes all divide k, and equal to 1 there.
inline Lemma2Verification verify_lemma2_h(const ExtendedMultiplicative& g,
                                          std::uint64_t n_max) {
  if (!g.all_signs_positive()) {
    throw InvalidArgument("lemma-2 check requires g(p) = +1 at every p | k");
  }
  if (n_max < 1) throw InvalidArgument("N must be >= 1");
  const auto sieve = build_factored_sieve(std::max<std::uint64_t>(n_max, 2));
  const auto chi_inv = dirichlet_inverse(
      TruncatedDirichletSeries::from_values(n_max, series_of(CharacterFunction{g.chi()}, sieve).coeffs()));
  const auto gs = TruncatedDirichletSeries::from_values(n_max, series_of(g, sieve).coeffs());
  const auto h = convolve(gs, chi_inv);

  const std::uint64_t k = g.chi().modulus();
  auto k_smooth = [&](std::uint64_t n) {
    for (const auto p : g.chi().bad_primes()) {
      while (n % p == 0) n /= p;
    }
    return n == 1;
  };
  const std::string tag = "[" + g.tag() + "]";

  Lemma2Verification out;
  out.reports.push_back(detail::compare_all(
      "g*chi^-1>=0 " + tag, n_max, [&](std::uint64_t n) { return h[n] < 0 ? h[n] : 0; },
      [](std::uint64_t) -> std::int64_t { return 0; }));
  out.reports.push_back(detail::compare_all(
      "g*chi^-1 supported on primes dividing " + std::to_string(k) + " " + tag, n_max,
      [&](std::uint64_t n) -> std::int64_t { return (!k_smooth(n) && h[n] != 0) ? 1 : 0; },
      [](std::uint64_t) -> std::int64_t { return 0; }));
  out.reports.push_back(detail::compare_all(
      "g*chi^-1 = indicator of {n : rad(n) | " + std::to_string(k) + "} " + tag, n_max,
      [&](std::uint64_t n) { return h[n]; },
      [&](std::uint64_t n) -> std::int64_t { return k_smooth(n) ? 1 : 0; }));

  for (std::uint64_t n = 1; n <= n_max; ++n) out.partial_sum += h[n];
  out.karamata_target = karamata_target(g.chi(), static_cast<double>(n_max));
  out.karamata_ratio = out.karamata_target > 0
                           ? static_cast<double>(out.partial_sum) / out.karamata_target
                           : std::nan("");
  return out;
}

/// For completely multiplicative +-1 valued fn and h = fn * chi^{-1}:
/// |h(p^a)| = |1 - fn(p) chi(p)| at every prime power <= N.
template <PrimeDetermined F>
VerificationReport verify_prime_power_modulus(const F& fn, const Character& chi,
                                              std::uint64_t n_max) {
  if (fn.squarefree_support()) {
    throw InvalidArgument("prime-power identity needs a completely multiplicative function");
  }
  const auto sieve = build_factored_sieve(std::max<std::uint64_t>(n_max, 2));
  const auto h = convolve(series_of(fn, sieve),
                          dirichlet_inverse(series_of(CharacterFunction{chi}, sieve)));
  VerificationReport r{"|(" + fn.id() + ")*chi^-1 (p^a)| = |1 - f(p)chi(p)|", n_max, true,
                       std::nullopt};
  for (const auto p : sieve.primes()) {
    const std::int64_t want = std::abs(1 - fn.prime_value(p) * chi(p));
    for (std::uint64_t q = p; q <= n_max; q *= p) {
      const std::int64_t got = std::abs(h[q]);
      if (got != want) {
        r.passed = false;
        r.first_counterexample = Counterexample{q, want, got};
        return r;
      }
      if (q > n_max / p) break;
    }
  }
  return r;
}

/// Hypotheses of the convergence lemma for |h|, h = fn * chi^{-1}:
/// |h(p)| <= 2 and |h(p^a)| <= |h(p)|.
template <PrimeDetermined F>
VerificationReport verify_lemma3_hypotheses(const F& fn, const Character& chi,
                                            std::uint64_t n_max) {
  const auto sieve = build_factored_sieve(std::max<std::uint64_t>(n_max, 2));
  const auto h = convolve(series_of(fn, sieve),
                          dirichlet_inverse(series_of(CharacterFunction{chi}, sieve)));
  VerificationReport r{"|h(p)|<=2, |h(p^a)|<=|h(p)| for h=|(" + fn.id() + ")*chi^-1|",
                       n_max, true, std::nullopt};
  for (const auto p : sieve.primes()) {
    const std::int64_t hp = std::abs(h[p]);
    if (hp > 2) {
      r.passed = false;
      r.first_counterexample = Counterexample{p, 2, hp};
      return r;
    }
    for (std::uint64_t q = p; q <= n_max / p;) {
      q *= p;
      if (std::abs(h[q]) > hp) {
        r.passed = false;
        r.first_counterexample = Counterexample{q, hp, std::abs(h[q])};
        return r;
      }
    }
  }
  return r;
}

/// sum_{n<=x} (a*b)(n) for each x, from streamed partial sums of a and b at
/// the quotient points floor(x/m), m <= sqrt(x), via the symmetric hyperbola
/// split u = floor(sqrt x).
template <PrimeDetermined A, PrimeDetermined B>
std::vector<std::int64_t> product_partial_sums(const A& a, const B& b,
                                               const std::vector<std::uint64_t>& xs,
                                               const SegmentConfig& config = {}) {
  if (xs.empty()) return {};
  const std::uint64_t x_max = *std::max_element(xs.begin(), xs.end());
  std::vector<std::uint64_t> points;
  for (const auto x : xs) {
    if (x < 1) throw InvalidArgument("product_partial_sums: x must be >= 1");
    const auto u = isqrt(x);
    points.push_back(u);
    for (std::uint64_t m = 1; m <= u; ++m) points.push_back(x / m);
  }
  const auto grid = CheckpointGrid::explicit_points(points);
  const auto ma = partial_sums(a, x_max, grid, config);
  const auto mb = partial_sums(b, x_max, grid, config);

  const auto u_max = std::max<std::uint64_t>(isqrt(x_max), 2);
  const auto sieve = build_factored_sieve(u_max);
  const auto va = sieve_table(a, sieve);
  const auto vb = sieve_table(b, sieve);

  std::vector<std::int64_t> out;
  out.reserve(xs.size());
  for (const auto x : xs) {
    const auto u = isqrt(x);
    std::int64_t s = -ma.at(u) * mb.at(u);
    for (std::uint64_t m = 1; m <= u; ++m) {
      s += va[m] * mb.at(x / m) + vb[m] * ma.at(x / m);
    }
    out.push_back(s);
  }
  return out;
}

/// M_h(x) for h = f * g^{-1}, computed from f and g^{-1} = mu g directly.
inline std::vector<std::int64_t> h_partial_sums(const ResemblingFunction& fr,
                                                const std::vector<std::uint64_t>& xs,
                                                const SegmentConfig& config = {}) {
  return product_partial_sums(fr, MobiusTwist(fr.g()), xs, config);
}

}  // namespace mobius_like
