#pragma once

// Exact integer substrate: linear sieve with smallest-prime-factor table,
// Moebius/Mertens tables, Kronecker symbol, and the squarefree group law.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mobius_like/errors.hpp"

namespace mobius_like {

inline constexpr std::uint64_t kDefaultMemoryCap = 2'000'000'000ULL;

/// floor(sqrt(n)), exact for every 64-bit n.
inline std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
  while (r > 0 && r > n / r) --r;
  while ((r + 1) <= n / (r + 1)) ++r;
  return r;
}

/// Smallest-prime-factor table for 2..limit built by a linear sieve.
class FactoredSieve {
 public:
  FactoredSieve() = default;

  std::uint64_t limit() const noexcept { return limit_; }
  std::span<const std::uint32_t> primes() const noexcept { return primes_; }

  std::uint32_t spf(std::uint64_t n) const {
    if (n < 2 || n > limit_) {
      throw InvalidArgument("spf: n=" + std::to_string(n) +
                            " outside [2, " + std::to_string(limit_) + "]");
    }
    return spf_[n];
  }

  bool is_prime(std::uint64_t n) const {
    return n >= 2 && n <= limit_ && spf_[n] == n;
  }

  /// Prime-power factorization p^a || n, ascending in p.
  std::vector<std::pair<std::uint64_t, int>> factorize(std::uint64_t n) const {
    if (n < 1 || n > limit_) {
      throw InvalidArgument("factorize: n=" + std::to_string(n) +
                            " outside [1, " + std::to_string(limit_) + "]");
    }
    std::vector<std::pair<std::uint64_t, int>> out;
    while (n > 1) {
      const std::uint64_t p = spf_[n];
      int a = 0;
      while (n % p == 0) {
        n /= p;
        ++a;
      }
      out.emplace_back(p, a);
    }
    return out;
  }

  friend FactoredSieve build_factored_sieve(std::uint64_t, std::uint64_t);

 private:
  std::uint64_t limit_ = 0;
  std::vector<std::uint32_t> spf_;
  std::vector<std::uint32_t> primes_;
};

inline std::uint64_t factored_sieve_bytes(std::uint64_t limit) {
  const double l = static_cast<double>(limit);
  const double prime_estimate = limit < 17 ? 8.0 : 1.26 * l / std::log(l);
  return 4 * (limit + 1) + static_cast<std::uint64_t>(4.0 * prime_estimate);
}

inline FactoredSieve build_factored_sieve(
    std::uint64_t limit, std::uint64_t memory_cap = kDefaultMemoryCap) {
  if (limit < 2) {
    throw InvalidArgument("sieve limit must be >= 2, got " +
                          std::to_string(limit));
  }
  if (limit > 0xFFFFFFFEULL) {
    throw InvalidArgument("sieve limit " + std::to_string(limit) +
                          " exceeds the 32-bit table width");
  }
  if (factored_sieve_bytes(limit) > memory_cap) {
    throw ResourceLimit("sieve limit " + std::to_string(limit) + " needs ~" +
                        std::to_string(factored_sieve_bytes(limit)) +
                        " bytes, cap is " + std::to_string(memory_cap));
  }
  FactoredSieve s;
  s.limit_ = limit;
  s.spf_.assign(limit + 1, 0);
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (s.spf_[i] == 0) {
      s.spf_[i] = static_cast<std::uint32_t>(i);
      s.primes_.push_back(static_cast<std::uint32_t>(i));
    }
    const std::uint32_t si = s.spf_[i];
    for (const std::uint32_t p : s.primes_) {
      if (p > si || i * p > limit) break;
      s.spf_[i * p] = p;
    }
  }
  return s;
}

/// Moebius function on 1..limit.
class MobiusTable {
 public:
  MobiusTable() = default;
  explicit MobiusTable(const FactoredSieve& sieve) : limit_(sieve.limit()) {
    mu_.assign(limit_ + 1, 0);
    mu_[1] = 1;
    for (std::uint64_t n = 2; n <= limit_; ++n) {
      const std::uint64_t p = sieve.spf(n);
      const std::uint64_t m = n / p;
      mu_[n] = (m > 1 && sieve.spf(m) == p) ? 0 : static_cast<std::int8_t>(-mu_[m]);
    }
  }

  std::uint64_t limit() const noexcept { return limit_; }

  int operator[](std::uint64_t n) const { return mu_[n]; }

  int at(std::uint64_t n) const {
    if (n < 1 || n > limit_) {
      throw InvalidArgument("mu: n=" + std::to_string(n) + " out of range");
    }
    return mu_[n];
  }

  std::span<const std::int8_t> values() const noexcept { return mu_; }

  /// Mertens prefix sums M(0..limit), M(0) = 0.
  std::vector<std::int64_t> mertens() const {
    std::vector<std::int64_t> m(limit_ + 1, 0);
    for (std::uint64_t n = 1; n <= limit_; ++n) m[n] = m[n - 1] + mu_[n];
    return m;
  }

 private:
  std::uint64_t limit_ = 0;
  std::vector<std::int8_t> mu_;
};

inline MobiusTable mobius_table(const FactoredSieve& sieve) {
  return MobiusTable(sieve);
}

/// Kronecker symbol (d / n) for n >= 0, by binary reduction.
inline int kronecker_symbol(std::int64_t d, std::uint64_t n) {
  if (n == 0) return (d == 1 || d == -1) ? 1 : 0;
  if ((d & 1) == 0 && (n & 1) == 0) return 0;

  static constexpr int kTwo[8] = {0, 1, 0, -1, 0, -1, 0, 1};
  int k = 1;
  int v = 0;
  while ((n & 1) == 0) {
    n >>= 1;
    ++v;
  }
  if (v & 1) k = kTwo[static_cast<std::uint64_t>(d) & 7];

  // n odd and positive: the symbol is the Jacobi symbol, periodic mod n in d.
  std::uint64_t a;
  if (d >= 0) {
    a = static_cast<std::uint64_t>(d) % n;
  } else {
    const std::uint64_t r = (0 - static_cast<std::uint64_t>(d)) % n;
    a = r == 0 ? 0 : n - r;
  }
  std::uint64_t b = n;
  while (a != 0) {
    while ((a & 1) == 0) {
      a >>= 1;
      const std::uint64_t r = b & 7;
      if (r == 3 || r == 5) k = -k;
    }
    std::swap(a, b);
    if ((a & 3) == 3 && (b & 3) == 3) k = -k;
    a %= b;
  }
  return b == 1 ? k : 0;
}

/// Trial-division squarefree test.
inline bool is_squarefree(std::uint64_t n) {
  if (n == 0) return false;
  for (std::uint64_t p = 2; p <= n / p; ++p) {
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return false;
    }
  }
  return true;
}

/// Number of distinct prime factors, by trial division.
inline int omega(std::uint64_t n) {
  int w = 0;
  for (std::uint64_t p = 2; p <= n / p; ++p) {
    if (n % p == 0) {
      ++w;
      while (n % p == 0) n /= p;
    }
  }
  return n > 1 ? w + 1 : w;
}

/// Distinct prime divisors of n, ascending, by trial division.
inline std::vector<std::uint64_t> prime_divisors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t p = 2; p <= n / p; ++p) {
    if (n % p == 0) {
      out.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

/// n o m = lcm(n, m) / gcd(n, m) on squarefree integers.
inline std::uint64_t squarefree_group_op(std::uint64_t n, std::uint64_t m) {
  if (!is_squarefree(n) || !is_squarefree(m)) {
    throw InvalidArgument("squarefree_group_op: operands must be squarefree (" +
                          std::to_string(n) + ", " + std::to_string(m) + ")");
  }
  const std::uint64_t g = std::gcd(n, m);
  return (n / g) * (m / g);
}

namespace detail {

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mul_mod(r, a, m);
    a = mul_mod(a, a, m);
    e >>= 1;
  }
  return r;
}

}  // namespace detail

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    std::uint64_t x = detail::pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = detail::mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

/// Calls visit(p) for every prime p in [lo, hi), ascending. Segmented
/// Eratosthenes over base primes <= sqrt(hi).
template <class Visit>
void for_each_prime(std::uint64_t lo, std::uint64_t hi, Visit&& visit,
                    std::uint64_t segment = 1u << 20) {
  if (hi <= 2 || lo >= hi) return;
  lo = std::max<std::uint64_t>(lo, 2);
  const std::uint64_t root = isqrt(hi - 1);
  std::vector<std::uint64_t> base;
  {
    std::vector<char> small(root + 1, 1);
    for (std::uint64_t i = 2; i <= root; ++i) {
      if (!small[i]) continue;
      base.push_back(i);
      for (std::uint64_t j = i * i; j <= root; j += i) small[j] = 0;
    }
  }
  std::vector<char> mark;
  for (std::uint64_t s = lo; s < hi; s += segment) {
    const std::uint64_t e = std::min(hi, s + segment);
    mark.assign(e - s, 1);
    for (const std::uint64_t p : base) {
      if (p * p >= e) break;
      std::uint64_t start = std::max(p * p, (s + p - 1) / p * p);
      for (std::uint64_t j = start; j < e; j += p) mark[j - s] = 0;
    }
    for (std::uint64_t i = 0; i < e - s; ++i) {
      if (mark[i]) visit(s + i);
    }
  }
}

}  // namespace mobius_like
