#pragma once

// Exact hyperbola decomposition of M_f for f = g * h, h = mu at squares:
//
//   M_f(x) = sum_{n<=U} h(n) M_g(x/n) + sum_{n<=V} g(n) M_h(x/n) - M_g(V) M_h(U)
//          =            A             +            B             -      C
//
// With integer U, V this is exact iff U V <= x < (U+1)(V+1): every pair
// (a, b) with ab <= x has a <= U or b <= V, and the overlap a <= U, b <= V
// lies entirely under the hyperbola.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mobius_like/core_arith.hpp"
#include "mobius_like/errors.hpp"
#include "mobius_like/mult_functions.hpp"
#include "mobius_like/partial_sums.hpp"

namespace mobius_like {

struct HyperbolaDecomposition {
  std::uint64_t x = 0, U = 0, V = 0;
  std::int64_t A = 0, B = 0, C = 0;
  std::int64_t Mf_direct = 0;

  std::int64_t total() const noexcept { return A + B - C; }
};

/// log|t| / log x; -inf for t = 0.
inline double term_exponent(std::int64_t t, std::uint64_t x) {
  if (x < 2) return std::nan("");
  if (t == 0) return -std::numeric_limits<double>::infinity();
  return std::log(std::abs(static_cast<double>(t))) / std::log(static_cast<double>(x));
}

inline bool valid_split(std::uint64_t x, std::uint64_t U, std::uint64_t V) {
  using u128 = unsigned __int128;
  return x >= 1 && U >= 1 && V >= 1 && static_cast<u128>(U) * V <= x &&
         static_cast<u128>(U + 1) * (V + 1) > x;
}

inline void require_split(std::uint64_t x, std::uint64_t U, std::uint64_t V) {
  if (!valid_split(x, U, V)) {
    throw InvalidArgument("split (U,V)=(" + std::to_string(U) + "," + std::to_string(V) +
                          ") for x=" + std::to_string(x) +
                          " must satisfy U*V <= x < (U+1)(V+1)");
  }
}

/// The balanced split U = floor(sqrt x), V = floor(x / U).
inline std::pair<std::uint64_t, std::uint64_t> sqrt_split(std::uint64_t x) {
  const auto u = std::max<std::uint64_t>(isqrt(x), 1);
  return {u, x / u};
}

/// U = floor(x^{4/5}) exactly, V = floor(x / U).
inline std::pair<std::uint64_t, std::uint64_t> theorem1_split_points(std::uint64_t x) {
  using boost::multiprecision::uint256_t;
  if (x < 1) throw InvalidArgument("x must be >= 1");
  const uint256_t x4 = uint256_t(x) * x * x * x;
  auto fifth = [](std::uint64_t u) {
    const uint256_t v(u);
    return v * v * v * v * v;
  };
  auto u = static_cast<std::uint64_t>(std::pow(static_cast<long double>(x), 0.8L));
  while (u > 1 && fifth(u) > x4) --u;
  while (fifth(u + 1) <= x4) ++u;
  u = std::max<std::uint64_t>(u, 1);
  return {u, x / u};
}

namespace detail {

struct HyperbolaSources {
  std::function<std::int64_t(std::uint64_t)> Mg;       // M_g(y)
  std::function<std::int64_t(std::uint64_t)> mertens;  // M_mu(y), y <= sqrt(x)
  std::function<int(std::uint64_t)> mu;                // mu(m), m <= sqrt(U)
  std::function<std::int64_t()> B;                     // sum_{n<=V} g(n) M_h(x/n)
};

inline HyperbolaDecomposition assemble(std::uint64_t x, std::uint64_t U, std::uint64_t V,
                                       std::int64_t mf_direct, const HyperbolaSources& src) {
  HyperbolaDecomposition d{x, U, V, 0, 0, 0, mf_direct};
  // h(n) = mu(m) at n = m^2, zero elsewhere.
  const auto root_u = isqrt(U);
  for (std::uint64_t m = 1; m <= root_u; ++m) {
    const int mu = src.mu(m);
    if (mu != 0) d.A += mu * src.Mg(x / (m * m));
  }
  d.B = src.B();
  d.C = src.Mg(V) * src.mertens(isqrt(U));
  if (d.total() != d.Mf_direct) {
    throw InternalConsistency("hyperbola identity violated at x=" + std::to_string(x) +
                              ": A+B-C=" + std::to_string(d.total()) +
                              ", M_f=" + std::to_string(d.Mf_direct));
  }
  return d;
}

}  // namespace detail

/// Prefix tables of g, f and mu on [1, limit] for many decompositions at
/// x <= limit.
class HyperbolaContext {
 public:
  HyperbolaContext(const ResemblingFunction& fr, std::uint64_t limit)
      : limit_(std::max<std::uint64_t>(limit, 2)) {
    const auto sieve = build_factored_sieve(limit_);
    g_ = sieve_table(fr.g(), sieve);
    const auto f = sieve_table(fr, sieve);
    mu_ = MobiusTable(sieve);
    mertens_ = mu_.mertens();
    Mg_.assign(limit_ + 1, 0);
    Mf_.assign(limit_ + 1, 0);
    for (std::uint64_t n = 1; n <= limit_; ++n) {
      Mg_[n] = Mg_[n - 1] + g_[n];
      Mf_[n] = Mf_[n - 1] + f[n];
    }
  }

  std::uint64_t limit() const noexcept { return limit_; }
  int g(std::uint64_t n) const { return g_[n]; }
  int mu(std::uint64_t n) const { return mu_[n]; }
  std::int64_t Mg(std::uint64_t y) const { return Mg_[y]; }
  std::int64_t Mf(std::uint64_t y) const { return Mf_[y]; }
  /// M_h(y) = M_mu(floor(sqrt y)).
  std::int64_t Mh(std::uint64_t y) const { return mertens_[isqrt(y)]; }

  HyperbolaDecomposition decompose(std::uint64_t x, std::uint64_t U, std::uint64_t V) const {
    require_split(x, U, V);
    if (x > limit_) {
      throw InvalidArgument("x=" + std::to_string(x) + " beyond context limit " +
                            std::to_string(limit_));
    }
    detail::HyperbolaSources src;
    src.Mg = [this](std::uint64_t y) { return Mg_[y]; };
    src.mertens = [this](std::uint64_t y) { return mertens_[y]; };
    src.mu = [this](std::uint64_t m) { return mu_[m]; };
    src.B = [&, this] {
      std::int64_t b = 0;
      for (std::uint64_t n = 1; n <= V; ++n) b += g_[n] * Mh(x / n);
      return b;
    };
    return detail::assemble(x, U, V, Mf_[x], src);
  }

 private:
  std::uint64_t limit_;
  std::vector<std::int8_t> g_;
  MobiusTable mu_;
  std::vector<std::int64_t> mertens_;
  std::vector<std::int64_t> Mg_;
  std::vector<std::int64_t> Mf_;
};

/// Decomposition at a single x by streaming passes: M_g only at the points
/// floor(x/m^2) and V, M_f(x) directly, g(n) for n <= V segment by segment.
inline HyperbolaDecomposition decompose(const ResemblingFunction& fr, std::uint64_t x,
                                        std::uint64_t U, std::uint64_t V,
                                        const SegmentConfig& config = {}) {
  require_split(x, U, V);
  if (x > kMaxArgument) throw InvalidArgument("x beyond 2^50 is not supported");

  const auto root_x = std::max<std::uint64_t>(isqrt(x), 2);
  const auto small = build_factored_sieve(root_x);
  const MobiusTable mu(small);
  const auto mertens = mu.mertens();

  std::vector<std::uint64_t> points{V};
  for (std::uint64_t m = 1; m * m <= U; ++m) points.push_back(x / (m * m));
  const auto grid = CheckpointGrid::explicit_points(points);
  const auto mg = partial_sums(fr.g(), grid.points().back(), grid, config);
  const auto mf = partial_sums(fr, x, CheckpointGrid::explicit_points({x}), config);

  detail::HyperbolaSources src;
  src.Mg = [&](std::uint64_t y) { return mg.at(y); };
  src.mertens = [&](std::uint64_t y) { return mertens[y]; };
  src.mu = [&](std::uint64_t m) { return mu[m]; };
  src.B = [&] {
    std::int64_t b = 0;
    for_each_segment(fr.g(), V, config,
                     [&](std::uint64_t lo, std::span<const std::int8_t> values) {
                       for (std::size_t i = 0; i < values.size(); ++i) {
                         b += values[i] * mertens[isqrt(x / (lo + i))];
                       }
                     });
    return b;
  };
  return detail::assemble(x, U, V, mf.at(x), src);
}

struct Theorem1Report {
  HyperbolaDecomposition d;
  double expA = 0, expB = 0, expC = 0;
};

inline Theorem1Report theorem1_split(const ResemblingFunction& fr, std::uint64_t x,
                                     const SegmentConfig& config = {}) {
  const auto [U, V] = theorem1_split_points(x);
  Theorem1Report r;
  r.d = decompose(fr, x, U, V, config);
  r.expA = term_exponent(r.d.A, x);
  r.expB = term_exponent(r.d.B, x);
  r.expC = term_exponent(r.d.C, x);
  return r;
}

inline void write_hyperbola_csv_header(std::ostream& os) {
  os << "x,U,V,A,B,C,total,Mf_direct,expA,expB,expC\n";
}

inline void write_hyperbola_csv_row(std::ostream& os, const HyperbolaDecomposition& d) {
  os << d.x << ',' << d.U << ',' << d.V << ',' << d.A << ',' << d.B << ',' << d.C << ','
     << d.total() << ',' << d.Mf_direct << ',' << format_double(term_exponent(d.A, d.x))
     << ',' << format_double(term_exponent(d.B, d.x)) << ','
     << format_double(term_exponent(d.C, d.x)) << '\n';
}

}  // namespace mobius_like
