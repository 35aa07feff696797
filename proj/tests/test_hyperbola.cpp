#include <gtest/gtest.h>

#include "mobius_like/dirichlet_series.hpp"
#include "mobius_like/hyperbola.hpp"
#include "oracles.hpp"

using namespace mobius_like;

namespace {

ResemblingFunction f4() { return ResemblingFunction(default_extension(character_from_discriminant(-4))); }

// Brute-force prefix sums of f, g and h = f * g^{-1} (h from the divisor-sum oracle).
struct Brute {
  std::vector<std::int64_t> g, h, Mf, Mg, Mh;

  Brute(const ResemblingFunction& fr, std::uint64_t n_max) {
    auto pv = [&](std::uint64_t p) { return fr.g().prime_value(p); };
    std::vector<std::int64_t> f(n_max + 1, 0), ginv(n_max + 1, 0);
    g.assign(n_max + 1, 0);
    for (std::uint64_t n = 1; n <= n_max; ++n) {
      g[n] = oracle::multiplicative(n, pv, false);
      f[n] = oracle::multiplicative(n, pv, true);
      ginv[n] = oracle::mobius(n) * g[n];
    }
    h = oracle::convolve(f, ginv);
    Mf = prefix(f);
    Mg = prefix(g);
    Mh = prefix(h);
  }

  static std::vector<std::int64_t> prefix(const std::vector<std::int64_t>& v) {
    std::vector<std::int64_t> s(v.size(), 0);
    for (std::size_t n = 1; n < v.size(); ++n) s[n] = s[n - 1] + v[n];
    return s;
  }

  // A + B - C straight from the definition, A summed over every n <= U.
  std::int64_t formula(std::uint64_t x, std::uint64_t U, std::uint64_t V) const {
    std::int64_t a = 0, b = 0;
    for (std::uint64_t n = 1; n <= U; ++n) a += h[n] * Mg[x / n];
    for (std::uint64_t n = 1; n <= V; ++n) b += g[n] * Mh[x / n];
    return a + b - Mg[V] * Mh[U];
  }
};

}  // namespace

TEST(Hyperbola, Examples) {
  const HyperbolaContext ctx(f4(), 10'000);
  const auto d = ctx.decompose(4, 2, 2);
  EXPECT_EQ(d.A, 2);
  EXPECT_EQ(d.B, 1);
  EXPECT_EQ(d.C, 2);
  EXPECT_EQ(d.total(), 1);
  EXPECT_EQ(d.Mf_direct, 1);

  const auto one = ctx.decompose(1, 1, 1);
  EXPECT_EQ(one.A, 1);
  EXPECT_EQ(one.B, 1);
  EXPECT_EQ(one.C, 1);
  EXPECT_EQ(one.total(), 1);

  const auto big = ctx.decompose(10'000, 1'000, 10);
  EXPECT_EQ(big.total(), partial_sums(f4(), 10'000, CheckpointGrid::explicit_points({10'000})).sums[0]);
  EXPECT_EQ(big.total(), -13);
}

TEST(Hyperbola, SplitValidation) {
  EXPECT_TRUE(valid_split(10, 3, 3));
  EXPECT_FALSE(valid_split(10, 3, 4));  // 12 > 10
  EXPECT_FALSE(valid_split(10, 2, 2));  // 9 <= 10
  EXPECT_FALSE(valid_split(10, 0, 10));
  const HyperbolaContext ctx(f4(), 100);
  EXPECT_THROW(ctx.decompose(10, 3, 4), InvalidArgument);
  EXPECT_THROW(ctx.decompose(1'000, 100, 10), InvalidArgument);
  EXPECT_THROW(decompose(f4(), 10, 2, 2), InvalidArgument);
}

TEST(Hyperbola, ExactnessSweepToTenThousand) {
  for (std::int64_t d : {-4LL, -3LL}) {
    const ResemblingFunction fr(extend_character(character_from_discriminant(d),
                                                 {{static_cast<std::uint64_t>(d == -4 ? 2 : 3), -1}}));
    const HyperbolaContext ctx(fr, 10'000);
    for (std::uint64_t x = 1; x <= 10'000; ++x) {
      const auto [u, v] = sqrt_split(x);
      for (const auto& [U, V] : {std::pair{u, v}, std::pair{x, std::uint64_t{1}},
                                 std::pair{std::uint64_t{1}, x}}) {
        const auto dec = ctx.decompose(x, U, V);  // throws on A+B-C != M_f
        ASSERT_EQ(dec.total(), ctx.Mf(x));
      }
    }
  }
}

TEST(Hyperbola, AgreesWithBruteForceDefinition) {
  const auto fr = f4();
  const Brute brute(fr, 3'000);
  const HyperbolaContext ctx(fr, 3'000);
  for (std::uint64_t x = 1; x <= 3'000; ++x) {
    ASSERT_EQ(ctx.Mf(x), brute.Mf[x]);
    ASSERT_EQ(ctx.Mh(x), brute.Mh[x]);
    for (std::uint64_t U = 1; U <= x; U += 1 + U / 3) {
      const std::uint64_t V = x / U;
      const auto dec = ctx.decompose(x, U, V);
      // A over square support with mu equals A over all n <= U with h.
      std::int64_t a_all = 0;
      for (std::uint64_t n = 1; n <= U; ++n) a_all += brute.h[n] * brute.Mg[x / n];
      ASSERT_EQ(dec.A, a_all) << x << " " << U;
      ASSERT_EQ(dec.total(), brute.formula(x, U, V));
    }
  }
}

TEST(Hyperbola, CeilingPartnerBreaksExactness) {
  // With V = ceil(x/U) the ranges n <= U and m <= V overlap on pairs with
  // n m > x; the identity then fails for some x.
  const auto fr = f4();
  const Brute brute(fr, 10'000);
  std::uint64_t failures = 0;
  for (std::uint64_t x = 2; x <= 10'000; ++x) {
    const auto U = theorem1_split_points(x).first;
    const auto Vc = (x + U - 1) / U;
    if (brute.formula(x, U, Vc) != brute.Mf[x]) ++failures;
    ASSERT_EQ(brute.formula(x, U, x / U), brute.Mf[x]) << x;
  }
  EXPECT_GT(failures, 0u);
}

TEST(Hyperbola, StreamingMatchesTables) {
  const auto fr = f4();
  const HyperbolaContext ctx(fr, 200'000);
  SegmentConfig cfg;
  cfg.segment_size = 4'099;
  for (std::uint64_t x : {1ULL, 2ULL, 99ULL, 10'000ULL, 65'537ULL, 199'999ULL, 200'000ULL}) {
    for (const auto& [U, V] : {sqrt_split(x), theorem1_split_points(x)}) {
      const auto s = decompose(fr, x, U, V, cfg);
      const auto t = ctx.decompose(x, U, V);
      EXPECT_EQ(s.A, t.A) << x;
      EXPECT_EQ(s.B, t.B) << x;
      EXPECT_EQ(s.C, t.C) << x;
      EXPECT_EQ(s.Mf_direct, t.Mf_direct) << x;
    }
  }
}

TEST(Theorem1Split, SplitPoints) {
  EXPECT_EQ(theorem1_split_points(100'000), (std::pair<std::uint64_t, std::uint64_t>{10'000, 10}));
  EXPECT_EQ(theorem1_split_points(100'000'000).first, 2'511'886u);
  EXPECT_EQ(theorem1_split_points(1).first, 1u);
  EXPECT_EQ(theorem1_split_points(1ULL << 50).first, 1ULL << 40);
  EXPECT_EQ(theorem1_split_points((1ULL << 50) - 1).first, (1ULL << 40) - 1);
  for (std::uint64_t x = 1; x <= 100'000; x += 7) {
    const auto [U, V] = theorem1_split_points(x);
    // U^5 <= x^4 < (U+1)^5, in long double: exact for these magnitudes
    const long double x4 = std::pow(static_cast<long double>(x), 4);
    ASSERT_LE(std::pow(static_cast<long double>(U), 5), x4);
    ASSERT_GT(std::pow(static_cast<long double>(U + 1), 5), x4);
    ASSERT_TRUE(valid_split(x, U, V));
  }
}

TEST(Theorem1Split, AtHundredThousand) {
  const auto r = theorem1_split(f4(), 100'000);
  EXPECT_EQ(r.d.U, 10'000u);
  EXPECT_EQ(r.d.V, 10u);
  EXPECT_EQ(r.d.total(), partial_sums(f4(), 100'000, CheckpointGrid::explicit_points({100'000})).sums[0]);
  EXPECT_DOUBLE_EQ(r.expA, term_exponent(r.d.A, 100'000));
  EXPECT_EQ(term_exponent(0, 10), -std::numeric_limits<double>::infinity());
  EXPECT_DOUBLE_EQ(term_exponent(-100, 10), 2.0);
}

TEST(Theorem1Split, CsvRow) {
  std::ostringstream os;
  write_hyperbola_csv_header(os);
  const HyperbolaContext ctx(f4(), 10);
  write_hyperbola_csv_row(os, ctx.decompose(4, 2, 2));
  EXPECT_EQ(os.str(),
            "x,U,V,A,B,C,total,Mf_direct,expA,expB,expC\n"
            "4,2,2,2,1,2,1,1,0.5,0,0.5\n");
}
