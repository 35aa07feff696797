#include <gtest/gtest.h>

#include <random>

#include "mobius_like/dirichlet_series.hpp"
#include "oracles.hpp"

using namespace mobius_like;

namespace {

using Vec = std::vector<std::int64_t>;

const Character& chi4() {
  static const Character c = character_from_discriminant(-4);
  return c;
}

Vec oracle_values(std::uint64_t n_max, auto&& fn) {
  Vec v(n_max + 1, 0);
  for (std::uint64_t n = 1; n <= n_max; ++n) v[n] = fn(n);
  return v;
}

}  // namespace

TEST(Convolve, MobiusInversion) {
  const auto r = verify_mobius_inversion(10'000);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.limit, 10'000u);
  EXPECT_FALSE(r.first_counterexample);
}

TEST(Convolve, IdentityElementAndMismatch) {
  std::mt19937_64 rng(3);
  Vec b(201);
  for (auto& x : b) x = static_cast<std::int64_t>(rng() % 21) - 10;
  const auto bs = TruncatedDirichletSeries::from_values(200, b);
  EXPECT_EQ(convolve(TruncatedDirichletSeries::identity(200), bs), bs);
  EXPECT_EQ(convolve(bs, TruncatedDirichletSeries::identity(200)), bs);
  EXPECT_THROW(convolve(bs, TruncatedDirichletSeries::identity(199)), InvalidArgument);
}

TEST(Convolve, KFourHIsSupportedOnSquares) {
  const auto g = default_extension(chi4());
  const ResemblingFunction fr(g);
  const auto sieve = build_factored_sieve(100);
  const auto h = convolve(series_of(fr, sieve), dirichlet_inverse(series_of(g, sieve)));
  for (std::uint64_t n = 1; n <= 100; ++n) {
    const auto r = isqrt(n);
    ASSERT_EQ(h[n], r * r == n ? oracle::mobius(r) : 0) << n;
  }
}

TEST(Convolve, CommutativeAndAssociativeAgainstOracle) {
  const std::uint64_t n_max = 500;
  std::mt19937_64 rng(17);
  auto random_vec = [&] {
    Vec v(n_max + 1, 0);
    for (std::uint64_t n = 1; n <= n_max; ++n) v[n] = static_cast<std::int64_t>(rng() % 7) - 3;
    return v;
  };
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = random_vec(), b = random_vec(), c = random_vec();
    const auto as = TruncatedDirichletSeries::from_values(n_max, a);
    const auto bs = TruncatedDirichletSeries::from_values(n_max, b);
    const auto cs = TruncatedDirichletSeries::from_values(n_max, c);
    const auto ab = convolve(as, bs);
    EXPECT_EQ(ab.coeffs(), oracle::convolve(a, b));
    EXPECT_EQ(ab, convolve(bs, as));
    EXPECT_EQ(convolve(ab, cs), convolve(as, convolve(bs, cs)));
    EXPECT_EQ(convolve(ab, cs).coeffs(), oracle::convolve(oracle::convolve(a, b), c));
  }
}

TEST(Convolve, OverflowIsReported) {
  Vec big(3, 0);
  big[1] = big[2] = std::numeric_limits<std::int64_t>::max() / 2 + 1;
  const auto s = TruncatedDirichletSeries::from_values(2, big);
  EXPECT_THROW(convolve(s, s), ArithmeticOverflow);
}

TEST(DirichletInverse, Examples) {
  const std::uint64_t n_max = 1000;
  const auto mu = dirichlet_inverse(TruncatedDirichletSeries::ones(n_max));
  for (std::uint64_t n = 1; n <= n_max; ++n) ASSERT_EQ(mu[n], oracle::mobius(n)) << n;

  const auto e = TruncatedDirichletSeries::identity(n_max);
  EXPECT_EQ(dirichlet_inverse(e), e);

  const auto sieve = build_factored_sieve(n_max);
  const auto g = extend_character(chi4(), {{2, -1}});
  const auto gi = dirichlet_inverse(series_of(g, sieve));
  const auto gs = series_of(g, sieve);
  for (std::uint64_t n = 1; n <= n_max; ++n) ASSERT_EQ(gi[n], oracle::mobius(n) * gs[n]) << n;
  EXPECT_EQ(gi, series_of(MobiusTwist(g), sieve));
  EXPECT_EQ(convolve(gs, gi), e);

  Vec bad(11, 1);
  bad[1] = 2;
  EXPECT_THROW(dirichlet_inverse(TruncatedDirichletSeries::from_values(10, bad)), InvalidArgument);
  bad[1] = -1;
  const auto neg = TruncatedDirichletSeries::from_values(10, bad);
  EXPECT_EQ(convolve(neg, dirichlet_inverse(neg)), TruncatedDirichletSeries::identity(10));
}

TEST(DirichletInverse, RoundTripOnRandomMultiplicative) {
  const std::uint64_t n_max = 1000;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::map<std::uint64_t, int> signs;
    const bool sqfree = trial % 2;
    const auto v = oracle_values(n_max, [&](std::uint64_t n) {
      return oracle::multiplicative(
          n,
          [&](std::uint64_t p) {
            auto it = signs.find(p);
            if (it == signs.end()) it = signs.emplace(p, (rng() & 1) ? 1 : -1).first;
            return it->second;
          },
          sqfree);
    });
    const auto a = TruncatedDirichletSeries::from_values(n_max, v);
    const auto ai = dirichlet_inverse(a);
    EXPECT_EQ(convolve(a, ai), TruncatedDirichletSeries::identity(n_max));
    EXPECT_EQ(dirichlet_inverse(ai), a);
  }
}

TEST(HAtSquares, Examples) {
  const ResemblingFunction fr(default_extension(chi4()));
  const auto r = verify_h_is_mu_at_squares(fr, 10'000);
  EXPECT_TRUE(r.passed);
  EXPECT_THROW(verify_h_is_mu_at_squares(fr, 3), InvalidArgument);

  const auto sieve = build_factored_sieve(100);
  const auto h = convolve(series_of(fr, sieve), dirichlet_inverse(series_of(fr.g(), sieve)));
  EXPECT_EQ(h[1], 1);
  EXPECT_EQ(h[4], -1);
  EXPECT_EQ(h[36], 1);
  EXPECT_EQ(h[8], 0);
}

TEST(HAtSquares, HoldsForOtherInstancesAndSigns) {
  for (std::int64_t d : {-3LL, 5LL, 8LL, -84LL}) {
    const auto chi = character_from_discriminant(d);
    std::map<std::uint64_t, int> signs;
    for (const auto p : chi.bad_primes()) signs[p] = -1;
    const ResemblingFunction fr(extend_character(chi, signs));
    const auto r = verify_h_is_mu_at_squares(fr, 20'000);
    EXPECT_TRUE(r.passed) << d;
  }
}

TEST(HAtSquares, BrokenFunctionProducesCounterexample) {
  // A function that is not mu^2 g: first failure must be reported, not thrown.
  const auto g = default_extension(chi4());
  const auto sieve = build_factored_sieve(50);
  const auto f = series_of(ResemblingFunction(g), sieve);
  auto wrong = f;
  wrong[9] = 1;
  const auto h = convolve(wrong, dirichlet_inverse(series_of(g, sieve)));
  EXPECT_NE(h[9], -1);
  VerificationReport rep{"x", 1, false, Counterexample{9, -1, 1}};
  nlohmann::json j = rep;
  EXPECT_EQ(j["status"], "fail");
  EXPECT_EQ(j["first_counterexample"]["n"], 9);
  nlohmann::json ok = verify_mobius_inversion(10);
  EXPECT_EQ(ok["status"], "pass");
  EXPECT_FALSE(ok.contains("first_counterexample"));
}

TEST(Lemma2H, KFour) {
  const auto g = default_extension(chi4());
  const auto v = verify_lemma2_h(g, 64);
  EXPECT_TRUE(v.passed());
  EXPECT_EQ(v.partial_sum, 7);
  EXPECT_EQ(lemma2_h_partial_sum(g, 64), 7);
  EXPECT_EQ(lemma2_h_partial_sum(g, 1), 1);
  EXPECT_EQ(lemma2_h_partial_sum(g, 1u << 20), 21);
  EXPECT_NEAR(21.0 / karamata_target(chi4(), std::ldexp(1.0, 20)), 1.05, 1e-12);
  EXPECT_THROW(verify_lemma2_h(extend_character(chi4(), {{2, -1}}), 64), InvalidArgument);
}

TEST(Lemma2H, ClosedFormAgreesWithConvolution) {
  for (std::int64_t d : {-3LL, -4LL, 5LL, 24LL, -84LL}) {
    const auto chi = character_from_discriminant(d);
    const auto g = default_extension(chi);
    const auto v = verify_lemma2_h(g, 20'000);
    EXPECT_TRUE(v.passed()) << d;
    EXPECT_EQ(v.partial_sum, lemma2_h_partial_sum(g, 20'000)) << d;
    // count of n <= x with rad(n) | k, by brute force
    std::int64_t brute = 0;
    for (std::uint64_t n = 1; n <= 20'000; ++n) {
      std::uint64_t m = n;
      for (const auto p : chi.bad_primes()) {
        while (m % p == 0) m /= p;
      }
      brute += m == 1;
    }
    EXPECT_EQ(v.partial_sum, brute) << d;
  }
}

TEST(PrimePowerModulus, HoldsForCompletelyMultiplicative) {
  for (std::int64_t d : {-4LL, -3LL, 5LL}) {
    const auto chi = character_from_discriminant(d);
    const auto g = default_extension(chi);
    EXPECT_TRUE(verify_prime_power_modulus(g, chi, 10'000).passed) << d;
    // against another character, so |1 - f(p)chi(p)| takes both values 0 and 2
    const auto other = character_from_discriminant(d == -4 ? -3 : -4);
    EXPECT_TRUE(verify_prime_power_modulus(g, other, 10'000).passed) << d;
  }
  // chi itself vanishes at 2, outside the +-1 hypothesis: h = e, h(2) = 0 != 1.
  const auto r = verify_prime_power_modulus(CharacterFunction{chi4()}, chi4(), 10'000);
  EXPECT_FALSE(r.passed);
  ASSERT_TRUE(r.first_counterexample);
  EXPECT_EQ(r.first_counterexample->n, 2u);
  EXPECT_THROW(verify_prime_power_modulus(Mobius{}, chi4(), 100), InvalidArgument);
}

TEST(Lemma3Hypotheses, HoldForExtensions) {
  for (std::int64_t d : {-4LL, -3LL, 5LL}) {
    const auto chi = character_from_discriminant(d);
    std::map<std::uint64_t, int> neg;
    for (const auto p : chi.bad_primes()) neg[p] = -1;
    EXPECT_TRUE(verify_lemma3_hypotheses(default_extension(chi), chi, 100'000).passed) << d;
    EXPECT_TRUE(verify_lemma3_hypotheses(extend_character(chi, neg), chi, 100'000).passed) << d;
  }
}

TEST(Lemma3Hypotheses, FailsForResemblingFunctionItself) {
  // For f = mu^2 g and p not dividing k: h(p) = f(p) - chi(p) = 0 but
  // h(p^2) = -f(p) chi(p) = -1. The lemma is applied to g.
  const auto r = verify_lemma3_hypotheses(ResemblingFunction(default_extension(chi4())), chi4(),
                                          1000);
  EXPECT_FALSE(r.passed);
  ASSERT_TRUE(r.first_counterexample);
  EXPECT_GT(r.first_counterexample->actual, r.first_counterexample->expected);
}

TEST(ProductPartialSums, HMatchesMertensAtRootX) {
  const auto mu = mobius_table(build_factored_sieve(10'000));
  const auto mertens = mu.mertens();
  std::vector<std::uint64_t> xs;
  for (std::uint64_t x = 1; x <= 2'000; ++x) xs.push_back(x);
  for (std::uint64_t x : {10'007ULL, 99'999ULL, 1'000'000ULL, 3'000'017ULL, 10'000'000ULL}) xs.push_back(x);
  SegmentConfig cfg;
  cfg.segment_size = 1 << 16;
  for (std::int64_t d : {-4LL, -3LL, 5LL}) {
    const ResemblingFunction fr(default_extension(character_from_discriminant(d)));
    const auto mh = h_partial_sums(fr, xs, cfg);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      ASSERT_EQ(mh[i], mertens[isqrt(xs[i])]) << d << " x=" << xs[i];
    }
  }
}

TEST(ProductPartialSums, MatchesConvolutionPrefix) {
  const std::uint64_t n_max = 5'000;
  const auto sieve = build_factored_sieve(n_max);
  const auto g = default_extension(character_from_discriminant(-3));
  const auto conv = convolve(series_of(g, sieve), series_of(Mobius{}, sieve));
  std::vector<std::uint64_t> xs;
  for (std::uint64_t x = 1; x <= n_max; x += 37) xs.push_back(x);
  const auto got = product_partial_sums(g, Mobius{}, xs);
  std::int64_t run = 0;
  std::size_t i = 0;
  for (std::uint64_t n = 1; n <= n_max && i < xs.size(); ++n) {
    run += conv[n];
    if (n == xs[i]) EXPECT_EQ(got[i++], run) << n;
  }
}
