#include <gtest/gtest.h>

#include <random>

#include "mobius_like/mult_functions.hpp"
#include "mobius_like/partial_sums.hpp"
#include "mobius_like/perturbation.hpp"
#include "mobius_like/segmented_sieve.hpp"
#include "oracles.hpp"

using namespace mobius_like;

namespace {

const Character& chi4() {
  static const Character c = character_from_discriminant(-4);
  return c;
}

ResemblingFunction f4() { return ResemblingFunction(default_extension(chi4())); }

// g from first principles: Kronecker symbol away from k, chosen sign at p | k.
template <class Signs>
int oracle_g(std::int64_t d, std::uint64_t k, const Signs& signs, std::uint64_t n, bool sqfree) {
  return oracle::multiplicative(
      n,
      [&](std::uint64_t p) {
        if (k % p == 0) return signs.at(p);
        return oracle::kronecker(d, p);
      },
      sqfree);
}

}  // namespace

TEST(ExtendCharacter, Examples) {
  const auto sieve = build_factored_sieve(100);
  const auto g = extend_character(chi4(), {{2, +1}});
  EXPECT_EQ(eval_g(g, 2, sieve), 1);
  EXPECT_EQ(eval_g(g, 6, sieve), -1);
  EXPECT_EQ(eval_g(g, 12, sieve), -1);
  EXPECT_EQ(eval_g(g, 1, sieve), 1);
  EXPECT_EQ(eval_g(g, 49, sieve), 1);

  const auto gm = extend_character(chi4(), {{2, -1}});
  EXPECT_EQ(eval_g(gm, 2, sieve), -1);
  EXPECT_EQ(eval_g(gm, 4, sieve), 1);

  EXPECT_THROW(extend_character(chi4(), {{3, +1}}), InvalidArgument);
  EXPECT_THROW(extend_character(chi4(), {}), InvalidArgument);
  EXPECT_THROW(extend_character(chi4(), {{2, +1}, {3, 1}}), InvalidArgument);
  EXPECT_THROW(extend_character(chi4(), {{2, 0}}), InvalidArgument);
  EXPECT_THROW(eval_g(g, 101, sieve), InvalidArgument);
}

TEST(ResemblingFunction, PointwiseExamples) {
  const auto sieve = build_factored_sieve(100);
  const auto f = f4();
  EXPECT_EQ(eval_f(f, 4, sieve), 0);
  EXPECT_EQ(eval_f(f, 6, sieve), -1);
  EXPECT_EQ(eval_f(f, 1, sieve), 1);
}

TEST(ExtendedMultiplicative, MatchesOracleEverywhere) {
  const std::uint64_t n_max = 20'000;
  const auto sieve = build_factored_sieve(n_max);
  for (std::int64_t d : {-4LL, -3LL, 5LL, -84LL}) {
    const auto chi = character_from_discriminant(d);
    std::map<std::uint64_t, int> signs;
    int s = -1;
    for (const auto p : chi.bad_primes()) signs[p] = (s = -s);
    const auto g = extend_character(chi, signs);
    const ResemblingFunction f(g);
    const auto gt = sieve_table(g, sieve);
    const auto ft = sieve_table(f, sieve);
    for (std::uint64_t n = 1; n <= n_max; ++n) {
      const int og = oracle_g(d, chi.modulus(), signs, n, false);
      ASSERT_EQ(gt[n], og) << d << " " << n;
      ASSERT_EQ(ft[n], oracle_g(d, chi.modulus(), signs, n, true)) << d << " " << n;
      ASSERT_NE(og, 0);
      if (std::gcd(n, chi.modulus()) == 1) ASSERT_EQ(og, chi(n));
    }
  }
}

TEST(SieveSegment, SmallRanges) {
  const SegmentContext ctx(1000);
  const auto f = sieve_segment(f4(), 1, 11, ctx);
  EXPECT_EQ(std::vector<int>(f.begin(), f.end()),
            (std::vector<int>{1, 1, -1, 0, 1, -1, -1, 0, 0, 1}));
  const auto g = sieve_segment(default_extension(chi4()), 1, 6, ctx);
  EXPECT_EQ(std::vector<int>(g.begin(), g.end()), (std::vector<int>{1, 1, -1, 1, 1}));
  const auto mu = sieve_segment(Mobius{}, 1, 11, ctx);
  const auto table = mobius_table(build_factored_sieve(10));
  for (int n = 1; n <= 10; ++n) EXPECT_EQ(mu[n - 1], table[n]);
}

TEST(SieveSegment, Errors) {
  SegmentConfig cfg;
  cfg.segment_size = 100;
  const SegmentContext ctx(10'000, cfg);
  EXPECT_THROW(sieve_segment(Mobius{}, 1, 102, ctx), ResourceLimit);
  EXPECT_THROW(sieve_segment(Mobius{}, 0, 10, ctx), InvalidArgument);
  EXPECT_THROW(sieve_segment(Mobius{}, 9'990, 10'010, ctx), InvalidArgument);
  cfg.segment_size = cfg.max_segment_size + 1;
  EXPECT_THROW(SegmentContext(10'000, cfg), ResourceLimit);
  EXPECT_THROW(SegmentContext((1ULL << 50) + 2), InvalidArgument);
}

TEST(SieveSegment, SegmentedMatchesMonolithicToMillion) {
  const std::uint64_t n_max = 1'000'000;
  const auto sieve = build_factored_sieve(n_max);
  SegmentConfig cfg;
  cfg.segment_size = 65'521;  // prime length: segment edges fall everywhere
  const auto g = extend_character(chi4(), {{2, -1}});
  const ResemblingFunction f(g);

  auto check = [&](const auto& fn) {
    const auto mono = sieve_table(fn, sieve);
    std::uint64_t seen = 0;
    for_each_segment(fn, n_max, cfg, [&](std::uint64_t lo, std::span<const std::int8_t> v) {
      ASSERT_EQ(lo, seen + 1);
      for (std::size_t i = 0; i < v.size(); ++i) ASSERT_EQ(v[i], mono[lo + i]) << fn.id() << " " << lo + i;
      seen += v.size();
    });
    EXPECT_EQ(seen, n_max);
  };
  check(f);
  check(g);
  check(Mobius{});
}

TEST(SieveSegment, WideWordPathBeyond32Bits) {
  const std::uint64_t lo = (1ULL << 33) + 12'345;
  const std::uint64_t hi = lo + 3'000;
  const SegmentContext ctx(hi);
  const auto g = default_extension(character_from_discriminant(-3));
  const auto gv = sieve_segment(g, lo, hi, ctx);
  const auto fv = sieve_segment(ResemblingFunction(g), lo, hi, ctx);
  const auto mv = sieve_segment(Mobius{}, lo, hi, ctx);
  const std::map<std::uint64_t, int> signs{{3, 1}};
  for (std::uint64_t n = lo; n < hi; ++n) {
    ASSERT_EQ(gv[n - lo], oracle_g(-3, 3, signs, n, false)) << n;
    ASSERT_EQ(fv[n - lo], oracle_g(-3, 3, signs, n, true)) << n;
    ASSERT_EQ(mv[n - lo], oracle::mobius(n)) << n;
  }
}

TEST(Multiplicativity, RandomCoprimePairs) {
  const std::uint64_t n_max = 1'000'000;
  const auto sieve = build_factored_sieve(n_max);
  for (std::int64_t d : {-4LL, 5LL}) {
    const auto g = default_extension(character_from_discriminant(d));
    const ResemblingFunction f(g);
    std::mt19937_64 rng(static_cast<std::uint64_t>(d + 100));
    int checked = 0;
    while (checked < 10'000) {
      const std::uint64_t n = 1 + rng() % 1000;
      const std::uint64_t m = 1 + rng() % (n_max / n);
      if (std::gcd(n, m) != 1) continue;
      ASSERT_EQ(eval_f(f, n * m, sieve), eval_f(f, n, sieve) * eval_f(f, m, sieve));
      ASSERT_EQ(eval_g(g, n * m, sieve), eval_g(g, n, sieve) * eval_g(g, m, sieve));
      ++checked;
    }
    // g is completely multiplicative: no coprimality needed.
    for (int t = 0; t < 10'000; ++t) {
      const std::uint64_t n = 1 + rng() % 1000;
      const std::uint64_t m = 1 + rng() % (n_max / n);
      ASSERT_EQ(eval_g(g, n * m, sieve), eval_g(g, n, sieve) * eval_g(g, m, sieve));
    }
  }
}

TEST(Multiplicativity, CharacterOfSquarefreeGroup) {
  const auto sieve = build_factored_sieve(10'000);
  const auto f = ResemblingFunction(extend_character(chi4(), {{2, -1}}));
  std::vector<std::uint64_t> sq;
  for (std::uint64_t n = 1; n <= 10'000; ++n) {
    if (is_squarefree(n)) sq.push_back(n);
  }
  std::mt19937_64 rng(11);
  for (int t = 0; t < 10'000; ++t) {
    const auto n = sq[rng() % sq.size()], m = sq[rng() % sq.size()];
    const auto nm = squarefree_group_op(n, m);
    ASSERT_LE(nm, 100'000'000u);
    const int lhs = nm <= sieve.limit()
                        ? eval_f(f, nm, sieve)
                        : oracle::multiplicative(nm, [&](std::uint64_t p) { return f.prime_value(p); }, true);
    ASSERT_EQ(lhs, eval_f(f, n, sieve) * eval_f(f, m, sieve)) << n << " o " << m;
  }
}

TEST(PartialSums, Examples) {
  const auto mu = partial_sums(Mobius{}, 100, CheckpointGrid::explicit_points({10, 100}));
  EXPECT_EQ(mu.sums, (std::vector<std::int64_t>{-1, 1}));
  const auto mf = partial_sums(f4(), 4, CheckpointGrid::explicit_points({4}));
  EXPECT_EQ(mf.sums, (std::vector<std::int64_t>{1}));
  for (std::uint64_t seed_x : {1ULL, 7ULL}) {
    const auto one = partial_sums(default_extension(chi4()), seed_x, CheckpointGrid::explicit_points({1}));
    EXPECT_EQ(one.sums.front(), 1);
  }
}

TEST(PartialSums, GridResolution) {
  const auto pts = CheckpointGrid().resolve(100'000'000);
  EXPECT_EQ(pts.front(), 1u);
  EXPECT_EQ(pts.back(), 100'000'000u);
  for (std::uint64_t decade = 1; decade <= 100'000'000; decade *= 10) {
    EXPECT_TRUE(std::binary_search(pts.begin(), pts.end(), decade)) << decade;
  }
  EXPECT_EQ(CheckpointGrid().resolve(1'000'000).back(), 1'000'000u);
  EXPECT_EQ(CheckpointGrid().resolve(12'345).back(), 12'345u);
  EXPECT_THROW(CheckpointGrid::geometric(1.0), InvalidArgument);
  EXPECT_THROW(CheckpointGrid::explicit_points({}), InvalidArgument);
  EXPECT_THROW(CheckpointGrid::explicit_points({0, 5}), InvalidArgument);
  EXPECT_THROW(CheckpointGrid::explicit_points({5, 50}).resolve(10), InvalidArgument);
  EXPECT_THROW(partial_sums(Mobius{}, 0), InvalidArgument);
  EXPECT_THROW(partial_sums(Mobius{}, (1ULL << 50) + 1), InvalidArgument);
}

TEST(PartialSums, MatchBruteForceAndBoundBySquarefreeCount) {
  const std::uint64_t x_max = 200'000;
  const auto g = extend_character(character_from_discriminant(5), {{5, -1}});
  const ResemblingFunction f(g);
  SegmentConfig cfg;
  cfg.segment_size = 4096;
  const auto grid = CheckpointGrid::points_per_decade(20);
  const auto s = partial_sums(f, x_max, grid, cfg);
  const auto sieve = build_factored_sieve(x_max);
  const auto vals = sieve_table(f, sieve);
  std::int64_t running = 0;
  std::uint64_t q = 0;
  std::size_t next = 0;
  for (std::uint64_t n = 1; n <= x_max; ++n) {
    running += vals[n];
    q += vals[n] != 0;
    if (next < s.size() && s.checkpoints[next] == n) {
      ASSERT_EQ(s.sums[next], running) << n;
      ASSERT_LE(static_cast<std::uint64_t>(std::abs(running)), q);
      ++next;
    }
  }
  EXPECT_EQ(next, s.size());
}

TEST(PartialSums, WorkerCountDoesNotChangeResult) {
  SegmentConfig one, many;
  one.segment_size = many.segment_size = 10'007;
  one.workers = 1;
  many.workers = 4;
  const auto a = partial_sums(f4(), 300'000, {}, one);
  const auto b = partial_sums(f4(), 300'000, {}, many);
  EXPECT_EQ(a.sums, b.sums);
  EXPECT_EQ(a.checkpoints, b.checkpoints);
}

TEST(PartialSums, CsvLayout) {
  const auto s = partial_sums(Mobius{}, 100, CheckpointGrid::explicit_points({1, 10, 100}));
  std::ostringstream os;
  write_series_csv(os, s);
  EXPECT_EQ(os.str(),
            "x,M,M_over_sqrt_x,M_over_logpow\n"
            "1,1,1,nan\n"
            "10,-1,-0.31622776601683794,-0.43429448190325176\n"
            "100,1,0.1,0.21714724095162588\n");
}

TEST(Perturb, Rules) {
  const auto none = perturb(chi4(), FlipRule::none, 1'000'000);
  EXPECT_TRUE(none.flip_primes().empty());
  EXPECT_EQ(none.condition_sum(1'000'000), 0u);

  const auto de = perturb(chi4(), FlipRule::doubly_exponential, 1'000'000);
  EXPECT_EQ(de.flip_primes(), (std::vector<std::uint64_t>{3, 59, 8111}));
  EXPECT_LE(de.flip_primes().size(), 4u);
  EXPECT_EQ(de.condition_sum(100), 4u);

  const auto de8 = perturb(chi4(), FlipRule::doubly_exponential, 100'000'000);
  EXPECT_EQ(de8.flip_primes(), (std::vector<std::uint64_t>{3, 59, 8111, 8886113}));
  // Flip primes are the least admissible primes >= floor(e^{j^2}).
  for (std::size_t j = 1; j <= de8.flip_primes().size(); ++j) {
    const auto t = static_cast<std::uint64_t>(std::floor(std::exp(double(j * j))));
    for (std::uint64_t n = t; n < de8.flip_primes()[j - 1]; ++n) {
      EXPECT_TRUE(!oracle::is_prime(n) || 4 % n == 0) << n;
    }
  }

  PerturbOptions all;
  all.delta = 1.0;
  const auto pd = perturb(chi4(), FlipRule::positive_density, 100'000, all);
  std::uint64_t pi = 0;
  for (std::uint64_t x = 1; x <= 100'000; ++x) {
    pi += oracle::is_prime(x);
    if (x % 997 == 0 || x == 100'000) {
      ASSERT_EQ(pd.condition_sum(x), 2 * (pi - (x >= 2 ? 1 : 0))) << x;
    }
  }
  EXPECT_THROW(parse_flip_rule("sometimes"), InvalidArgument);
  PerturbOptions bad;
  bad.delta = 0;
  EXPECT_THROW(perturb(chi4(), FlipRule::positive_density, 100, bad), InvalidArgument);
}

TEST(Perturb, ValuesAgreeWithBaseOffFlips) {
  PerturbOptions half;
  half.delta = 0.5;
  const auto pf = perturb(chi4(), FlipRule::positive_density, 50'000, half);
  const auto base = f4();
  for_each_prime(2, 50'001, [&](std::uint64_t p) {
    const bool flipped = std::binary_search(pf.flip_primes().begin(), pf.flip_primes().end(), p);
    ASSERT_EQ(pf.is_flipped(p), flipped);
    ASSERT_EQ(pf.prime_value(p), flipped ? -base.prime_value(p) : base.prime_value(p));
    if (flipped) ASSERT_EQ(pf.prime_value(p), -chi4()(p));
  });
  // every second prime not dividing 4
  EXPECT_EQ(pf.flip_primes()[0], 5u);
  EXPECT_EQ(pf.flip_primes()[1], 11u);
}
