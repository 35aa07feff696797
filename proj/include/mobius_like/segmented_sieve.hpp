#pragma once

// Segmented evaluation of prime-determined functions on [lo, hi) without a
// factor table: each n accumulates the product of its small prime powers and
// the matching sign; what remains of n afterwards is 1 or a single large prime.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "mobius_like/core_arith.hpp"
#include "mobius_like/errors.hpp"
#include "mobius_like/mult_functions.hpp"

namespace mobius_like {

inline constexpr std::uint64_t kMaxArgument = 1ULL << 50;

struct SegmentConfig {
  std::uint64_t segment_size = 1ULL << 22;
  std::uint64_t max_segment_size = 1ULL << 28;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  // Budget for per-worker segment buffers; caps the effective worker count.
  std::uint64_t buffer_budget = 256ULL << 20;
  std::uint64_t memory_cap = kDefaultMemoryCap;
};

/// Primes up to sqrt(hi_max) shared by every segment below hi_max.
class SegmentContext {
 public:
  SegmentContext(std::uint64_t hi_max, SegmentConfig config = {})
      : hi_max_(hi_max), config_(config) {
    if (hi_max < 2) throw InvalidArgument("segment context needs hi_max >= 2");
    if (hi_max - 1 > kMaxArgument) {
      throw InvalidArgument("arguments beyond 2^50 are not supported");
    }
    if (config_.segment_size == 0) throw InvalidArgument("segment size must be positive");
    if (config_.segment_size > config_.max_segment_size) {
      throw ResourceLimit("segment size " + std::to_string(config_.segment_size) +
                          " exceeds cap " + std::to_string(config_.max_segment_size));
    }
    const std::uint64_t root = isqrt(hi_max - 1);
    if (root >= 2) {
      if (factored_sieve_bytes(root) > config_.memory_cap) {
        throw ResourceLimit("base prime table exceeds memory cap");
      }
      for_each_prime(2, root + 1, [&](std::uint64_t p) { base_primes_.push_back(p); });
    }
  }

  std::uint64_t hi_max() const noexcept { return hi_max_; }
  const SegmentConfig& config() const noexcept { return config_; }
  std::span<const std::uint64_t> base_primes() const noexcept { return base_primes_; }

 private:
  std::uint64_t hi_max_;
  SegmentConfig config_;
  std::vector<std::uint64_t> base_primes_;
};

namespace detail {

template <class Word, PrimeDetermined F>
void sieve_kernel(const F& fn, std::uint64_t lo, std::uint64_t hi,
                  std::span<const std::uint64_t> primes,
                  std::span<const std::int8_t> prime_values,
                  std::vector<Word>& prod, std::span<std::int8_t> out) {
  const std::uint64_t len = hi - lo;
  prod.assign(len, 1);
  std::fill(out.begin(), out.end(), std::int8_t{1});
  const bool sqfree = fn.squarefree_support();

  for (std::size_t i = 0; i < primes.size(); ++i) {
    const std::uint64_t p = primes[i];
    if (p > (hi - 1) / p) break;
    const std::int8_t s = prime_values[i];
    const Word pw = static_cast<Word>(p);
    if (sqfree) {
      for (std::uint64_t j = (lo + p - 1) / p * p - lo; j < len; j += p) {
        prod[j] *= pw;
        out[j] = static_cast<std::int8_t>(out[j] * s);
      }
      const std::uint64_t pp = p * p;
      for (std::uint64_t j = (lo + pp - 1) / pp * pp - lo; j < len; j += pp) {
        out[j] = 0;
      }
    } else {
      for (std::uint64_t pk = p;; pk *= p) {
        for (std::uint64_t j = (lo + pk - 1) / pk * pk - lo; j < len; j += pk) {
          prod[j] *= pw;
          out[j] = static_cast<std::int8_t>(out[j] * s);
        }
        if (pk > (hi - 1) / p) break;
      }
    }
  }
  for (std::uint64_t j = 0; j < len; ++j) {
    if (out[j] == 0) continue;
    const Word n = static_cast<Word>(lo + j);
    if (prod[j] != n) {
      out[j] = static_cast<std::int8_t>(out[j] * fn.prime_value(n / prod[j]));
    }
  }
}

template <PrimeDetermined F>
std::vector<std::int8_t> base_prime_values(const F& fn, const SegmentContext& ctx) {
  std::vector<std::int8_t> v;
  v.reserve(ctx.base_primes().size());
  for (const auto p : ctx.base_primes()) v.push_back(static_cast<std::int8_t>(fn.prime_value(p)));
  return v;
}

// Fills out[0, hi-lo) choosing 32-bit products whenever every n fits.
template <PrimeDetermined F>
void sieve_into(const F& fn, std::uint64_t lo, std::uint64_t hi,
                const SegmentContext& ctx, std::span<const std::int8_t> prime_values,
                std::vector<std::uint32_t>& prod32, std::vector<std::uint64_t>& prod64,
                std::span<std::int8_t> out) {
  if (hi - 1 <= 0xFFFFFFFFULL) {
    sieve_kernel<std::uint32_t>(fn, lo, hi, ctx.base_primes(), prime_values, prod32, out);
  } else {
    sieve_kernel<std::uint64_t>(fn, lo, hi, ctx.base_primes(), prime_values, prod64, out);
  }
}

}  // namespace detail

/// Exact values of fn on [lo, hi).
template <PrimeDetermined F>
std::vector<std::int8_t> sieve_segment(const F& fn, std::uint64_t lo, std::uint64_t hi,
                                       const SegmentContext& ctx) {
  if (lo < 1 || hi < lo) throw InvalidArgument("segment needs 1 <= lo <= hi");
  if (hi > ctx.hi_max()) {
    throw InvalidArgument("segment end " + std::to_string(hi) +
                          " beyond context limit " + std::to_string(ctx.hi_max()));
  }
  if (hi - lo > ctx.config().segment_size) {
    throw ResourceLimit("segment length " + std::to_string(hi - lo) +
                        " exceeds configured segment size " +
                        std::to_string(ctx.config().segment_size));
  }
  std::vector<std::int8_t> out(hi - lo);
  if (out.empty()) return out;
  const auto values = detail::base_prime_values(fn, ctx);
  std::vector<std::uint32_t> p32;
  std::vector<std::uint64_t> p64;
  detail::sieve_into(fn, lo, hi, ctx, values, p32, p64, out);
  return out;
}

/// Sieves [1, x_max] segment by segment and hands each segment to
/// visit(lo, values) in ascending order. Segments within a batch are computed
/// by concurrent workers; visiting is sequential, so the visitor sees the same
/// sequence for every worker count.
template <PrimeDetermined F, class Visit>
void for_each_segment(const F& fn, std::uint64_t x_max, const SegmentConfig& config,
                      Visit&& visit) {
  if (x_max < 1) throw InvalidArgument("x_max must be >= 1");
  if (x_max > kMaxArgument) throw InvalidArgument("x_max beyond 2^50 is not supported");
  const SegmentContext ctx(x_max + 1, config);
  const auto values = detail::base_prime_values(fn, ctx);
  const std::uint64_t seg = config.segment_size;
  const std::uint64_t per_worker = seg * (x_max <= 0xFFFFFFFFULL ? 5 : 9);
  unsigned workers = std::max(1u, config.workers);
  workers = static_cast<unsigned>(std::max<std::uint64_t>(
      1, std::min<std::uint64_t>(workers, config.buffer_budget / per_worker)));
  const std::uint64_t segments = (x_max + seg - 1) / seg;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, segments));

  std::vector<std::vector<std::int8_t>> outs(workers);
  std::vector<std::vector<std::uint32_t>> p32(workers);
  std::vector<std::vector<std::uint64_t>> p64(workers);

  auto run = [&](unsigned w, std::uint64_t index) {
    const std::uint64_t lo = 1 + index * seg;
    const std::uint64_t hi = std::min(x_max + 1, lo + seg);
    outs[w].resize(hi - lo);
    detail::sieve_into(fn, lo, hi, ctx, values, p32[w], p64[w], outs[w]);
  };

  for (std::uint64_t first = 0; first < segments; first += workers) {
    const unsigned batch =
        static_cast<unsigned>(std::min<std::uint64_t>(workers, segments - first));
    if (batch == 1) {
      run(0, first);
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(batch);
      for (unsigned w = 0; w < batch; ++w) pool.emplace_back(run, w, first + w);
    }
    for (unsigned w = 0; w < batch; ++w) {
      visit(1 + (first + w) * seg, std::span<const std::int8_t>(outs[w]));
    }
  }
}

}  // namespace mobius_like
