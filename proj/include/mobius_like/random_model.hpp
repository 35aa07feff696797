#pragma once

// Random multiplicative baseline: f(p) independent uniform +-1, supported on
// squarefree n. Each sign is a pure function of (seed, p), so the sampled
// function does not depend on sieving order or segmentation.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mobius_like/errors.hpp"
#include "mobius_like/growth.hpp"
#include "mobius_like/partial_sums.hpp"

namespace mobius_like {

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Word `counter` of the splitmix64 stream started at `seed`.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) {
  return mix64(seed + (counter + 1) * 0x9e3779b97f4a7c15ULL);
}

inline constexpr std::uint64_t kDefaultRandomLimit = 10'000'000;

struct RandomFunctionSpec {
  std::uint64_t seed = 0;
  std::uint64_t x_max = 1'000'000;
};

class RandomMultiplicative {
 public:
  explicit RandomMultiplicative(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  int prime_value(std::uint64_t p) const noexcept {
    return (counter_hash(seed_, p) >> 63) ? 1 : -1;
  }
  bool squarefree_support() const noexcept { return true; }
  std::string id() const { return "random[seed=" + std::to_string(seed_) + "]"; }
  int log_exponent() const noexcept { return 1; }

 private:
  std::uint64_t seed_;
};

inline PartialSumSeries sample_series(const RandomFunctionSpec& spec,
                                      const CheckpointGrid& grid = {},
                                      const SegmentConfig& config = {},
                                      std::uint64_t limit = kDefaultRandomLimit) {
  if (spec.x_max > limit) {
    throw ResourceLimit("random trial x_max " + std::to_string(spec.x_max) +
                        " exceeds per-trial limit " + std::to_string(limit));
  }
  return partial_sums(RandomMultiplicative(spec.seed), spec.x_max, grid, config);
}

struct EnsembleSummary {
  std::vector<std::uint64_t> checkpoints;
  std::vector<double> q50;  // per-checkpoint quantiles of |M(x)|/sqrt(x)
  std::vector<double> q90;
  std::vector<double> alphas;  // one per trial whose fit succeeded
  double mean_alpha = 0;
  double alpha_variance = 0;
  std::size_t trials = 0;
};

/// Linear-interpolated quantile of unsorted data.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

struct EnsembleOptions {
  std::size_t min_seeds = 30;
  std::uint64_t fit_x_min = 100;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::uint64_t limit = kDefaultRandomLimit;
};

inline EnsembleSummary ensemble_stats(const std::vector<std::uint64_t>& seeds, std::uint64_t x_max,
                                      const CheckpointGrid& grid = {},
                                      const EnsembleOptions& opts = {}) {
  if (seeds.size() < opts.min_seeds) {
    throw InsufficientData("ensemble needs >= " + std::to_string(opts.min_seeds) +
                               " seeds, got " + std::to_string(seeds.size()),
                           seeds.size());
  }
  std::vector<PartialSumSeries> runs(seeds.size());
  SegmentConfig single;
  single.workers = 1;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < seeds.size();) {
      runs[i] = sample_series({seeds[i], x_max}, grid, single, opts.limit);
    }
  };
  {
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(std::max(1u, opts.workers), seeds.size()));
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }

  EnsembleSummary out;
  out.trials = seeds.size();
  out.checkpoints = runs.front().checkpoints;
  for (std::size_t c = 0; c < out.checkpoints.size(); ++c) {
    std::vector<double> r;
    r.reserve(runs.size());
    const double root = std::sqrt(static_cast<double>(out.checkpoints[c]));
    for (const auto& s : runs) r.push_back(std::abs(static_cast<double>(s.sums[c])) / root);
    out.q50.push_back(quantile(r, 0.5));
    out.q90.push_back(quantile(r, 0.9));
  }
  for (const auto& s : runs) {
    try {
      out.alphas.push_back(fit_exponent(s, opts.fit_x_min).alpha);
    } catch (const InsufficientData&) {
    }
  }
  if (out.alphas.empty()) throw InsufficientData("no trial admitted a fit", 0);
  // shifted by the first value: identical trials give variance exactly 0
  const double a0 = out.alphas.front();
  double shift = 0;
  for (const double a : out.alphas) shift += a - a0;
  out.mean_alpha = a0 + shift / static_cast<double>(out.alphas.size());
  double ss = 0;
  for (const double a : out.alphas) ss += (a - out.mean_alpha) * (a - out.mean_alpha);
  out.alpha_variance = ss / static_cast<double>(out.alphas.size());
  return out;
}

inline void to_json(nlohmann::json& j, const EnsembleSummary& e) {
  j = nlohmann::json{{"checkpoints", e.checkpoints}, {"q50", e.q50},
                     {"q90", e.q90},                 {"mean_alpha", e.mean_alpha},
                     {"alpha_variance", e.alpha_variance}, {"trials", e.trials},
                     {"fitted_trials", e.alphas.size()}};
}

}  // namespace mobius_like
