#pragma once

// Checkpointed exact partial sums M(x) = sum_{n<=x} fn(n).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mobius_like/errors.hpp"
#include "mobius_like/segmented_sieve.hpp"

namespace mobius_like {

/// Shortest round-trip text for a double; "nan"/"inf" for non-finite values.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

class CheckpointGrid {
 public:
  /// Default: 8 log-equispaced points per decade.
  CheckpointGrid() = default;

  static CheckpointGrid geometric(double ratio) {
    if (!(ratio > 1.0) || !std::isfinite(ratio)) {
      throw InvalidArgument("geometric grid ratio must be > 1, got " + format_double(ratio));
    }
    CheckpointGrid g;
    g.ratio_ = ratio;
    return g;
  }

  static CheckpointGrid points_per_decade(int per_decade) {
    if (per_decade < 1) throw InvalidArgument("points per decade must be >= 1");
    return geometric(std::pow(10.0, 1.0 / per_decade));
  }

  static CheckpointGrid explicit_points(std::vector<std::uint64_t> points) {
    if (points.empty()) throw InvalidArgument("explicit grid is empty");
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    if (points.front() < 1) throw InvalidArgument("checkpoints must be >= 1");
    CheckpointGrid g;
    g.ratio_ = 0.0;
    g.points_ = std::move(points);
    return g;
  }

  bool is_explicit() const noexcept { return ratio_ == 0.0; }
  double ratio() const noexcept { return ratio_; }
  const std::vector<std::uint64_t>& points() const noexcept { return points_; }

  /// Sorted distinct checkpoints in [1, x_max]. Geometric grids are
  /// round(ratio^i) and always end at x_max.
  std::vector<std::uint64_t> resolve(std::uint64_t x_max) const {
    if (x_max < 1) throw InvalidArgument("x_max must be >= 1");
    if (is_explicit()) {
      if (points_.back() > x_max) {
        throw InvalidArgument("checkpoint " + std::to_string(points_.back()) +
                              " exceeds x_max " + std::to_string(x_max));
      }
      return points_;
    }
    std::vector<std::uint64_t> out;
    for (int i = 0;; ++i) {
      const double v = std::round(std::pow(ratio_, i));
      if (v > static_cast<double>(x_max)) break;
      const auto x = static_cast<std::uint64_t>(v);
      if (out.empty() || out.back() != x) out.push_back(x);
      if (out.size() > 10'000'000) throw ResourceLimit("checkpoint grid too dense");
    }
    if (out.empty() || out.back() != x_max) out.push_back(x_max);
    return out;
  }

 private:
  double ratio_ = std::pow(10.0, 1.0 / 8.0);
  std::vector<std::uint64_t> points_;
};

inline void to_json(nlohmann::json& j, const CheckpointGrid& g) {
  if (g.is_explicit()) {
    j = nlohmann::json{{"kind", "explicit"}, {"points", g.points()}};
  } else {
    j = nlohmann::json{{"kind", "geometric"}, {"ratio", g.ratio()}};
  }
}

inline CheckpointGrid grid_from_json(const nlohmann::json& j) {
  const auto kind = j.value("kind", std::string("geometric"));
  if (kind == "explicit") {
    return CheckpointGrid::explicit_points(j.at("points").get<std::vector<std::uint64_t>>());
  }
  if (kind == "geometric") {
    if (j.contains("points_per_decade")) {
      return CheckpointGrid::points_per_decade(j.at("points_per_decade").get<int>());
    }
    return CheckpointGrid::geometric(j.value("ratio", std::pow(10.0, 1.0 / 8.0)));
  }
  throw InvalidArgument("unknown grid kind '" + kind + "'");
}

struct PartialSumSeries {
  std::string function_id;
  std::vector<std::uint64_t> checkpoints;
  std::vector<std::int64_t> sums;
  std::uint64_t x_max = 0;
  // w in the (log x)^w normalizer; omega(k) for character-based functions.
  int log_exponent = 1;

  std::size_t size() const noexcept { return checkpoints.size(); }

  /// M at checkpoint x; throws when x is not a checkpoint.
  std::int64_t at(std::uint64_t x) const {
    const auto it = std::lower_bound(checkpoints.begin(), checkpoints.end(), x);
    if (it == checkpoints.end() || *it != x) {
      throw InvalidArgument("x=" + std::to_string(x) + " is not a checkpoint");
    }
    return sums[static_cast<std::size_t>(it - checkpoints.begin())];
  }
};

/// Single streaming pass over [1, x_max]; memory O(segment size).
template <PrimeDetermined F>
PartialSumSeries partial_sums(const F& fn, std::uint64_t x_max,
                              const CheckpointGrid& grid = {},
                              const SegmentConfig& config = {}) {
  PartialSumSeries s;
  s.function_id = fn.id();
  s.x_max = x_max;
  s.log_exponent = fn.log_exponent();
  s.checkpoints = grid.resolve(x_max);
  s.sums.reserve(s.checkpoints.size());

  std::int64_t running = 0;
  std::size_t next = 0;
  const auto& cps = s.checkpoints;
  for_each_segment(fn, x_max, config,
                   [&](std::uint64_t lo, std::span<const std::int8_t> values) {
                     const std::uint64_t hi = lo + values.size();
                     std::uint64_t pos = lo;
                     while (next < cps.size() && cps[next] < hi) {
                       for (; pos <= cps[next]; ++pos) running += values[pos - lo];
                       s.sums.push_back(running);
                       ++next;
                     }
                     for (; pos < hi; ++pos) running += values[pos - lo];
                   });
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto m = s.sums[i];
    if (static_cast<std::uint64_t>(m < 0 ? -m : m) > s.checkpoints[i]) {
      throw InternalConsistency("|M(x)| > x at x=" + std::to_string(s.checkpoints[i]));
    }
  }
  return s;
}

inline double log_power(double x, int w) { return std::pow(std::log(x), w); }

/// CSV with header x,M,M_over_sqrt_x,M_over_logpow.
inline void write_series_csv(std::ostream& os, const PartialSumSeries& s) {
  os << "x,M,M_over_sqrt_x,M_over_logpow\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = static_cast<double>(s.checkpoints[i]);
    const double m = static_cast<double>(s.sums[i]);
    const double lp = log_power(x, s.log_exponent);
    os << s.checkpoints[i] << ',' << s.sums[i] << ',' << format_double(m / std::sqrt(x))
       << ',' << (lp > 0 ? format_double(m / lp) : std::string("nan")) << '\n';
  }
}

inline void to_json(nlohmann::json& j, const PartialSumSeries& s) {
  j = nlohmann::json{{"function_id", s.function_id},
                     {"x_max", s.x_max},
                     {"log_exponent", s.log_exponent},
                     {"checkpoints", s.checkpoints},
                     {"sums", s.sums}};
}

inline PartialSumSeries series_from_json(const nlohmann::json& j) {
  PartialSumSeries s;
  s.function_id = j.value("function_id", std::string());
  s.x_max = j.at("x_max").get<std::uint64_t>();
  s.log_exponent = j.value("log_exponent", 1);
  s.checkpoints = j.at("checkpoints").get<std::vector<std::uint64_t>>();
  s.sums = j.at("sums").get<std::vector<std::int64_t>>();
  if (s.checkpoints.size() != s.sums.size()) {
    throw InvalidArgument("series has mismatched checkpoint and sum counts");
  }
  return s;
}

}  // namespace mobius_like
