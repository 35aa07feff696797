#pragma once

// Empirical growth of partial sums: log-log exponent fits, normalized ratios
// and the (log x)^{omega(k)} limsup bound for the +1 extension g.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mobius_like/characters.hpp"
#include "mobius_like/errors.hpp"
#include "mobius_like/mult_functions.hpp"
#include "mobius_like/partial_sums.hpp"

namespace mobius_like {

struct GrowthFit {
  double alpha = 0;
  double intercept = 0;
  double residual_norm = 0;
  std::size_t points_used = 0;
  std::uint64_t x_lo = 0, x_hi = 0;
};

/// Least-squares slope of log|M| against log x over checkpoints x >= x_min
/// with M != 0.
inline GrowthFit fit_exponent(const PartialSumSeries& s, std::uint64_t x_min = 1,
                              std::uint64_t x_max = std::numeric_limits<std::uint64_t>::max()) {
  std::vector<double> lx, ly;
  GrowthFit fit;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto x = s.checkpoints[i];
    if (x < x_min || x > x_max || s.sums[i] == 0) continue;
    lx.push_back(std::log(static_cast<double>(x)));
    ly.push_back(std::log(std::abs(static_cast<double>(s.sums[i]))));
    if (fit.x_lo == 0) fit.x_lo = x;
    fit.x_hi = x;
  }
  fit.points_used = lx.size();
  if (lx.size() < 5) {
    throw InsufficientData("need >= 5 nonzero checkpoints for a fit, have " +
                               std::to_string(lx.size()),
                           lx.size());
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0) throw InsufficientData("checkpoints do not span a range", lx.size());
  fit.alpha = sxy / sxx;
  fit.intercept = my - fit.alpha * mx;
  double rss = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.alpha * lx[i]);
    rss += r * r;
  }
  fit.residual_norm = std::sqrt(rss);
  return fit;
}

inline void to_json(nlohmann::json& j, const GrowthFit& f) {
  j = nlohmann::json{{"alpha", std::round(f.alpha * 1000.0) / 1000.0},
                     {"alpha_raw", f.alpha},
                     {"intercept", f.intercept},
                     {"residual_norm", f.residual_norm},
                     {"points_used", f.points_used},
                     {"x_range", {f.x_lo, f.x_hi}}};
}

struct Normalizer {
  enum class Kind { sqrt_x, log_pow, x_pow };
  Kind kind = Kind::sqrt_x;
  double param = 0.5;

  static Normalizer sqrt_x() { return {Kind::sqrt_x, 0.5}; }
  static Normalizer log_pow(double w) { return {Kind::log_pow, w}; }
  static Normalizer x_pow(double a) { return {Kind::x_pow, a}; }

  double operator()(double x) const {
    switch (kind) {
      case Kind::sqrt_x: return std::sqrt(x);
      case Kind::log_pow: return std::pow(std::log(x), param);
      case Kind::x_pow: return param == 0.5 ? std::sqrt(x) : std::pow(x, param);
    }
    return std::sqrt(x);
  }

  std::string name() const {
    switch (kind) {
      case Kind::sqrt_x: return "sqrt_x";
      case Kind::log_pow: return "log_pow(" + format_double(param) + ")";
      case Kind::x_pow: return "x_pow(" + format_double(param) + ")";
    }
    return "sqrt_x";
  }
};

struct RatioPoint {
  std::uint64_t x;
  double ratio;
};

/// |M(x)| / normalizer(x); NaN where the normalizer vanishes (log at x = 1).
inline std::vector<RatioPoint> normalized_ratios(const PartialSumSeries& s,
                                                 const Normalizer& norm) {
  if (s.size() < 2) throw InsufficientData("need >= 2 checkpoints", s.size());
  std::vector<RatioPoint> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = static_cast<double>(s.checkpoints[i]);
    const double d = norm(x);
    const double m = std::abs(static_cast<double>(s.sums[i]));
    out.push_back({s.checkpoints[i], d > 0 ? m / d : std::nan("")});
  }
  return out;
}

struct BoundReport {
  double bound_value = 0;
  double slack = 0.5;
  std::uint64_t flag_from = 10'000;
  std::vector<RatioPoint> ratios;  // checkpoints x >= 2
  double max_observed_ratio = 0;   // over x >= flag_from
  std::optional<std::uint64_t> first_x_exceeding;
  // Running max over the last decade did not exceed the running max before it.
  bool running_max_stable = false;

  bool within_bound() const noexcept { return !first_x_exceeding.has_value(); }
};

/// max|M_chi| / (omega(k)! prod_{p|k} log p).
inline double lemma2_bound_value(const Character& chi) {
  double denom = 1.0;
  int w = 0;
  for (const auto p : chi.bad_primes()) {
    denom *= std::log(static_cast<double>(p));
    denom *= ++w;
  }
  return static_cast<double>(char_partial_sum_max(chi)) / denom;
}

inline BoundReport lemma2_bound(const ExtendedMultiplicative& g, const PartialSumSeries& series_g,
                                double slack = 0.5, std::uint64_t flag_from = 10'000) {
  if (!g.all_signs_positive()) {
    throw InvalidArgument("limsup bound applies to the extension with g(p) = +1 at p | k");
  }
  if (series_g.function_id != g.id()) {
    throw InvalidArgument("series '" + series_g.function_id + "' is not a series of " + g.id());
  }
  BoundReport r;
  r.bound_value = lemma2_bound_value(g.chi());
  r.slack = slack;
  r.flag_from = flag_from;
  const int w = g.chi().omega_k();
  const double limit = r.bound_value * (1.0 + slack);
  double max_early = 0, max_late = 0;
  const double last_decade = static_cast<double>(series_g.x_max) / 10.0;
  for (std::size_t i = 0; i < series_g.size(); ++i) {
    const auto x = series_g.checkpoints[i];
    if (x < 2) continue;
    const double ratio = std::abs(static_cast<double>(series_g.sums[i])) /
                         std::pow(std::log(static_cast<double>(x)), w);
    r.ratios.push_back({x, ratio});
    if (x < flag_from) continue;
    r.max_observed_ratio = std::max(r.max_observed_ratio, ratio);
    if (ratio > limit && !r.first_x_exceeding) r.first_x_exceeding = x;
    if (static_cast<double>(x) < last_decade) {
      max_early = std::max(max_early, ratio);
    } else {
      max_late = std::max(max_late, ratio);
    }
  }
  r.running_max_stable = max_early > 0 && max_late <= max_early;
  return r;
}

inline void to_json(nlohmann::json& j, const BoundReport& r) {
  nlohmann::json ratios = nlohmann::json::array();
  for (const auto& p : r.ratios) ratios.push_back({{"x", p.x}, {"ratio", p.ratio}});
  j = nlohmann::json{{"bound_value", r.bound_value},
                     {"slack", r.slack},
                     {"flag_from", r.flag_from},
                     {"max_observed_ratio", r.max_observed_ratio},
                     {"first_x_exceeding", r.first_x_exceeding ? nlohmann::json(*r.first_x_exceeding)
                                                               : nlohmann::json(nullptr)},
                     {"running_max_stable", r.running_max_stable},
                     {"within_bound", r.within_bound()},
                     {"ratios", ratios}};
}

}  // namespace mobius_like
