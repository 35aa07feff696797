#pragma once

// Real non-principal Dirichlet characters stored as validated period tables.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mobius_like/core_arith.hpp"
#include "mobius_like/errors.hpp"

namespace mobius_like {

/// Returns an empty string when d is a fundamental discriminant, else the
/// reason it is not.
inline std::string fundamental_discriminant_violation(std::int64_t d) {
  if (d == 0 || d == 1) return "d=" + std::to_string(d) + " is degenerate";
  const std::int64_t r = ((d % 4) + 4) % 4;
  if (r == 1) {
    const std::uint64_t a = d < 0 ? 0 - static_cast<std::uint64_t>(d)
                                  : static_cast<std::uint64_t>(d);
    if (!is_squarefree(a)) return "d = 1 mod 4 but not squarefree";
    return {};
  }
  if (r == 0) {
    const std::int64_t m = d / 4;
    const std::int64_t mr = ((m % 4) + 4) % 4;
    if (mr != 2 && mr != 3) return "d = 4m requires m = 2,3 mod 4";
    const std::uint64_t a = m < 0 ? 0 - static_cast<std::uint64_t>(m)
                                  : static_cast<std::uint64_t>(m);
    if (!is_squarefree(a)) return "d = 4m requires m squarefree";
    return {};
  }
  return "d = " + std::to_string(r) + " mod 4 is never a discriminant";
}

class Character {
 public:
  std::uint64_t modulus() const noexcept { return values_.size(); }
  std::span<const std::int8_t> values() const noexcept { return values_; }
  int omega_k() const noexcept { return omega_k_; }
  std::span<const std::uint64_t> bad_primes() const noexcept { return bad_primes_; }
  std::optional<std::int64_t> discriminant() const noexcept { return discriminant_; }

  int operator()(std::uint64_t n) const noexcept { return values_[n % values_.size()]; }

  bool operator==(const Character& o) const noexcept { return values_ == o.values_; }

  friend Character character_from_table(std::uint64_t, std::span<const int>);
  friend Character character_from_discriminant(std::int64_t);

 private:
  std::vector<std::int8_t> values_;
  int omega_k_ = 0;
  std::vector<std::uint64_t> bad_primes_;
  std::optional<std::int64_t> discriminant_;
};

inline Character character_from_table(std::uint64_t k, std::span<const int> values) {
  if (k < 3) {
    throw ValidationError("modulus", k, 0,
                          "modulus " + std::to_string(k) +
                              " admits no real non-principal character");
  }
  if (values.size() != k) {
    throw ValidationError("length", values.size(), 0,
                          "table length " + std::to_string(values.size()) +
                              " != modulus " + std::to_string(k));
  }
  for (std::uint64_t n = 0; n < k; ++n) {
    if (values[n] < -1 || values[n] > 1) {
      throw ValidationError("real", n, 0,
                            "value at residue " + std::to_string(n) +
                                " is not in {-1,0,1}");
    }
  }
  if (values[1] != 1) {
    throw ValidationError("chi(1)=1", 1, 0, "chi(1) must be 1");
  }
  for (std::uint64_t n = 0; n < k; ++n) {
    const bool coprime = std::gcd(n, k) == 1;
    if (coprime == (values[n] == 0)) {
      throw ValidationError("support", n, 0,
                            "chi(" + std::to_string(n) + ") must be " +
                                (coprime ? "nonzero" : "zero") +
                                " (gcd with modulus)");
    }
  }
  for (std::uint64_t a = 1; a < k; ++a) {
    for (std::uint64_t b = a; b < k; ++b) {
      if (values[a * b % k] != values[a] * values[b]) {
        throw ValidationError("multiplicative", a, b,
                              "chi(" + std::to_string(a) + "*" +
                                  std::to_string(b) + ") != chi(" +
                                  std::to_string(a) + ")chi(" +
                                  std::to_string(b) + ")");
      }
    }
  }
  long sum = 0;
  for (int v : values) sum += v;
  if (sum != 0) {
    throw ValidationError("non-principal", 0, 0,
                          "period sum is " + std::to_string(sum) +
                              ", character is principal");
  }
  Character c;
  c.values_.assign(values.begin(), values.end());
  c.bad_primes_ = prime_divisors(k);
  c.omega_k_ = static_cast<int>(c.bad_primes_.size());
  return c;
}

inline Character character_from_table(std::uint64_t k, const std::vector<int>& values) {
  return character_from_table(k, std::span<const int>(values));
}

inline Character character_from_discriminant(std::int64_t d) {
  if (const auto why = fundamental_discriminant_violation(d); !why.empty()) {
    throw InvalidArgument("not a fundamental discriminant: " + why);
  }
  const std::uint64_t k = d < 0 ? 0 - static_cast<std::uint64_t>(d)
                                : static_cast<std::uint64_t>(d);
  if (k < 3) throw InvalidArgument("|d| must be >= 3");
  std::vector<int> table(k);
  for (std::uint64_t n = 0; n < k; ++n) table[n] = kronecker_symbol(d, n);
  Character c = character_from_table(k, table);
  c.discriminant_ = d;
  return c;
}

/// max over y >= 1 of |sum_{n<=y} chi(n)|; one period suffices since the
/// period sum vanishes.
inline std::uint64_t char_partial_sum_max(const Character& chi) {
  long s = 0;
  long best = 0;
  for (std::uint64_t y = 1; y <= chi.modulus(); ++y) {
    s += chi(y);
    best = std::max(best, s < 0 ? -s : s);
  }
  return static_cast<std::uint64_t>(best);
}

inline void to_json(nlohmann::json& j, const Character& c) {
  std::vector<int> v(c.values().begin(), c.values().end());
  j = nlohmann::json{{"modulus", c.modulus()}, {"values", v}};
  if (c.discriminant()) {
    j["source"] = "discriminant";
    j["discriminant"] = *c.discriminant();
  } else {
    j["source"] = "table";
  }
}

inline Character character_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("character must be a JSON object");
  if (j.contains("discriminant") && !j.contains("values")) {
    return character_from_discriminant(j.at("discriminant").get<std::int64_t>());
  }
  if (!j.contains("modulus") || !j.contains("values")) {
    throw InvalidArgument("character JSON needs {modulus, values} or {discriminant}");
  }
  const auto k = j.at("modulus").get<std::uint64_t>();
  const auto values = j.at("values").get<std::vector<int>>();
  Character c = character_from_table(k, values);
  if (j.value("source", std::string("table")) == "discriminant") {
    const auto d = j.at("discriminant").get<std::int64_t>();
    Character from_d = character_from_discriminant(d);
    if (!(from_d == c)) {
      throw InvalidArgument("character table disagrees with its discriminant");
    }
    return from_d;
  }
  return c;
}

}  // namespace mobius_like
