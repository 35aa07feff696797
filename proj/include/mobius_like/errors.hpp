#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mobius_like {

// Every library failure derives from Error and carries the exit code the CLI
// maps it to: 1 internal/identity failure, 2 invalid arguments, 3 resource limits.
class Error : public std::runtime_error {
 public:
  Error(const std::string& kind, const std::string& msg, int exit_code)
      : std::runtime_error(msg), kind_(kind), exit_code_(exit_code) {}

  const std::string& kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return exit_code_; }

 private:
  std::string kind_;
  int exit_code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& msg)
      : Error("invalid-argument", msg, 2) {}
};

class ResourceLimit : public Error {
 public:
  explicit ResourceLimit(const std::string& msg)
      : Error("resource-limit", msg, 3) {}
};

/// A Character table failed one of its invariants. `witness_a`/`witness_b`
/// name the residues exhibiting the failure (b is 0 when one residue suffices).
class ValidationError : public Error {
 public:
  ValidationError(std::string invariant, std::uint64_t a, std::uint64_t b,
                  const std::string& msg)
      : Error("validation", msg, 2),
        invariant_(std::move(invariant)),
        witness_a_(a),
        witness_b_(b) {}

  const std::string& invariant() const noexcept { return invariant_; }
  std::uint64_t witness_a() const noexcept { return witness_a_; }
  std::uint64_t witness_b() const noexcept { return witness_b_; }

 private:
  std::string invariant_;
  std::uint64_t witness_a_;
  std::uint64_t witness_b_;
};

class InsufficientData : public Error {
 public:
  InsufficientData(const std::string& msg, std::size_t count)
      : Error("insufficient-data", msg, 2), count_(count) {}

  std::size_t count() const noexcept { return count_; }

 private:
  std::size_t count_;
};

class InternalConsistency : public Error {
 public:
  explicit InternalConsistency(const std::string& msg)
      : Error("internal-consistency", msg, 1) {}
};

class ArithmeticOverflow : public Error {
 public:
  explicit ArithmeticOverflow(const std::string& msg)
      : Error("overflow", msg, 1) {}
};

}  // namespace mobius_like
