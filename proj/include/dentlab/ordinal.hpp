#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dentlab/errors.hpp"

namespace dentlab {

/// Ordinal in Cantor normal form: sum of w^exponent * coefficient terms with
/// strictly descending exponents and positive coefficients. Empty sum is 0.
/// Exponents are ordinals themselves (held behind shared immutable pointers);
/// everything this project schedules stays below w^w, but the representation
/// does not care.
class Ordinal {
 public:
  struct Term {
    std::shared_ptr<const Ordinal> exponent;  // never null
    std::uint64_t coeff;
  };

  Ordinal() = default;
  static Ordinal finite(std::uint64_t n);
  static Ordinal omega();
  static Ordinal omega_power(const Ordinal& e);

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_finite() const;
  /// Nonzero with no trailing finite term.
  bool is_limit() const;
  bool is_successor() const { return !is_zero() && !is_limit(); }

  /// Splits a = limit_part + finite_part (limit part is a limit ordinal or 0).
  std::pair<Ordinal, std::uint64_t> split_finite() const;

  static int compare(const Ordinal& a, const Ordinal& b);
  bool operator==(const Ordinal& o) const { return compare(*this, o) == 0; }
  bool operator!=(const Ordinal& o) const { return compare(*this, o) != 0; }
  bool operator<(const Ordinal& o) const { return compare(*this, o) < 0; }
  bool operator<=(const Ordinal& o) const { return compare(*this, o) <= 0; }

  /// Standard non-commutative ordinal sum.
  friend Ordinal operator+(const Ordinal& a, const Ordinal& b);

  /// Finite shadow: substitutes the budget for w and evaluates the CNF
  /// polynomial. Throws TooLarge when an exponent is not finite.
  std::uint64_t truncate(std::uint64_t budget) const;

  std::string to_string() const;
  static Ordinal parse(const std::string& text);

 private:
  std::vector<Term> terms_;
};

/// Canonical finite schedule (gamma_n, k_n), n = 1..pieces, for approaching a
/// limit ordinal from below with gamma_n + k_n: k_n = 2*eps_k + n and gamma_n
/// the largest limit (or 0) below alpha that the CNF shape reaches, growing
/// along the natural fundamental sequence when the trailing exponent is >= 2.
std::vector<std::pair<Ordinal, std::uint64_t>> limit_schedule(const Ordinal& alpha,
                                                              std::uint64_t eps_k,
                                                              std::uint64_t pieces);

}  // namespace dentlab
