#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dentlab {

// Exact rational scalar used everywhere: distances, coefficients, flows,
// thresholds. No floating point enters any computation.
using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

inline Rational pow2(long e) {
  BigInt one = 1;
  if (e >= 0) return Rational(one << e, 1);
  return Rational(1, one << (-e));
}

// Canonical form is always "num/den" with den > 0, e.g. "0/1", "-3/2".
inline std::string rat_to_string(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

// Accepts "p/q" or a bare integer "p". Rejects q <= 0 and malformed input.
inline Rational parse_rational(std::string_view s) {
  auto fail = [&] { throw std::invalid_argument("bad rational: '" + std::string(s) + "'"); };
  if (s.empty()) fail();
  auto is_int = [](std::string_view t) {
    if (t.empty()) return false;
    std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i)
      if (t[i] < '0' || t[i] > '9') return false;
    return true;
  };
  std::size_t slash = s.find('/');
  try {
    if (slash == std::string_view::npos) {
      if (!is_int(s)) fail();
      return Rational(BigInt(std::string(s)), 1);
    }
    std::string_view num = s.substr(0, slash);
    std::string_view den = s.substr(slash + 1);
    if (!is_int(num) || !is_int(den)) fail();
    BigInt q{std::string(den)};
    if (q <= 0) fail();
    return Rational(BigInt{std::string(num)}, q);
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    fail();
  }
  return Rational(0);  // unreachable
}

// FNV-1a, used for content-addressing serialized artifacts.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace dentlab
