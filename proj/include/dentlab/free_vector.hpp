#pragma once

#include <map>
#include <string>

#include "dentlab/rational.hpp"

namespace dentlab {

/// Finitely supported coefficient map over the points of a space, representing
/// sum c_i * delta(x_i). Zero coefficients are never stored, so equality of
/// maps is equality of vectors. The basepoint coefficient is kept (it makes
/// combinations of molecules formally balanced) but delta(base) = 0, so every
/// norm or pairing treats it as absent.
class FreeVector {
 public:
  FreeVector() = default;

  static FreeVector single(int i, const Rational& c) {
    FreeVector v;
    v.set(i, c);
    return v;
  }

  void set(int i, const Rational& c) {
    if (c == 0)
      coeffs_.erase(i);
    else
      coeffs_[i] = c;
  }

  Rational coeff(int i) const {
    auto it = coeffs_.find(i);
    return it == coeffs_.end() ? Rational(0) : it->second;
  }

  const std::map<int, Rational>& coeffs() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }

  /// Sum of all stored coefficients (basepoint included).
  Rational formal_mass() const {
    Rational m = 0;
    for (const auto& [i, c] : coeffs_) m += c;
    return m;
  }

  FreeVector& add_scaled(const FreeVector& o, const Rational& s) {
    for (const auto& [i, c] : o.coeffs_) set(i, coeff(i) + c * s);
    return *this;
  }

  friend FreeVector operator+(FreeVector a, const FreeVector& b) {
    a.add_scaled(b, Rational(1));
    return a;
  }
  friend FreeVector operator-(FreeVector a, const FreeVector& b) {
    a.add_scaled(b, Rational(-1));
    return a;
  }
  friend FreeVector operator*(const Rational& s, const FreeVector& v) {
    FreeVector out;
    if (s != 0)
      for (const auto& [i, c] : v.coeffs_) out.coeffs_[i] = c * s;
    return out;
  }
  friend bool operator==(const FreeVector& a, const FreeVector& b) {
    return a.coeffs_ == b.coeffs_;
  }

  std::string to_string() const {
    std::string out = "{";
    bool first = true;
    for (const auto& [i, c] : coeffs_) {
      if (!first) out += ", ";
      out += std::to_string(i) + ": " + rat_to_string(c);
      first = false;
    }
    return out + "}";
  }

 private:
  std::map<int, Rational> coeffs_;
};

}  // namespace dentlab
