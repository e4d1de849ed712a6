#include "dentlab/ordinal.hpp"

#include <algorithm>
#include <cctype>

namespace dentlab {

namespace {

const std::shared_ptr<const Ordinal>& zero_ordinal() {
  static const std::shared_ptr<const Ordinal> z = std::make_shared<Ordinal>();
  return z;
}

}  // namespace

Ordinal Ordinal::finite(std::uint64_t n) {
  Ordinal o;
  if (n > 0) o.terms_.push_back({zero_ordinal(), n});
  return o;
}

Ordinal Ordinal::omega() { return omega_power(finite(1)); }

Ordinal Ordinal::omega_power(const Ordinal& e) {
  Ordinal o;
  o.terms_.push_back({std::make_shared<Ordinal>(e), 1});
  return o;
}

bool Ordinal::is_finite() const {
  return terms_.empty() || (terms_.size() == 1 && terms_[0].exponent->is_zero());
}

bool Ordinal::is_limit() const {
  if (terms_.empty()) return false;
  return !terms_.back().exponent->is_zero();
}

std::pair<Ordinal, std::uint64_t> Ordinal::split_finite() const {
  Ordinal limit_part = *this;
  std::uint64_t fin = 0;
  if (!terms_.empty() && terms_.back().exponent->is_zero()) {
    fin = limit_part.terms_.back().coeff;
    limit_part.terms_.pop_back();
  }
  return {limit_part, fin};
}

int Ordinal::compare(const Ordinal& a, const Ordinal& b) {
  const std::size_t n = std::min(a.terms_.size(), b.terms_.size());
  for (std::size_t i = 0; i < n; ++i) {
    int e = compare(*a.terms_[i].exponent, *b.terms_[i].exponent);
    if (e != 0) return e;
    if (a.terms_[i].coeff != b.terms_[i].coeff)
      return a.terms_[i].coeff < b.terms_[i].coeff ? -1 : 1;
  }
  if (a.terms_.size() != b.terms_.size()) return a.terms_.size() < b.terms_.size() ? -1 : 1;
  return 0;
}

Ordinal operator+(const Ordinal& a, const Ordinal& b) {
  if (b.is_zero()) return a;
  Ordinal out;
  std::vector<Ordinal::Term> rest = b.terms_;
  const Ordinal& lead = *rest.front().exponent;
  for (const auto& t : a.terms_) {
    int c = Ordinal::compare(*t.exponent, lead);
    if (c > 0) {
      out.terms_.push_back(t);
    } else {
      if (c == 0) rest.front().coeff += t.coeff;
      break;  // smaller terms of a are absorbed
    }
  }
  for (auto& t : rest) out.terms_.push_back(std::move(t));
  return out;
}

std::uint64_t Ordinal::truncate(std::uint64_t budget) const {
  std::uint64_t total = 0;
  for (const auto& t : terms_) {
    if (!t.exponent->is_finite()) throw TooLarge();
    std::uint64_t e = t.exponent->is_zero() ? 0 : t.exponent->terms()[0].coeff;
    std::uint64_t pw = 1;
    for (std::uint64_t i = 0; i < e; ++i) pw *= budget;
    total += pw * t.coeff;
  }
  return total;
}

std::string Ordinal::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const Term& t = terms_[i];
    if (i) out += "+";
    if (t.exponent->is_zero()) {
      out += std::to_string(t.coeff);
    } else if (*t.exponent == Ordinal::finite(1)) {
      out += "w*" + std::to_string(t.coeff);
    } else {
      out += "w^" + t.exponent->to_string() + "*" + std::to_string(t.coeff);
    }
  }
  return out;
}

namespace {

std::uint64_t parse_nat(const std::string& s, std::size_t& pos) {
  if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
    throw ParseError("expected number at position " + std::to_string(pos) + " in '" + s + "'");
  std::uint64_t v = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    v = v * 10 + static_cast<std::uint64_t>(s[pos] - '0');
    ++pos;
  }
  return v;
}

// w^exponent * coeff; zero coeff yields 0.
Ordinal cnf_term(const Ordinal& exponent, std::uint64_t coeff) {
  if (coeff == 0) return Ordinal();
  Ordinal t = Ordinal::omega_power(exponent);
  Ordinal sum = t;
  for (std::uint64_t c = 1; c < coeff; ++c) sum = sum + t;
  return sum;
}

}  // namespace

// Grammar: term ("+" term)*, term := "w" ["^" nat] ["*" nat] | nat.
// Exponents in the textual form are naturals; that covers every depth this
// project schedules.
Ordinal Ordinal::parse(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw ParseError("empty ordinal");
  std::size_t pos = 0;
  Ordinal sum;
  bool first = true;
  while (true) {
    if (!first) {
      if (pos >= s.size() || s[pos] != '+') throw ParseError("expected '+' in '" + s + "'");
      ++pos;
    }
    Ordinal term;
    if (pos < s.size() && (s[pos] == 'w' || s[pos] == 'W')) {
      ++pos;
      std::uint64_t exp = 1;
      if (pos < s.size() && s[pos] == '^') {
        ++pos;
        exp = parse_nat(s, pos);
      }
      std::uint64_t coeff = 1;
      if (pos < s.size() && s[pos] == '*') {
        ++pos;
        coeff = parse_nat(s, pos);
      }
      if (coeff == 0) throw ParseError("zero coefficient in '" + s + "'");
      term = cnf_term(finite(exp), coeff);
    } else {
      term = finite(parse_nat(s, pos));
    }
    sum = sum + term;
    first = false;
    if (pos == s.size()) break;
  }
  return sum;
}

std::vector<std::pair<Ordinal, std::uint64_t>> limit_schedule(const Ordinal& alpha,
                                                              std::uint64_t eps_k,
                                                              std::uint64_t pieces) {
  if (!alpha.is_limit()) throw NotALimit();
  const auto& terms = alpha.terms();
  const Ordinal::Term& last = terms.back();
  Ordinal head;  // alpha minus its last CNF term
  for (std::size_t i = 0; i + 1 < terms.size(); ++i)
    head = head + cnf_term(*terms[i].exponent, terms[i].coeff);

  std::vector<std::pair<Ordinal, std::uint64_t>> out;
  const bool exponent_one = *last.exponent == Ordinal::finite(1);
  for (std::uint64_t n = 1; n <= pieces; ++n) {
    Ordinal gamma = head + cnf_term(*last.exponent, last.coeff - 1);
    if (!exponent_one) {
      // descend one exponent level along the natural fundamental sequence
      const Ordinal& e = *last.exponent;
      if (!e.is_finite() || e.is_zero()) throw TooLarge();
      std::uint64_t efin = e.terms()[0].coeff;
      gamma = gamma + cnf_term(Ordinal::finite(efin - 1), n);
    }
    out.push_back({gamma, 2 * eps_k + n});
  }
  return out;
}

}  // namespace dentlab
