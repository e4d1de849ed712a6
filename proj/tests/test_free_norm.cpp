#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dentlab/kr_norm.hpp"
#include "helpers.hpp"

using namespace dentlab;
using testutil::oracle_kr_norm;
using testutil::Rng;

namespace {

PointedMetricSpace m0() {
  return PointedMetricSpace::create_validated({"0", "1"}, 0,
                                              {Rational(0), Rational(1), Rational(1), Rational(0)});
}

PointedMetricSpace equilateral() {
  std::vector<Rational> d = {Rational(0), Rational(1), Rational(1), Rational(1), Rational(0),
                             Rational(1), Rational(1), Rational(1), Rational(0)};
  return PointedMetricSpace::create_validated({"0", "a", "b"}, 0, std::move(d));
}

}  // namespace

TEST_CASE("single delta ships from the base") {
  auto spaces = testutil::small_corpus(50, 20250810);
  for (const auto& M : spaces)
    for (int x = 0; x < M.size(); ++x) {
      if (x == M.base()) continue;
      auto r = kr_norm(M, FreeVector::single(x, Rational(1)));
      CHECK(r.norm == M.dist(x, M.base()));
    }
}

TEST_CASE("molecules lie on the unit sphere") {
  auto spaces = testutil::small_corpus(50, 20250810);
  for (const auto& M : spaces)
    for (int x = 0; x < M.size(); ++x)
      for (int y = 0; y < M.size(); ++y) {
        if (x == y) continue;
        CHECK(kr_norm(M, molecule(M, x, y)).norm == 1);
      }
}

TEST_CASE("molecule construction") {
  auto M = m0();
  FreeVector m = molecule(M, 1, 0);
  CHECK(m.coeff(1) == 1);
  CHECK(m.coeff(0) == -1);
  CHECK(m.formal_mass() == 0);
  FreeVector neg = molecule(M, 0, 1);
  CHECK((m + neg).is_zero());
  CHECK_THROWS_AS(molecule(M, 1, 1), EqualPoints);
}

TEST_CASE("two deltas on the equilateral triangle cost 2") {
  auto M = equilateral();
  FreeVector v;
  v.set(1, Rational(1));
  v.set(2, Rational(1));
  auto r = kr_norm(M, v);
  CHECK(r.norm == 2);
  CHECK(r.norm == oracle_kr_norm(M, v));
}

TEST_CASE("zero vector has empty witnesses") {
  auto M = m0();
  auto r = kr_norm(M, FreeVector());
  CHECK(r.norm == 0);
  CHECK(r.plan.arcs.empty());
  FreeVector base_only = FreeVector::single(0, Rational(7));
  CHECK(kr_norm(M, base_only).norm == 0);  // delta at the base is the zero functional
}

TEST_CASE("norm agrees with the exhaustive transport oracle") {
  auto spaces = testutil::small_corpus(50, 20250810);
  Rng rng(777);
  for (const auto& M : spaces) {
    for (int rep = 0; rep < 4; ++rep) {
      FreeVector v = testutil::random_vector(rng, M, 1 + static_cast<int>(rng.below(4)));
      auto r = kr_norm(M, v);
      CHECK(r.norm == oracle_kr_norm(M, v));
    }
  }
}

TEST_CASE("duality gap is exactly zero with a 1-Lipschitz dual") {
  auto spaces = testutil::small_corpus(50, 20250810);
  Rng rng(12345);
  for (const auto& M : spaces) {
    for (int rep = 0; rep < 4; ++rep) {
      FreeVector v = testutil::random_vector(rng, M, 1 + static_cast<int>(rng.below(4)));
      auto r = kr_norm(M, v);
      CHECK(r.plan.cost(M) == r.norm);
      CHECK(pairing(v, r.dual) == r.norm);
      CHECK(lip_constant(M, r.dual) <= 1);
      CHECK(r.dual.values[M.base()] == 0);
      // plan feasibility re-checked from scratch
      auto div = r.plan.divergence();
      for (int p = 0; p < M.size(); ++p) {
        if (p == M.base()) continue;
        Rational have = div.count(p) ? div.at(p) : Rational(0);
        CHECK(have == v.coeff(p));
      }
      for (const auto& arc : r.plan.arcs) CHECK(arc.flow > 0);
    }
  }
}

TEST_CASE("rescaling the space scales the norm") {
  Rng rng(99);
  for (int rep = 0; rep < 10; ++rep) {
    auto M = testutil::random_space(rng, 4);
    FreeVector v = testutil::random_vector(rng, M, 3);
    Rational s = rng.positive_dyadic(2);
    CHECK(kr_norm(M.rescaled(s), v).norm == s * kr_norm(M, v).norm);
  }
}

TEST_CASE("norm is computed inside any subspace containing the support") {
  Rng rng(4242);
  for (int rep = 0; rep < 12; ++rep) {
    auto M = testutil::random_space(rng, 4);
    std::vector<int> pts;
    for (int p = 0; p < 4; ++p)
      if (p != M.base()) pts.push_back(p);
    FreeVector v;
    v.set(pts[0], rng.signed_dyadic(2));
    v.set(pts[1], rng.signed_dyadic(2));
    auto sub = M.subspace({pts[0], pts[1], M.base()}, M.base());
    FreeVector v_sub;
    v_sub.set(sub.index_of(M.label(pts[0])), v.coeff(pts[0]));
    v_sub.set(sub.index_of(M.label(pts[1])), v.coeff(pts[1]));
    CHECK(kr_norm(sub, v_sub).norm == kr_norm(M, v).norm);
  }
}

TEST_CASE("norm satisfies the triangle inequality") {
  Rng rng(31337);
  for (int rep = 0; rep < 15; ++rep) {
    auto M = testutil::random_space(rng, 3 + static_cast<int>(rng.below(2)));
    FreeVector u = testutil::random_vector(rng, M, 2);
    FreeVector v = testutil::random_vector(rng, M, 2);
    CHECK(kr_norm(M, u + v).norm <= kr_norm(M, u).norm + kr_norm(M, v).norm);
  }
}

TEST_CASE("pairing on molecules is the difference quotient") {
  auto M = equilateral();
  LipWitness f;
  f.values = {Rational(0), Rational(1), Rational(1, 2)};
  CHECK(lip_constant(M, f) == 1);
  FreeVector m = molecule(M, 1, 2);
  CHECK(pairing(m, f) == (f.values[1] - f.values[2]) / M.dist(1, 2));
}

TEST_CASE("lip constant basics") {
  auto M = equilateral();
  LipWitness zero;
  zero.values.assign(3, Rational(0));
  CHECK(lip_constant(M, zero) == 0);
  LipWitness dist_to_base;
  dist_to_base.values = {Rational(0), Rational(1), Rational(1)};
  CHECK(lip_constant(M, dist_to_base) == 1);
  LipWitness missing;
  missing.values = {Rational(0)};
  CHECK_THROWS_AS(lip_constant(M, missing), MissingValue);
}

TEST_CASE("base coefficient never changes the norm") {
  Rng rng(555);
  for (int rep = 0; rep < 10; ++rep) {
    auto M = testutil::random_space(rng, 4);
    FreeVector v = testutil::random_vector(rng, M, 2);
    FreeVector shifted = v;
    shifted.set(M.base(), v.coeff(M.base()) + Rational(5, 3));
    CHECK(kr_norm(M, v).norm == kr_norm(M, shifted).norm);
  }
}
