#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dentlab/constructions.hpp"
#include "helpers.hpp"

using namespace dentlab;

namespace {

TopBottomSpace make_m0() {
  auto sp = PointedMetricSpace::create_validated(
      {"0", "1"}, 0, {Rational(0), Rational(1), Rational(1), Rational(0)});
  return TopBottomSpace(std::move(sp), 1);
}

std::uint64_t diamond_count_recurrence(int n, int b) {
  // count vertices by replaying the edge replacement
  std::uint64_t v = static_cast<std::uint64_t>(b) + 2;
  for (int m = 2; m <= n; ++m) v = b + 2 + 2ull * b * (v - 2);
  return v;
}

}  // namespace

TEST_CASE("diamond level 1 is the complete bipartite lozenge") {
  for (int b : {1, 2, 3, 4}) {
    auto build = diamond_build({1, b});
    const auto& D = build.space;
    CHECK(D.space.size() == b + 2);
    CHECK(D.endpoint_distance() == 2);
    for (std::size_t i = 0; i < build.middles.size(); ++i) {
      CHECK(D.space.dist(D.top, build.middles[i]) == 1);
      CHECK(D.space.dist(D.bottom(), build.middles[i]) == 1);
      for (std::size_t j = i + 1; j < build.middles.size(); ++j)
        CHECK(D.space.dist(build.middles[i], build.middles[j]) == 2);
    }
  }
}

TEST_CASE("diamond endpoints sit 2^n apart and the metric is valid") {
  for (int n : {1, 2, 3})
    for (int b : {1, 2, 3, 4}) {
      auto D = diamond({n, b});
      CHECK(D.endpoint_distance() == pow2(n));
      CHECK(static_cast<std::uint64_t>(D.space.size()) == diamond_count_recurrence(n, b));
      CHECK(PointedMetricSpace::validate(D.space.matrix(), D.space.size()).empty());
      auto [sep, diam] = D.space.separation_and_diameter();
      CHECK(sep == 1);  // unit edges survive every replacement level
      CHECK(diam == pow2(n));
      // diameter-normalized copy is 2^(1-n) * (1/2) separated
      auto scaled = D.space.rescaled(Rational(1) / pow2(n));
      auto [s2, d2] = scaled.separation_and_diameter();
      CHECK(s2 == pow2(1 - n) * Rational(1, 2));
      CHECK(d2 == 1);
    }
}

TEST_CASE("diamond middles at level n are halfway between the endpoints") {
  auto build = diamond_build({2, 3});
  for (int x : build.middles) {
    CHECK(build.space.space.dist(build.space.top, x) == 2);
    CHECK(build.space.space.dist(build.space.bottom(), x) == 2);
  }
}

TEST_CASE("diamond edge copies embed the previous level isometrically") {
  auto build = diamond_build({2, 2});
  const auto& inner = build.inner->space.space;
  for (const auto& maps : {build.plus_maps, build.minus_maps})
    for (const auto& map : maps)
      for (int x = 0; x < inner.size(); ++x)
        for (int y = 0; y < inner.size(); ++y)
          CHECK(inner.dist(x, y) == build.space.space.dist(map[x], map[y]));
}

TEST_CASE("diamond respects the point cap") {
  CHECK_THROWS_AS(diamond({9, 2}, 5000), SizeLimitExceeded);
  try {
    diamond({9, 2}, 5000);
  } catch (const SizeLimitExceeded& e) {
    CHECK(e.requested == diamond_count_recurrence(9, 2));
    CHECK(e.cap == 5000);
  }
}

TEST_CASE("chain of zero copies is a rescale") {
  auto M0 = make_m0();
  auto C = chain(M0, 0, Rational(1));
  CHECK(C.space.same_as(M0.space));
  auto C2 = chain(M0, 0, Rational(1, 2));
  CHECK(C2.space.dist(0, 1) == Rational(1, 2));
}

TEST_CASE("chain of two halved copies is the three point path") {
  auto M1 = chain(make_m0(), 1, Rational(1, 2));
  CHECK(M1.space.size() == 3);
  CHECK(M1.endpoint_distance() == 1);
  int middle = 3 - M1.bottom() - M1.top;
  CHECK(M1.space.dist(M1.bottom(), middle) == Rational(1, 2));
  CHECK(M1.space.dist(middle, M1.top) == Rational(1, 2));
}

TEST_CASE("chain endpoint distance telescopes") {
  testutil::Rng rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    auto M = testutil::random_space(rng, 3);
    int top = -1;
    for (int i = 0; i < 3; ++i)
      if (i != M.base()) top = i;
    TopBottomSpace TB(M, top);
    for (int l : {1, 2, 3}) {
      Rational s = rng.positive_dyadic(2);
      auto C = chain(TB, l, s);
      CHECK(C.endpoint_distance() == pow2(l) * s * TB.endpoint_distance());
      CHECK(PointedMetricSpace::validate(C.space.matrix(), C.space.size()).empty());
    }
  }
}

TEST_CASE("chain of a chain adds the exponents") {
  auto M0 = make_m0();
  auto inner = chain(M0, 1, Rational(1, 2));
  auto nested = chain(inner, 2, Rational(1, 4));
  auto flat = chain(M0, 3, Rational(1, 8));
  CHECK(nested.endpoint_distance() == flat.endpoint_distance());
  CHECK(nested.space.size() == flat.space.size());
}

TEST_CASE("chain embedding maps are isometric copies") {
  auto M0 = make_m0();
  auto path = chain(M0, 2, Rational(1, 4));  // 5 points on [0,1]
  auto cr = chain_with_embedding(path, 1, Rational(1, 2));
  const auto& W = cr.space.space;
  for (const auto& map : cr.copy_maps)
    for (int x = 0; x < path.space.size(); ++x)
      for (int y = 0; y < path.space.size(); ++y)
        CHECK(W.dist(map[x], map[y]) == Rational(1, 2) * path.space.dist(x, y));
  CHECK(cr.junctions.front() == cr.space.bottom());
  CHECK(cr.junctions.back() == cr.space.top);
}

TEST_CASE("subspace of a chain onto one link is the rescaled copy") {
  auto M0 = make_m0();
  auto cr = chain_with_embedding(M0, 2, Rational(1, 4));
  const auto& map = cr.copy_maps[1];
  auto link = cr.space.space.subspace({map[0], map[1]}, map[0]);
  auto expected = M0.space.rescaled(Rational(1, 4));
  CHECK(link.dist(0, 1) == expected.dist(0, 1));
}

TEST_CASE("l1 sum identifies the basepoints") {
  auto m0 = make_m0().space;
  SUBCASE("single summand unchanged") { CHECK(l1_sum({m0}).same_as(m0)); }
  SUBCASE("two copies") {
    auto S = l1_sum({m0, m0});
    CHECK(S.size() == 3);
    int a = S.index_of("s1/1"), b = S.index_of("s2/1");
    REQUIRE(a >= 0);
    REQUIRE(b >= 0);
    CHECK(S.dist(a, b) == 2);
    CHECK(S.dist(S.base(), a) == 1);
  }
  SUBCASE("separation is the min over summands and cross sums") {
    testutil::Rng rng(11);
    auto A = testutil::random_space(rng, 3);
    auto B = testutil::random_space(rng, 3);
    auto S = l1_sum({A, B});
    CHECK(PointedMetricSpace::validate(S.matrix(), S.size()).empty());
    Rational expect(-1);
    auto upd = [&](const Rational& r) {
      if (expect < 0 || r < expect) expect = r;
    };
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        upd(A.dist(i, j));
        upd(B.dist(i, j));
      }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != A.base() && j != B.base()) upd(A.dist(i, A.base()) + B.dist(j, B.base()));
    CHECK(S.separation_and_diameter().first == expect);
  }
}

TEST_CASE("trim keeps exactly the wide middle of a chain") {
  auto M0 = make_m0();
  auto cr = chain_with_embedding(M0, 5, pow2(-5));
  auto tr = trim_P_with_map(cr.space, 2);
  const std::uint64_t c_lo = (1 << 3) + 1, c_hi = (1 << 5) - (1 << 3);
  for (std::uint64_t j = 0; j <= 32; ++j) {
    bool survives = (j >= c_lo - 1 && j <= c_hi) || j == 0 || j == 32;
    CHECK((tr.old_to_new[cr.junctions[j]] >= 0) == survives);
  }
  CHECK(static_cast<std::uint64_t>(tr.space.space.size()) == (c_hi - c_lo + 2) + 2);
  // nearest survivor to the top sits at the margin
  Rational margin = pow2(-2);
  Rational best(-1);
  for (int p = 0; p < tr.space.space.size(); ++p) {
    if (p == tr.space.top) continue;
    const Rational& d = tr.space.space.dist(p, tr.space.top);
    if (best < 0 || d < best) best = d;
  }
  CHECK(best == margin);
}

TEST_CASE("trim that clears nothing is the identity on points") {
  auto M0 = make_m0();
  auto cr = chain_with_embedding(M0, 2, pow2(-2));  // points at quarters
  auto tr = trim_P_with_map(cr.space, 3);           // margin 1/8 below the spacing
  CHECK(tr.space.space.size() == cr.space.space.size());
}

TEST_CASE("trim with no interior survivor throws") {
  CHECK_THROWS_AS(trim_P(make_m0(), 2), EmptyInterior);
}

TEST_CASE("glue of one piece is that piece") {
  auto M0 = make_m0();
  auto piece = chain(M0, 1, Rational(1, 2));
  CHECK(glue_top_bottom({piece}).space.same_as(piece.space));
}

TEST_CASE("glue routes cross distances through the nearer endpoint") {
  auto M0 = make_m0();
  auto p1 = chain(M0, 2, Rational(1, 4));
  auto p2 = chain(M0, 3, Rational(1, 8));
  auto glued = glue_top_bottom({p1, p2});
  const auto& G = glued.space;
  CHECK(PointedMetricSpace::validate(G.matrix(), G.size()).empty());
  CHECK(glue_top_bottom({p1, p2}).endpoint_distance() == 1);
  int x = G.index_of("p1/j1");  // at 1/4 from the bottom
  int y = G.index_of("p2/j1");  // at 1/8 from the bottom
  REQUIRE(x >= 0);
  REQUIRE(y >= 0);
  CHECK(G.dist(x, y) == Rational(1, 4) + Rational(1, 8));
  int xt = G.index_of("p1/j3");  // at 1/4 from the top
  int yt = G.index_of("p2/j7");  // at 1/8 from the top
  REQUIRE(xt >= 0);
  REQUIRE(yt >= 0);
  CHECK(G.dist(xt, yt) == Rational(1, 4) + Rational(1, 8));
  auto stretched = chain(M0, 1, Rational(1));  // endpoints at distance 2
  CHECK_THROWS_AS(glue_top_bottom({p1, stretched}), MismatchedEndpointDistance);
}

TEST_CASE("m_alpha at zero is the two point space") {
  MAlphaSpec spec;
  spec.alpha = Ordinal();
  auto b = m_alpha(spec);
  CHECK(b->space.space.size() == 2);
  CHECK(b->mu == 1);
  CHECK(b->space.endpoint_distance() == 1);
}

TEST_CASE("m_alpha at finite n is the dyadic path") {
  MAlphaSpec spec;
  spec.alpha = Ordinal::finite(3);
  auto b = m_alpha(spec);
  CHECK(b->mu == 1);
  CHECK(b->space.space.size() == 9);  // 2^3 + 1 equispaced points
  CHECK(b->space.endpoint_distance() == 1);
  auto [sep, diam] = b->space.space.separation_and_diameter();
  CHECK(sep == Rational(1, 8));
  CHECK(diam == 1);
  CHECK(PointedMetricSpace::validate(b->space.space.matrix(), 9).empty());
}

TEST_CASE("m_alpha at omega glues trimmed chains and keeps mu above 1/2") {
  MAlphaSpec spec;
  spec.alpha = Ordinal::omega();
  spec.truncation = 3;
  auto b = m_alpha(spec);
  CHECK(b->limit_k == 2);  // canonical minimal eps = 1/2
  CHECK(b->mu == Rational(1, 2));
  CHECK(b->space.endpoint_distance() == 1);
  auto [sep, diam] = b->space.space.separation_and_diameter();
  CHECK(diam == 1);
  REQUIRE(b->pieces.size() == 3);
  for (std::size_t n = 0; n < 3; ++n) {
    const auto& piece = b->pieces[n];
    CHECK(piece.k_n == 2 * 2 + n + 1);
    const auto& sp = b->space.space;
    CHECK(sp.dist(b->space.top, piece.u) == Rational(1, 4));
    CHECK(sp.dist(b->space.bottom(), piece.v) == Rational(1, 4));
    CHECK(sp.dist(piece.u, piece.v) == Rational(1, 2));
    // surviving copies embed isometrically at scale 2^-k_n
    const auto& gsp = piece.gamma_build->space.space;
    const Rational s = pow2(-(long)piece.k_n);
    for (const auto& map : piece.copy_maps)
      for (int x = 0; x < gsp.size(); ++x)
        for (int y = 0; y < gsp.size(); ++y)
          CHECK(sp.dist(map[x], map[y]) == s * gsp.dist(x, y));
  }
  CHECK(PointedMetricSpace::validate(b->space.space.matrix(), b->space.space.size()).empty());
}

TEST_CASE("m_alpha successor steps ride on the limit stage") {
  MAlphaSpec spec;
  spec.alpha = Ordinal::omega() + Ordinal::finite(2);
  auto b = m_alpha(spec);
  CHECK(b->finite_part == 2);
  REQUIRE(b->core);
  CHECK(b->core->alpha == Ordinal::omega());
  CHECK(b->mu == b->core->mu);
  CHECK(b->space.endpoint_distance() == 1);
  CHECK(b->chain_copy_maps.size() == 4);
  auto [sep, diam] = b->space.space.separation_and_diameter();
  CHECK(diam == 1);
}

TEST_CASE("m_alpha honors explicit eps schedules and rejects bad ones") {
  MAlphaSpec spec;
  spec.alpha = Ordinal::omega();
  spec.eps_k_by_limit["w*1"] = 3;  // eps = 1/4
  auto b = m_alpha(spec);
  CHECK(b->mu == Rational(3, 4));
  CHECK(b->pieces[0].k_n == 7);

  MAlphaSpec bad;
  bad.alpha = Ordinal::omega();
  bad.eps_k_by_limit["w*1"] = 1;  // eps = 1 kills the slack product
  CHECK_THROWS_AS(m_alpha(bad), DentlabError);

  MAlphaSpec unknown;
  unknown.alpha = Ordinal::omega();
  unknown.eps_k_by_limit["w*2"] = 3;  // names a limit the build never touches
  CHECK_THROWS_AS(m_alpha(unknown), DentlabError);
}

TEST_CASE("m_alpha point counts are predicted and capped") {
  for (const char* a : {"3", "w*1", "w*1+2"}) {
    MAlphaSpec spec;
    spec.alpha = Ordinal::parse(a);
    auto predicted = m_alpha_point_count(spec);
    auto b = m_alpha(spec);
    CHECK(static_cast<std::uint64_t>(b->space.space.size()) <= predicted);
  }
  MAlphaSpec big;
  big.alpha = Ordinal::parse("w*2");
  CHECK_THROWS_AS(m_alpha(big), SizeLimitExceeded);
}

TEST_CASE("grid rounding stays within a half in sup norm") {
  testutil::Rng rng(20250810);
  for (int rep = 0; rep < 200; ++rep) {
    std::size_t dim = 1 + rng.below(8);
    std::vector<Rational> z;
    for (std::size_t i = 0; i < dim; ++i) z.push_back(rng.signed_dyadic(4));
    auto g = grid_round(z);
    for (std::size_t i = 0; i < dim; ++i) {
      Rational diff = z[i] - Rational(g[i], 1);
      CHECK(abs(diff) <= Rational(1, 2));
    }
  }
}

TEST_CASE("grid rounding breaks ties toward even") {
  std::vector<Rational> z = {Rational(1, 2), Rational(3, 2), Rational(-1, 2), Rational(-3, 2),
                             Rational(5, 2)};
  auto g = grid_round(z);
  CHECK(g[0] == 0);
  CHECK(g[1] == 2);
  CHECK(g[2] == 0);
  CHECK(g[3] == -2);
  CHECK(g[4] == 2);
}

TEST_CASE("rounding shifts pairwise sup distances by at most one") {
  testutil::Rng rng(999);
  for (int rep = 0; rep < 100; ++rep) {
    std::size_t dim = 1 + rng.below(8);
    std::vector<Rational> z, w;
    for (std::size_t i = 0; i < dim; ++i) {
      z.push_back(rng.signed_dyadic(4));
      w.push_back(rng.signed_dyadic(4));
    }
    auto gz = grid_round(z), gw = grid_round(w);
    Rational before(0), after(0);
    for (std::size_t i = 0; i < dim; ++i) {
      Rational dz = abs(Rational(z[i] - w[i]));
      Rational dg(abs(BigInt(gz[i] - gw[i])), 1);
      if (dz > before) before = dz;
      if (dg > after) after = dg;
    }
    CHECK(after >= before - 1);
    CHECK(after <= before + 1);
  }
}

TEST_CASE("distortion of the identity is one") {
  testutil::Rng rng(3);
  auto M = testutil::random_space(rng, 4);
  std::vector<int> id = {0, 1, 2, 3};
  auto [lo, hi] = distortion_of_map(M, id, M);
  CHECK(lo == 1);
  CHECK(hi == 1);
  auto S = M.rescaled(Rational(3, 2));
  auto [lo2, hi2] = distortion_of_map(M, id, S);
  CHECK(lo2 == Rational(3, 2));
  CHECK(hi2 == Rational(3, 2));
}

TEST_CASE("distortion reports zero lower bound for collapsed maps") {
  auto m0 = make_m0().space;
  std::vector<int> collapse = {0, 0};
  auto [lo, hi] = distortion_of_map(m0, collapse, m0);
  CHECK(lo == 0);
  CHECK(hi == 0);
}
