#include "dentlab/constructions.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <set>

namespace dentlab {

namespace {

std::uint64_t diamond_point_count(int level, int b) {
  std::uint64_t v = static_cast<std::uint64_t>(b) + 2;
  for (int m = 2; m <= level; ++m) v = static_cast<std::uint64_t>(b) + 2 + 2ull * b * (v - 2);
  return v;
}

}  // namespace

DiamondBuild diamond_build(const DiamondSpec& spec, std::size_t cap) {
  if (spec.level < 1) throw DentlabError("diamond level must be >= 1");
  if (spec.branching < 1) throw DentlabError("diamond branching must be >= 1");
  const int b = spec.branching;
  {
    std::uint64_t v = diamond_point_count(spec.level, b);
    if (v > cap) throw SizeLimitExceeded(v, cap);
  }

  std::shared_ptr<DiamondBuild> prev;
  for (int m = 1; m <= spec.level; ++m) {
    WeightedGraph g;
    g.labels = {"t", "b"};
    std::vector<int> middles;
    for (int i = 0; i < b; ++i) {
      middles.push_back(static_cast<int>(g.labels.size()));
      g.labels.push_back("x" + std::to_string(i));
    }
    std::vector<std::vector<int>> plus_maps, minus_maps;
    if (m == 1) {
      for (int i = 0; i < b; ++i) {
        g.edges.push_back({0, middles[i], Rational(1)});
        g.edges.push_back({1, middles[i], Rational(1)});
      }
    } else {
      const WeightedGraph& inner = prev->graph;
      auto splice = [&](int gate_top, int gate_bottom, const std::string& prefix) {
        std::vector<int> map(inner.labels.size(), -1);
        map[0] = gate_top;    // inner t
        map[1] = gate_bottom; // inner b
        for (std::size_t v = 2; v < inner.labels.size(); ++v) {
          map[v] = static_cast<int>(g.labels.size());
          g.labels.push_back(prefix + inner.labels[v]);
        }
        for (const auto& e : inner.edges) g.edges.push_back({map[e.u], map[e.v], e.weight});
        return map;
      };
      for (int i = 0; i < b; ++i)
        plus_maps.push_back(splice(0, middles[i], "e" + std::to_string(i) + "+/"));
      for (int i = 0; i < b; ++i)
        minus_maps.push_back(splice(middles[i], 1, "e" + std::to_string(i) + "-/"));
    }
    auto node = std::make_shared<DiamondBuild>(DiamondBuild{
        TopBottomSpace(shortest_path_metric(g, 1), 0), std::move(middles),
        std::move(plus_maps), std::move(minus_maps), prev, std::move(g)});
    prev = std::move(node);
  }
  assert(prev->space.endpoint_distance() == pow2(spec.level));
  return std::move(*prev);
}

TopBottomSpace diamond(const DiamondSpec& spec, std::size_t cap) {
  return diamond_build(spec, cap).space;
}

ChainResult chain_with_embedding(const TopBottomSpace& M, int l, const Rational& s,
                                 std::size_t cap) {
  if (l < 0) throw DentlabError("chain exponent must be >= 0");
  if (l > 40) throw SizeLimitExceeded(std::numeric_limits<std::uint64_t>::max(), cap);
  if (s <= 0) throw DentlabError("chain scale must be positive");
  if (l == 0) {
    ChainResult out{TopBottomSpace(M.space.rescaled(s), M.top), {}, {}};
    std::vector<int> id(M.space.size());
    for (int i = 0; i < M.space.size(); ++i) id[i] = i;
    out.copy_maps.push_back(std::move(id));
    out.junctions = {M.bottom(), M.top};
    return out;
  }
  const int S = M.space.size();
  const std::uint64_t copies = 1ull << l;
  const std::uint64_t total = copies * static_cast<std::uint64_t>(S - 1) + 1;
  if (total > cap) throw SizeLimitExceeded(total, cap);

  const int t = M.top, bot = M.bottom();
  std::vector<int> interior;  // inner indices that are not endpoints
  for (int p = 0; p < S; ++p)
    if (p != t && p != bot) interior.push_back(p);

  std::vector<std::string> labels;
  std::vector<int> junctions(copies + 1, -1);
  std::vector<std::vector<int>> copy_maps(copies, std::vector<int>(S, -1));
  // point c: (copy, inner point) of its canonical owner copy
  std::vector<std::pair<int, int>> owner;
  auto push = [&](std::string label, int copy, int inner) {
    labels.push_back(std::move(label));
    owner.push_back({copy, inner});
    return static_cast<int>(labels.size() - 1);
  };
  junctions[0] = push("j0", 1, bot);
  for (std::uint64_t c = 1; c <= copies; ++c) {
    std::string prefix = "c" + std::to_string(c) + "/";
    for (int p : interior)
      copy_maps[c - 1][p] = push(prefix + M.space.label(p), static_cast<int>(c), p);
    junctions[c] = push("j" + std::to_string(c), static_cast<int>(c), t);
    copy_maps[c - 1][t] = junctions[c];
    copy_maps[c - 1][bot] = junctions[c - 1];
  }

  const Rational D = M.endpoint_distance();
  const std::size_t n = labels.size();
  std::vector<Rational> dist(n * n, Rational(0));
  for (std::size_t a = 0; a < n; ++a) {
    auto [ca, pa] = owner[a];
    for (std::size_t bb = a + 1; bb < n; ++bb) {
      auto [cb, pb] = owner[bb];
      Rational d;
      if (ca == cb) {
        d = s * M.space.dist(pa, pb);
      } else {
        int lo_c = ca, lo_p = pa, hi_c = cb, hi_p = pb;
        if (lo_c > hi_c) {
          std::swap(lo_c, hi_c);
          std::swap(lo_p, hi_p);
        }
        d = s * (M.space.dist(lo_p, t) + Rational(hi_c - lo_c - 1) * D + M.space.dist(bot, hi_p));
      }
      dist[a * n + bb] = d;
      dist[bb * n + a] = d;
    }
  }
  PointedMetricSpace space =
      PointedMetricSpace::create(std::move(labels), junctions[0], std::move(dist));
  return ChainResult{TopBottomSpace(std::move(space), junctions[copies]), std::move(copy_maps),
                     std::move(junctions)};
}

TopBottomSpace chain(const TopBottomSpace& M, int l, const Rational& s, std::size_t cap) {
  return chain_with_embedding(M, l, s, cap).space;
}

PointedMetricSpace l1_sum(const std::vector<PointedMetricSpace>& spaces) {
  if (spaces.empty()) throw DentlabError("l1_sum needs at least one space");
  if (spaces.size() == 1) return spaces[0];
  std::vector<std::string> labels = {"0"};
  std::vector<std::pair<int, int>> owner = {{-1, -1}};  // (summand, inner point)
  for (std::size_t m = 0; m < spaces.size(); ++m) {
    std::string prefix = "s" + std::to_string(m + 1) + "/";
    for (int p = 0; p < spaces[m].size(); ++p) {
      if (p == spaces[m].base()) continue;
      labels.push_back(prefix + spaces[m].label(p));
      owner.push_back({static_cast<int>(m), p});
    }
  }
  const std::size_t n = labels.size();
  std::vector<Rational> dist(n * n, Rational(0));
  auto to_base = [&](std::size_t a) {
    auto [m, p] = owner[a];
    return spaces[m].dist(p, spaces[m].base());
  };
  for (std::size_t a = 1; a < n; ++a) {
    dist[a] = dist[a * n] = to_base(a);
    for (std::size_t b = a + 1; b < n; ++b) {
      auto [ma, pa] = owner[a];
      auto [mb, pb] = owner[b];
      Rational d = (ma == mb) ? spaces[ma].dist(pa, pb) : to_base(a) + to_base(b);
      dist[a * n + b] = d;
      dist[b * n + a] = d;
    }
  }
  return PointedMetricSpace::create(std::move(labels), 0, std::move(dist));
}

TrimResult trim_P_with_map(const TopBottomSpace& M, int margin_k) {
  if (margin_k < 2) throw DentlabError("trim margin must be below 1/2 (need k >= 2)");
  auto [sep, diam] = M.space.separation_and_diameter();
  if (diam != 1 || M.endpoint_distance() != 1)
    throw DentlabError("trim expects a diameter-1 space with endpoints at distance 1");
  const Rational margin = pow2(-margin_k);
  const int t = M.top, b = M.bottom();
  std::vector<int> keep;
  for (int p = 0; p < M.space.size(); ++p) {
    if (p == t || p == b) {
      keep.push_back(p);
      continue;
    }
    if (M.space.dist(p, t) >= margin && M.space.dist(p, b) >= margin) keep.push_back(p);
  }
  if (keep.size() <= 2) throw EmptyInterior();
  std::vector<int> old_to_new(M.space.size(), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) old_to_new[keep[i]] = static_cast<int>(i);
  PointedMetricSpace sub = M.space.subspace(keep, b);
  return TrimResult{TopBottomSpace(std::move(sub), old_to_new[t]), std::move(old_to_new)};
}

TopBottomSpace trim_P(const TopBottomSpace& M, int margin_k) {
  return trim_P_with_map(M, margin_k).space;
}

GlueResult glue_top_bottom_with_maps(const std::vector<TopBottomSpace>& pieces) {
  if (pieces.empty()) throw DentlabError("glue needs at least one piece");
  if (pieces.size() == 1) {
    GlueResult out{pieces[0], {}};
    std::vector<int> id(pieces[0].space.size());
    for (int i = 0; i < pieces[0].space.size(); ++i) id[i] = i;
    out.piece_maps.push_back(std::move(id));
    return out;
  }
  const Rational D = pieces[0].endpoint_distance();
  for (const auto& p : pieces)
    if (p.endpoint_distance() != D) throw MismatchedEndpointDistance();

  std::vector<std::string> labels = {"b", "t"};
  std::vector<std::pair<int, int>> owner = {{-1, -1}, {-1, -1}};
  std::vector<std::vector<int>> piece_maps;
  for (std::size_t m = 0; m < pieces.size(); ++m) {
    const auto& pc = pieces[m];
    std::vector<int> map(pc.space.size(), -1);
    map[pc.bottom()] = 0;
    map[pc.top] = 1;
    std::string prefix = "p" + std::to_string(m + 1) + "/";
    for (int p = 0; p < pc.space.size(); ++p) {
      if (p == pc.top || p == pc.bottom()) continue;
      map[p] = static_cast<int>(labels.size());
      labels.push_back(prefix + pc.space.label(p));
      owner.push_back({static_cast<int>(m), p});
    }
    piece_maps.push_back(std::move(map));
  }
  const std::size_t n = labels.size();
  std::vector<Rational> dist(n * n, Rational(0));
  auto set = [&](std::size_t a, std::size_t b, const Rational& d) {
    dist[a * n + b] = d;
    dist[b * n + a] = d;
  };
  set(0, 1, D);
  for (std::size_t a = 2; a < n; ++a) {
    auto [ma, pa] = owner[a];
    set(a, 0, pieces[ma].space.dist(pa, pieces[ma].bottom()));
    set(a, 1, pieces[ma].space.dist(pa, pieces[ma].top));
    for (std::size_t b = a + 1; b < n; ++b) {
      auto [mb, pb] = owner[b];
      if (ma == mb) {
        set(a, b, pieces[ma].space.dist(pa, pb));
      } else {
        Rational via_b = pieces[ma].space.dist(pa, pieces[ma].bottom()) +
                         pieces[mb].space.dist(pieces[mb].bottom(), pb);
        Rational via_t = pieces[ma].space.dist(pa, pieces[ma].top) +
                         pieces[mb].space.dist(pieces[mb].top, pb);
        set(a, b, std::min(via_b, via_t));
      }
    }
  }
  PointedMetricSpace space = PointedMetricSpace::create(std::move(labels), 0, std::move(dist));
  return GlueResult{TopBottomSpace(std::move(space), 1), std::move(piece_maps)};
}

TopBottomSpace glue_top_bottom(const std::vector<TopBottomSpace>& pieces) {
  return glue_top_bottom_with_maps(pieces).space;
}

// ---------------------------------------------------------------------------
// M_alpha

namespace {

struct OrdinalLess {
  bool operator()(const Ordinal& a, const Ordinal& b) const { return Ordinal::compare(a, b) < 0; }
};

void collect_limits(const Ordinal& alpha, std::uint64_t pieces,
                    std::set<Ordinal, OrdinalLess>& out) {
  auto [lambda, fin] = alpha.split_finite();
  if (lambda.is_zero()) return;
  if (out.count(lambda)) return;
  out.insert(lambda);
  for (const auto& [gamma, kn] : limit_schedule(lambda, 0, pieces))
    collect_limits(gamma, pieces, out);
}

struct ResolvedSchedule {
  std::map<Ordinal, std::uint64_t, OrdinalLess> k_by_limit;
  Rational slack_product;
};

ResolvedSchedule resolve_schedule(const MAlphaSpec& spec) {
  std::set<Ordinal, OrdinalLess> limits;
  collect_limits(spec.alpha, spec.truncation, limits);

  ResolvedSchedule rs;
  rs.slack_product = 1;
  std::map<std::string, std::uint64_t> user = spec.eps_k_by_limit;
  std::uint64_t uniform_k = 2;
  {
    // smallest uniform k with (1 - 2^(1-k))^L >= 1/2
    const std::uint64_t L = limits.size();
    for (;; ++uniform_k) {
      Rational prod = 1;
      for (std::uint64_t i = 0; i < L; ++i) prod *= (Rational(1) - pow2(1 - (long)uniform_k));
      if (prod >= Rational(1, 2)) break;
      if (uniform_k > 62) throw DentlabError("cannot satisfy slack product");
    }
  }
  for (const auto& gamma : limits) {
    std::uint64_t k = uniform_k;
    auto it = user.find(gamma.to_string());
    if (it != user.end()) {
      k = it->second;
      user.erase(it);
    }
    if (k < 2) throw DentlabError("eps at " + gamma.to_string() + " must be at most 1/2 (k >= 2)");
    rs.k_by_limit[gamma] = k;
    rs.slack_product *= (Rational(1) - pow2(1 - (long)k));
  }
  if (!user.empty())
    throw DentlabError("eps schedule names unused limit ordinal '" + user.begin()->first + "'");
  if (rs.slack_product < Rational(1, 2))
    throw DentlabError("slack product " + rat_to_string(rs.slack_product) + " is below 1/2");
  return rs;
}

class MAlphaBuilder {
 public:
  MAlphaBuilder(const MAlphaSpec& spec, ResolvedSchedule rs)
      : spec_(spec), rs_(std::move(rs)) {}

  std::shared_ptr<MAlphaBuild> build(const Ordinal& alpha) {
    std::string key = alpha.to_string();
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    auto [lambda, fin] = alpha.split_finite();
    std::shared_ptr<MAlphaBuild> node;
    if (fin == 0 && lambda.is_zero()) {
      node = make_m0();
    } else if (fin == 0) {
      node = build_limit(lambda);
    } else {
      std::shared_ptr<MAlphaBuild> core =
          lambda.is_zero() ? make_m0() : build(lambda);
      auto cr = chain_with_embedding(core->space, static_cast<int>(fin), pow2(-(long)fin),
                                     spec_.cap);
      node = std::make_shared<MAlphaBuild>(MAlphaBuild{
          alpha, core->mu, std::move(cr.space), fin, core, std::move(cr.copy_maps),
          std::move(cr.junctions), 0, {}});
    }
    cache_[key] = node;
    return node;
  }

 private:
  std::shared_ptr<MAlphaBuild> make_m0() {
    PointedMetricSpace m0 = PointedMetricSpace::create(
        {"0", "1"}, 0, {Rational(0), Rational(1), Rational(1), Rational(0)});
    return std::make_shared<MAlphaBuild>(MAlphaBuild{
        Ordinal(), Rational(1), TopBottomSpace(std::move(m0), 1), 0, nullptr, {}, {}, 0, {}});
  }

  std::shared_ptr<MAlphaBuild> build_limit(const Ordinal& lambda) {
    const std::uint64_t k = rs_.k_by_limit.at(lambda);
    auto schedule = limit_schedule(lambda, k, spec_.truncation);

    std::vector<MAlphaBuild::Piece> pieces;
    std::vector<TopBottomSpace> trimmed;
    std::vector<TrimResult> trims;
    std::vector<ChainResult> chains;
    for (const auto& [gamma, kn] : schedule) {
      auto gb = build(gamma);
      auto cr = chain_with_embedding(gb->space, static_cast<int>(kn), pow2(-(long)kn), spec_.cap);
      auto tr = trim_P_with_map(cr.space, static_cast<int>(k));
      MAlphaBuild::Piece piece;
      piece.gamma = gamma;
      piece.k_n = kn;
      piece.gamma_build = gb;
      pieces.push_back(std::move(piece));
      chains.push_back(std::move(cr));
      trimmed.push_back(trims.emplace_back(std::move(tr)).space);
    }
    auto glued = glue_top_bottom_with_maps(trimmed);

    for (std::size_t n = 0; n < pieces.size(); ++n) {
      const std::uint64_t kn = pieces[n].k_n;
      const std::uint64_t c_lo = (1ull << (kn - k)) + 1;
      const std::uint64_t c_hi = (1ull << kn) - (1ull << (kn - k));
      auto lift = [&](int chain_idx) {
        int t = trims[n].old_to_new[chain_idx];
        if (t < 0) throw DentlabError("internal: expected survivor was trimmed");
        return glued.piece_maps[n][t];
      };
      for (std::uint64_t c = c_lo; c <= c_hi; ++c) {
        std::vector<int> map(chains[n].copy_maps[c - 1].size());
        for (std::size_t p = 0; p < map.size(); ++p) map[p] = lift(chains[n].copy_maps[c - 1][p]);
        pieces[n].copy_maps.push_back(std::move(map));
      }
      for (std::uint64_t j = c_lo - 1; j <= c_hi; ++j)
        pieces[n].junctions.push_back(lift(chains[n].junctions[j]));
      pieces[n].v = pieces[n].junctions.front();
      pieces[n].u = pieces[n].junctions.back();

      const auto& sp = glued.space.space;
      const Rational margin = pow2(-(long)k);
      if (sp.dist(glued.space.top, pieces[n].u) != margin ||
          sp.dist(sp.base(), pieces[n].v) != margin ||
          sp.dist(pieces[n].u, pieces[n].v) != Rational(1) - 2 * margin)
        throw DentlabError("internal: trimmed span endpoints are misplaced");
    }

    Rational mu = (Rational(1) - pow2(1 - (long)k)) * pieces.back().gamma_build->mu;
    return std::make_shared<MAlphaBuild>(MAlphaBuild{
        lambda, std::move(mu), std::move(glued.space), 0, nullptr, {}, {}, k,
        std::move(pieces)});
  }

  const MAlphaSpec& spec_;
  ResolvedSchedule rs_;
  std::map<std::string, std::shared_ptr<MAlphaBuild>> cache_;
};

std::uint64_t count_points(const Ordinal& alpha, const ResolvedSchedule& rs,
                           std::uint64_t pieces_n, std::uint64_t& max_intermediate) {
  auto [lambda, fin] = alpha.split_finite();
  if (fin > 40) throw SizeLimitExceeded(std::numeric_limits<std::uint64_t>::max(), 0);
  std::uint64_t core;
  if (lambda.is_zero()) {
    core = 2;
  } else {
    const std::uint64_t k = rs.k_by_limit.at(lambda);
    std::uint64_t total = 2;
    for (const auto& [gamma, kn] : limit_schedule(lambda, k, pieces_n)) {
      if (kn > 40) throw SizeLimitExceeded(std::numeric_limits<std::uint64_t>::max(), 0);
      std::uint64_t s_gamma = count_points(gamma, rs, pieces_n, max_intermediate);
      std::uint64_t untrimmed = (1ull << kn) * (s_gamma - 1) + 1;
      max_intermediate = std::max(max_intermediate, untrimmed);
      std::uint64_t span = (1ull << kn) - (1ull << (kn - k + 1));
      total += span * (s_gamma - 1) + 1;
    }
    core = total;
  }
  std::uint64_t out = fin == 0 ? core : (1ull << fin) * (core - 1) + 1;
  max_intermediate = std::max(max_intermediate, out);
  return out;
}

}  // namespace

std::uint64_t m_alpha_point_count(const MAlphaSpec& spec) {
  ResolvedSchedule rs = resolve_schedule(spec);
  std::uint64_t max_intermediate = 0;
  count_points(spec.alpha, rs, spec.truncation, max_intermediate);
  return max_intermediate;
}

std::shared_ptr<MAlphaBuild> m_alpha(const MAlphaSpec& spec) {
  if (spec.truncation < 1) throw DentlabError("truncation must be at least 1");
  ResolvedSchedule rs = resolve_schedule(spec);
  {
    std::uint64_t max_intermediate = 0;
    count_points(spec.alpha, rs, spec.truncation, max_intermediate);
    if (max_intermediate > spec.cap) throw SizeLimitExceeded(max_intermediate, spec.cap);
  }
  MAlphaBuilder builder(spec, std::move(rs));
  return builder.build(spec.alpha);
}

// ---------------------------------------------------------------------------

std::vector<BigInt> grid_round(const std::vector<Rational>& z) {
  std::vector<BigInt> out;
  out.reserve(z.size());
  for (const Rational& r : z) {
    BigInt fl = numerator(r) / denominator(r);
    if (r < 0 && fl * denominator(r) != numerator(r)) fl -= 1;  // true floor
    Rational frac = r - Rational(fl, 1);
    const Rational half(1, 2);
    if (frac > half)
      out.push_back(fl + 1);
    else if (frac < half)
      out.push_back(fl);
    else
      out.push_back(fl % 2 == 0 ? fl : fl + 1);  // ties to even
  }
  return out;
}

std::pair<Rational, Rational> distortion_of_map(const PointedMetricSpace& M,
                                                const std::vector<int>& image,
                                                const PointedMetricSpace& target) {
  if (image.size() != static_cast<std::size_t>(M.size()))
    throw DentlabError("image must assign a target point to every point");
  if (M.size() < 2) return {Rational(1), Rational(1)};
  bool first = true;
  Rational lo(0), hi(0);
  for (int i = 0; i < M.size(); ++i)
    for (int j = i + 1; j < M.size(); ++j) {
      Rational ratio = target.dist(image[i], image[j]) / M.dist(i, j);
      if (first) {
        lo = hi = ratio;
        first = false;
      } else {
        if (ratio < lo) lo = ratio;
        if (ratio > hi) hi = ratio;
      }
    }
  return {lo, hi};
}

}  // namespace dentlab
