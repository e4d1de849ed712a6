#include "dentlab/cert_gen.hpp"

#include <algorithm>
#include <functional>
#include <iomanip>
#include <sstream>

namespace dentlab {

namespace {

// Shared assembly state: spaces dedup by content, nodes dedup by the
// (rule, space, eps, depth, target) signature so identical sub-certificates
// collapse across branches.
class CertBuilder {
 public:
  explicit CertBuilder(std::string main_hash) { cert_.space_hash = std::move(main_hash); }

  std::string add_space(const PointedMetricSpace& sp) {
    std::string h = content_hash(space_to_json(sp));
    auto it = space_ids_.find(h);
    if (it != space_ids_.end()) return it->second;
    std::string id = "K" + std::to_string(space_ids_.size());
    cert_.aux_spaces.emplace(id, sp);
    space_ids_[h] = id;
    return id;
  }

  std::string add_node(CertNode node) {
    std::string key = signature(node);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    std::ostringstream id;
    id << "n" << std::setw(6) << std::setfill('0') << counter_++;
    cert_.nodes.emplace(id.str(), std::move(node));
    memo_[key] = id.str();
    return id.str();
  }

  const CertNode& at(const std::string& id) const { return cert_.nodes.at(id); }

  DentCert finish(std::string root, std::string intended_ordinal) {
    cert_.root = std::move(root);
    cert_.intended_ordinal = std::move(intended_ordinal);
    return std::move(cert_);
  }

 private:
  static std::string signature(const CertNode& n) {
    return rule_name(n.rule) + "|" + n.space_id + "|" + rat_to_string(n.eps) + "|" +
           std::to_string(n.depth) + "|" + n.target.to_string();
  }

  DentCert cert_;
  std::map<std::string, std::string> space_ids_;
  std::map<std::string, std::string> memo_;
  std::size_t counter_ = 0;
};

std::string molecule_leaf(CertBuilder& b, const std::string& space_id,
                          const PointedMetricSpace& sp, int x, int y, const Rational& eps) {
  CertNode n;
  n.rule = CertRule::Leaf;
  n.space_id = space_id;
  n.target = molecule(sp, x, y);
  n.eps = eps;
  n.depth = 0;
  n.plan.arcs.push_back({x, y, Rational(1) / sp.dist(x, y)});
  return b.add_node(std::move(n));
}

std::string subspace_node(CertBuilder& b, const std::string& space_id, const std::string& child,
                          const std::vector<int>& map) {
  const CertNode& c = b.at(child);
  CertNode n;
  n.rule = CertRule::Subspace;
  n.space_id = space_id;
  n.eps = c.eps;
  n.depth = c.depth;
  n.child = child;
  n.incl_map = map;
  for (const auto& [i, coeff] : c.target.coeffs())
    n.target.set(map[i], n.target.coeff(map[i]) + coeff);
  return b.add_node(std::move(n));
}

std::string convex_node(CertBuilder& b, const std::string& space_id,
                        const std::vector<std::string>& children,
                        const std::vector<Rational>& weights) {
  CertNode n;
  n.rule = CertRule::Convex;
  n.space_id = space_id;
  n.children = children;
  n.weights = weights;
  n.eps = b.at(children[0]).eps;
  bool first = true;
  for (std::size_t i = 0; i < children.size(); ++i) {
    const CertNode& c = b.at(children[i]);
    n.target.add_scaled(c.target, weights[i]);
    n.depth = first ? c.depth : std::min(n.depth, c.depth);
    first = false;
  }
  return b.add_node(std::move(n));
}

std::string midpoint_node(CertBuilder& b, const std::string& space_id, const std::string& c1,
                          const std::string& c2, std::map<int, Rational> separator) {
  const CertNode& a = b.at(c1);
  const CertNode& c = b.at(c2);
  CertNode n;
  n.rule = CertRule::Midpoint;
  n.space_id = space_id;
  n.children = {c1, c2};
  n.separator = std::move(separator);
  n.eps = a.eps;
  n.depth = std::min(a.depth, c.depth) + 1;
  n.target.add_scaled(a.target, Rational(1, 2));
  n.target.add_scaled(c.target, Rational(1, 2));
  return b.add_node(std::move(n));
}

// Midpoint tree over an even number of consecutive spans: merges neighbours
// with the distance ramp at their shared junction until one node remains.
// span_nodes[i] certifies the molecule from junction i+1 down to junction i
// (junction indices into `junctions`, which live in `sp`).
std::string merge_spans(CertBuilder& b, const std::string& space_id,
                        const PointedMetricSpace& sp, const std::vector<int>& junctions,
                        std::vector<std::string> span_nodes) {
  std::size_t span_width = 1;
  while (span_nodes.size() > 1) {
    if (span_nodes.size() % 2 != 0)
      throw DentlabError("internal: span count must be a power of two");
    std::vector<std::string> next;
    for (std::size_t i = 0; i < span_nodes.size(); i += 2) {
      const int lo = junctions[i * span_width];
      const int mid = junctions[(i + 1) * span_width];
      const int hi = junctions[(i + 2) * span_width];
      std::map<int, Rational> ramp;
      ramp[lo] = -sp.dist(lo, mid);
      ramp[mid] = 0;
      ramp[hi] = -sp.dist(mid, hi);
      // lower span pairs to +1 against the ramp, upper to -1
      next.push_back(midpoint_node(b, space_id, span_nodes[i], span_nodes[i + 1], std::move(ramp)));
    }
    span_nodes = std::move(next);
    span_width *= 2;
  }
  return span_nodes[0];
}

// ---------------------------------------------------------------------------
// diamonds

class DiamondCertGen {
 public:
  DiamondCertGen(const DiamondBuild& build, int k, CertBuilder& b)
      : top_(build), k_(k), b_(b) {}

  std::string run() {
    std::vector<const DiamondBuild*> levels;
    for (const DiamondBuild* d = &top_; d; d = d->inner.get()) levels.push_back(d);
    std::reverse(levels.begin(), levels.end());  // level 1 first
    const int branches = 1 << k_;
    if (levels[0]->middles.size() < static_cast<std::size_t>(branches))
      throw DentlabError("diamond branching is smaller than 2^k");

    std::string below;  // root certificate id over the previous level
    for (std::size_t m = 1; m <= levels.size(); ++m) {
      const DiamondBuild& d = *levels[m - 1];
      std::string space_id = (m == levels.size()) ? "main" : b_.add_space(d.space.space);
      const PointedMetricSpace& sp = d.space.space;
      const int t = d.space.top, bo = d.space.bottom();

      std::vector<std::string> u_nodes, w_nodes;
      for (int i = 0; i < branches; ++i) {
        int xi = d.middles[i];
        if (m == 1) {
          u_nodes.push_back(molecule_leaf(b_, space_id, sp, t, xi, Rational(1)));
          w_nodes.push_back(molecule_leaf(b_, space_id, sp, xi, bo, Rational(1)));
        } else {
          u_nodes.push_back(subspace_node(b_, space_id, below, d.plus_maps[i]));
          w_nodes.push_back(subspace_node(b_, space_id, below, d.minus_maps[i]));
        }
      }
      std::string u_avg = average_tree(space_id, sp, d, u_nodes, /*top_side=*/true);
      std::string w_avg = average_tree(space_id, sp, d, w_nodes, /*top_side=*/false);
      below = convex_node(b_, space_id, {u_avg, w_avg}, {Rational(1, 2), Rational(1, 2)});
    }
    return below;
  }

 private:
  // Binary averaging over dyadic index blocks; the separator puts one block at
  // 0 and its sibling at -2^m, which pairs the block averages exactly 2 apart.
  std::string average_tree(const std::string& space_id, const PointedMetricSpace& sp,
                           const DiamondBuild& d, std::vector<std::string> nodes,
                           bool top_side) {
    const Rational drop = -sp.dist(d.space.top, d.space.bottom());  // -2^m
    std::size_t width = 1;
    while (nodes.size() > 1) {
      std::vector<std::string> next;
      for (std::size_t i = 0; i < nodes.size(); i += 2) {
        std::map<int, Rational> sep;
        for (std::size_t j = i * width; j < (i + 1) * width; ++j) sep[d.middles[j]] = 0;
        for (std::size_t j = (i + 1) * width; j < (i + 2) * width; ++j)
          sep[d.middles[j]] = drop;
        // u-averages: right block pairs +2; w-averages: left block pairs +2
        std::string c1 = top_side ? nodes[i + 1] : nodes[i];
        std::string c2 = top_side ? nodes[i] : nodes[i + 1];
        next.push_back(midpoint_node(b_, space_id, c1, c2, std::move(sep)));
      }
      nodes = std::move(next);
      width *= 2;
    }
    return nodes[0];
  }

  const DiamondBuild& top_;
  int k_;
  CertBuilder& b_;
};

}  // namespace

DentCert gen_diamond_cert(const DiamondBuild& build, int k) {
  if (k < 0) throw DentlabError("k must be >= 0");
  CertBuilder b(content_hash(space_to_json(build.space)));
  DiamondCertGen gen(build, k, b);
  std::string root = gen.run();
  int n = 0;
  for (const DiamondBuild* d = &build; d; d = d->inner.get()) ++n;
  return b.finish(root, "w*" + std::to_string(n));
}

DentCert gen_diamond_cert(int n, int k, std::size_t cap) {
  if (k < 0 || k > 20) throw DentlabError("k out of range");
  DiamondBuild build = diamond_build({n, 1 << k}, cap);
  return gen_diamond_cert(build, k);
}

// ---------------------------------------------------------------------------
// chains

namespace {

// Core chain lift used by both the public chain generator and the M_alpha
// generator. `import` clones the inner certificate into the target builder at
// scale s (coefficients divide by s, flows divide by s, separators multiply).
std::string import_scaled(CertBuilder& b, const DentCert& inner,
                          const PointedMetricSpace& inner_main, const Rational& s,
                          std::map<std::string, std::string>& space_map) {
  // space_map takes inner space ids to builder ids of their rescaled versions.
  auto space_id_of = [&](const std::string& id) -> const std::string& {
    auto it = space_map.find(id);
    if (it != space_map.end()) return it->second;
    const PointedMetricSpace& sp = id == "main" ? inner_main : inner.aux_spaces.at(id);
    return space_map[id] = b.add_space(sp.rescaled(s));
  };

  std::map<std::string, std::string> node_map;
  // topological import: iterate until all nodes placed (DAG, so this ends)
  std::function<std::string(const std::string&)> place = [&](const std::string& id) {
    auto it = node_map.find(id);
    if (it != node_map.end()) return it->second;
    const CertNode& n = inner.nodes.at(id);
    CertNode out;
    out.rule = n.rule;
    out.space_id = space_id_of(n.space_id);
    out.eps = n.eps;
    out.depth = n.depth;
    for (const auto& [i, c] : n.target.coeffs()) out.target.set(i, c / s);
    switch (n.rule) {
      case CertRule::Leaf:
        for (const auto& arc : n.plan.arcs) out.plan.arcs.push_back({arc.from, arc.to, arc.flow / s});
        break;
      case CertRule::Midpoint:
        for (const auto& c : n.children) out.children.push_back(place(c));
        for (const auto& [p, v] : n.separator) out.separator[p] = v * s;
        break;
      case CertRule::Convex:
        for (const auto& c : n.children) out.children.push_back(place(c));
        out.weights = n.weights;
        break;
      case CertRule::Dilute:
        out.child = place(n.child);
        out.ball = place(n.ball);
        out.weights = n.weights;
        break;
      case CertRule::Subspace:
        out.child = place(n.child);
        out.incl_map = n.incl_map;
        break;
    }
    return node_map[id] = b.add_node(std::move(out));
  };
  return place(inner.root);
}

std::string chain_lift(CertBuilder& b, const std::string& w_space_id,
                       const PointedMetricSpace& W, const DentCert& inner,
                       const PointedMetricSpace& inner_space, const Rational& s,
                       const std::vector<std::vector<int>>& copy_maps,
                       const std::vector<int>& junctions) {
  std::map<std::string, std::string> space_map;
  std::string scaled_root = import_scaled(b, inner, inner_space, s, space_map);
  std::vector<std::string> spans;
  for (const auto& map : copy_maps) spans.push_back(subspace_node(b, w_space_id, scaled_root, map));
  return merge_spans(b, w_space_id, W, junctions, std::move(spans));
}

}  // namespace

DentCert gen_chain_cert(const DentCert& inner, const PointedMetricSpace& inner_space, int l,
                        const Rational& s, const PointedMetricSpace& W,
                        const std::vector<std::vector<int>>& copy_maps,
                        const std::vector<int>& junctions, const std::string& w_hash) {
  if (l < 0) throw DentlabError("l must be >= 0");
  if (copy_maps.size() != (1ull << l) || junctions.size() != (1ull << l) + 1)
    throw DentlabError("embedding does not describe a chain of 2^l copies");
  CertBuilder b(w_hash);
  std::string root = chain_lift(b, "main", W, inner, inner_space, s, copy_maps, junctions);
  return b.finish(root, inner.intended_ordinal.empty()
                            ? ""
                            : inner.intended_ordinal + "+" + std::to_string(l));
}

ChainCertResult gen_chain_cert_over_chain(const DentCert& inner, const TopBottomSpace& M, int l,
                                          const Rational& s, std::size_t cap) {
  ChainResult cr = chain_with_embedding(M, l, s, cap);
  std::string hash = content_hash(space_to_json(cr.space));
  DentCert lifted = gen_chain_cert(inner, M.space, l, s, cr.space.space, cr.copy_maps,
                                   cr.junctions, hash);
  return ChainCertResult{std::move(cr.space), std::move(lifted)};
}

// ---------------------------------------------------------------------------
// M_alpha

namespace {

class MAlphaCertGen {
 public:
  MAlphaCertGen(const MAlphaBuild& top, std::uint64_t piece_index, CertBuilder& b)
      : top_(top), piece_index_(piece_index), b_(b) {}

  std::string run() { return cert_for(top_, Rational(1), "main", true); }

 private:
  // Certificate for the end-to-end molecule of (node.space, scale * d), over
  // the builder space id `sid`. The outermost limit step routes through the
  // requested piece; inner limits use their deepest piece.
  std::string cert_for(const MAlphaBuild& node, const Rational& scale, const std::string& sid,
                       bool outermost) {
    std::string key = node.alpha.to_string() + "@" + rat_to_string(scale) + "@" + sid + "@" +
                      (outermost ? "1" : "0");
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    PointedMetricSpace scaled = node.space.space.rescaled(scale);
    std::string out;
    if (node.finite_part == 0 && node.pieces.empty()) {
      // M_0: a single molecule in the ball
      out = molecule_leaf(b_, sid, scaled, node.space.top, node.space.bottom(), Rational(1));
    } else if (node.finite_part > 0) {
      const Rational inner_scale = scale * pow2(-(long)node.finite_part);
      std::string inner_sid = b_.add_space(node.core->space.space.rescaled(inner_scale));
      std::string inner_root = cert_for(*node.core, inner_scale, inner_sid, outermost);
      std::vector<std::string> spans;
      for (const auto& map : node.chain_copy_maps)
        spans.push_back(subspace_node(b_, sid, inner_root, map));
      out = merge_spans(b_, sid, scaled, node.chain_junctions, std::move(spans));
    } else {
      out = limit_cert(node, scale, scaled, sid, outermost);
    }
    cache_[key] = out;
    return out;
  }

  std::string limit_cert(const MAlphaBuild& node, const Rational& scale,
                         const PointedMetricSpace& scaled, const std::string& sid,
                         bool outermost) {
    std::uint64_t idx = outermost ? piece_index_ : node.pieces.size();
    if (idx < 1 || idx > node.pieces.size())
      throw DentlabError("piece index out of range (have " +
                         std::to_string(node.pieces.size()) + " pieces)");
    const MAlphaBuild::Piece& piece = node.pieces[idx - 1];
    const std::uint64_t k = node.limit_k;
    const std::uint64_t kn = piece.k_n;

    const Rational inner_scale = scale * pow2(-(long)kn);
    std::string inner_sid = b_.add_space(piece.gamma_build->space.space.rescaled(inner_scale));
    std::string inner_root = cert_for(*piece.gamma_build, inner_scale, inner_sid, false);

    // copy molecules across the surviving span, grouped into 2^k - 2 wide
    // blocks combined convexly, then midpoint-halved down to m_{u,v}
    std::vector<std::string> copy_nodes;
    for (const auto& map : piece.copy_maps)
      copy_nodes.push_back(subspace_node(b_, sid, inner_root, map));
    const std::size_t block = (1ull << k) - 2;
    std::vector<std::string> spans;
    std::vector<int> block_junctions;
    for (std::size_t i = 0; i < copy_nodes.size(); i += block) {
      std::vector<std::string> kids(copy_nodes.begin() + i, copy_nodes.begin() + i + block);
      std::vector<Rational> w(block, Rational(1, (unsigned long)block));
      spans.push_back(convex_node(b_, sid, kids, w));
    }
    for (std::size_t j = 0; j < piece.junctions.size(); j += block)
      block_junctions.push_back(piece.junctions[j]);
    std::string span_root = merge_spans(b_, sid, scaled, block_junctions, std::move(spans));

    // m_{t,b} = (1 - 2^(1-k)) m_{u,v} + 2^(1-k) * (m_{t,u} + m_{v,b})/2
    const int t = node.space.top, bo = node.space.bottom();
    CertNode ballnode;
    ballnode.rule = CertRule::Leaf;
    ballnode.space_id = sid;
    ballnode.eps = b_.at(span_root).eps;
    ballnode.depth = 0;
    ballnode.target.add_scaled(molecule(scaled, t, piece.u), Rational(1, 2));
    ballnode.target.add_scaled(molecule(scaled, piece.v, bo), Rational(1, 2));
    ballnode.plan.arcs.push_back({t, piece.u, Rational(1, 2) / scaled.dist(t, piece.u)});
    ballnode.plan.arcs.push_back({piece.v, bo, Rational(1, 2) / scaled.dist(piece.v, bo)});
    std::string ball = b_.add_node(std::move(ballnode));

    CertNode dil;
    dil.rule = CertRule::Dilute;
    dil.space_id = sid;
    dil.child = span_root;
    dil.ball = ball;
    const Rational lambda = Rational(1) - pow2(1 - (long)k);
    dil.weights = {lambda};
    dil.eps = lambda * b_.at(span_root).eps;
    dil.depth = b_.at(span_root).depth;
    dil.target.add_scaled(b_.at(span_root).target, lambda);
    dil.target.add_scaled(b_.at(ball).target, Rational(1) - lambda);
    return b_.add_node(std::move(dil));
  }

  const MAlphaBuild& top_;
  std::uint64_t piece_index_;
  CertBuilder& b_;
  std::map<std::string, std::string> cache_;
};

}  // namespace

DentCert gen_malpha_cert(const MAlphaBuild& build, std::uint64_t piece_index) {
  CertBuilder b(content_hash(space_to_json(build.space)));
  MAlphaCertGen gen(build, piece_index, b);
  std::string root = gen.run();
  return b.finish(root, build.alpha.to_string());
}

// ---------------------------------------------------------------------------
// mutations

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

DentCert mutate(const DentCert& cert, MutationKind kind, std::uint64_t seed) {
  CertRule wanted = kind == MutationKind::WeakenSeparator    ? CertRule::Midpoint
                    : kind == MutationKind::PerturbConvexWeight ? CertRule::Convex
                                                                : CertRule::Leaf;
  std::vector<std::string> candidates;
  for (const auto& [id, n] : cert.nodes)
    if (n.rule == wanted) candidates.push_back(id);
  if (candidates.empty()) throw DentlabError("certificate has no node of the requested rule");
  std::uint64_t state = seed;
  const std::string& chosen = candidates[splitmix64(state) % candidates.size()];

  DentCert out = cert;
  CertNode& n = out.nodes.at(chosen);
  switch (kind) {
    case MutationKind::WeakenSeparator:
      for (auto& [p, v] : n.separator) v /= 2;
      break;
    case MutationKind::PerturbConvexWeight:
      n.weights.at(0) += Rational(1, 7);
      break;
    case MutationKind::CorruptLeafFlow:
      if (n.plan.arcs.empty())
        n.plan.arcs.push_back({0, 0, Rational(-1)});
      else
        n.plan.arcs[0].flow = -n.plan.arcs[0].flow - 1;
      break;
  }
  return out;
}

}  // namespace dentlab
