#include "dentlab/cert.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace dentlab {

std::string rule_name(CertRule r) {
  switch (r) {
    case CertRule::Leaf: return "LEAF";
    case CertRule::Midpoint: return "MIDPOINT";
    case CertRule::Convex: return "CONVEX";
    case CertRule::Dilute: return "DILUTE";
    case CertRule::Subspace: return "SUBSPACE";
  }
  return "?";
}

CertRule rule_from_name(const std::string& name) {
  if (name == "LEAF") return CertRule::Leaf;
  if (name == "MIDPOINT") return CertRule::Midpoint;
  if (name == "CONVEX") return CertRule::Convex;
  if (name == "DILUTE") return CertRule::Dilute;
  if (name == "SUBSPACE") return CertRule::Subspace;
  throw ParseError("unknown certificate rule '" + name + "'");
}

namespace {

struct Rejection {
  std::string kind, node, detail;
};

class Verifier {
 public:
  Verifier(const PointedMetricSpace& main_space, const DentCert& cert)
      : main_(main_space), cert_(cert) {}

  VerifyOutcome run(const std::string& expected_hash) {
    VerifyOutcome out;
    try {
      if (!expected_hash.empty() && !cert_.space_hash.empty() &&
          expected_hash != cert_.space_hash)
        throw Rejection{"MalformedCertificate", "",
                        "certificate references space " + cert_.space_hash +
                            " but was checked against " + expected_hash};
      if (!cert_.nodes.count(cert_.root))
        throw Rejection{"MalformedCertificate", cert_.root, "root node is missing"};
      visit(cert_.root, 0);
      const CertNode& root = cert_.nodes.at(cert_.root);
      out.ok = true;
      out.eps = root.eps;
      out.depth = root.depth;
      report_ << "verdict: VERIFIED eps=" << rat_to_string(root.eps) << " depth=" << root.depth
              << "\n";
    } catch (const Rejection& r) {
      out.ok = false;
      out.error_kind = r.kind;
      out.node = r.node;
      out.detail = r.detail;
      report_ << "verdict: REJECTED node=" << r.node << " error=" << r.kind
              << " detail=" << r.detail << "\n";
    }
    out.report = report_.str();
    return out;
  }

 private:
  const PointedMetricSpace& space_of(const std::string& id, const std::string& node) {
    if (id == "main") return main_;
    auto it = cert_.aux_spaces.find(id);
    if (it == cert_.aux_spaces.end())
      throw Rejection{"MalformedCertificate", node, "unknown space '" + id + "'"};
    return it->second;
  }

  const CertNode& node_at(const std::string& id, const std::string& referrer) {
    auto it = cert_.nodes.find(id);
    if (it == cert_.nodes.end())
      throw Rejection{"MalformedCertificate", referrer, "missing child '" + id + "'"};
    return it->second;
  }

  void visit(const std::string& id, int depth_guard) {
    if (verified_.count(id)) return;
    if (depth_guard > 100000 || in_progress_.count(id))
      throw Rejection{"MalformedCertificate", id, "certificate graph has a cycle"};
    in_progress_.insert(id);
    const CertNode& node = node_at(id, id);
    for (const std::string& c : node.children) visit(c, depth_guard + 1);
    if (node.rule == CertRule::Dilute) {
      visit(node.child, depth_guard + 1);
      visit(node.ball, depth_guard + 1);
    }
    if (node.rule == CertRule::Subspace) visit(node.child, depth_guard + 1);
    in_progress_.erase(id);
    check(id, node);
    verified_.insert(id);
    report_ << id << ": " << rule_name(node.rule) << " eps=" << rat_to_string(node.eps)
            << " depth=" << node.depth << " ok\n";
  }

  void check(const std::string& id, const CertNode& node) {
    const PointedMetricSpace& sp = space_of(node.space_id, id);
    if (node.eps <= 0) throw Rejection{"BadArithmetic", id, "eps must be positive"};
    for (const auto& [i, c] : node.target.coeffs())
      if (i < 0 || i >= sp.size())
        throw Rejection{"MalformedCertificate", id, "target supported outside the space"};
    if (node.target.formal_mass() != 0)
      throw Rejection{"BadArithmetic", id,
                      "target coefficients must sum to zero (basepoint-free calculus)"};
    switch (node.rule) {
      case CertRule::Leaf: return check_leaf(id, node, sp);
      case CertRule::Midpoint: return check_midpoint(id, node, sp);
      case CertRule::Convex: return check_convex(id, node);
      case CertRule::Dilute: return check_dilute(id, node);
      case CertRule::Subspace: return check_subspace(id, node, sp);
    }
  }

  void check_leaf(const std::string& id, const CertNode& node, const PointedMetricSpace& sp) {
    if (node.depth != 0) throw Rejection{"BadArithmetic", id, "LEAF depth must be 0"};
    Rational cost = 0;
    std::map<int, Rational> div;
    for (const auto& arc : node.plan.arcs) {
      if (arc.from < 0 || arc.from >= sp.size() || arc.to < 0 || arc.to >= sp.size())
        throw Rejection{"MalformedCertificate", id, "plan arc endpoint outside the space"};
      if (arc.flow < 0)
        throw Rejection{"InfeasibleFlow", id, "negative flow on arc " +
                                                  std::to_string(arc.from) + "->" +
                                                  std::to_string(arc.to)};
      cost += arc.flow * sp.dist(arc.from, arc.to);
      div[arc.from] += arc.flow;
      div[arc.to] -= arc.flow;
    }
    // balanced target: net divergence must equal the coefficient everywhere
    std::set<int> touched;
    for (const auto& [p, d] : div) touched.insert(p);
    for (const auto& [p, c] : node.target.coeffs()) touched.insert(p);
    for (int p : touched) {
      Rational have = div.count(p) ? div.at(p) : Rational(0);
      if (have != node.target.coeff(p))
        throw Rejection{"InfeasibleFlow", id,
                        "divergence " + rat_to_string(have) + " at point " + std::to_string(p) +
                            " does not match coefficient " +
                            rat_to_string(node.target.coeff(p))};
    }
    if (cost > 1)
      throw Rejection{"InfeasibleFlow", id, "plan cost " + rat_to_string(cost) + " exceeds 1"};
  }

  void check_midpoint(const std::string& id, const CertNode& node,
                      const PointedMetricSpace& sp) {
    if (node.children.size() != 2)
      throw Rejection{"MalformedCertificate", id, "MIDPOINT needs exactly two children"};
    const CertNode& c1 = node_at(node.children[0], id);
    const CertNode& c2 = node_at(node.children[1], id);
    if (c1.space_id != node.space_id || c2.space_id != node.space_id)
      throw Rejection{"MalformedCertificate", id, "children live over a different space"};
    if (c1.eps != node.eps || c2.eps != node.eps)
      throw Rejection{"EpsMismatch", id, "MIDPOINT children must share the node's eps"};
    if (node.depth != std::min(c1.depth, c2.depth) + 1)
      throw Rejection{"BadArithmetic", id, "depth must be min(children) + 1"};
    FreeVector doubled = node.target + node.target;
    if (!(doubled == c1.target + c2.target))
      throw Rejection{"BadArithmetic", id, "target is not the midpoint of the children"};
    for (const auto& [p, val] : node.separator)
      if (p < 0 || p >= sp.size())
        throw Rejection{"MalformedCertificate", id, "separator valued outside the space"};
    Rational lip = partial_lip_constant(sp, node.separator);
    if (lip > 1)
      throw Rejection{"NotLipschitz", id,
                      "separator has Lipschitz constant " + rat_to_string(lip)};
    Rational sep;
    try {
      sep = partial_pairing(c1.target - c2.target, node.separator, sp.base());
    } catch (const MissingValue& e) {
      throw Rejection{"BadArithmetic", id,
                      std::string("separator does not cover the difference support: ") +
                          e.what()};
    }
    if (sep < 2 * node.eps)
      throw Rejection{"WeakSeparation", id, "achieved " + rat_to_string(sep) + ", required " +
                                                rat_to_string(2 * node.eps)};
  }

  void check_convex(const std::string& id, const CertNode& node) {
    if (node.children.empty())
      throw Rejection{"MalformedCertificate", id, "CONVEX needs at least one child"};
    if (node.weights.size() != node.children.size())
      throw Rejection{"MalformedCertificate", id, "one weight per child required"};
    Rational sum = 0;
    FreeVector combo;
    std::uint64_t min_depth = 0;
    bool first = true;
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      const CertNode& c = node_at(node.children[i], id);
      if (c.space_id != node.space_id)
        throw Rejection{"MalformedCertificate", id, "children live over a different space"};
      if (c.eps != node.eps)
        throw Rejection{"EpsMismatch", id, "CONVEX children must share the node's eps"};
      if (node.weights[i] < 0)
        throw Rejection{"BadArithmetic", id, "negative convex weight"};
      sum += node.weights[i];
      combo.add_scaled(c.target, node.weights[i]);
      min_depth = first ? c.depth : std::min(min_depth, c.depth);
      first = false;
    }
    if (sum != 1)
      throw Rejection{"BadArithmetic", id, "weights sum to " + rat_to_string(sum)};
    if (!(combo == node.target))
      throw Rejection{"BadArithmetic", id, "target is not the stated convex combination"};
    if (node.depth != min_depth)
      throw Rejection{"BadArithmetic", id, "depth must be the minimum over children"};
  }

  void check_dilute(const std::string& id, const CertNode& node) {
    const CertNode& c = node_at(node.child, id);
    const CertNode& b = node_at(node.ball, id);
    if (c.space_id != node.space_id || b.space_id != node.space_id)
      throw Rejection{"MalformedCertificate", id, "children live over a different space"};
    if (b.rule != CertRule::Leaf)
      throw Rejection{"MalformedCertificate", id, "DILUTE ball element must be a LEAF"};
    if (node.weights.size() != 1)
      throw Rejection{"BadArithmetic", id, "DILUTE needs a single lambda in (0,1)"};
    const Rational& lam = node.weights[0];
    if (lam <= 0 || lam >= 1)
      throw Rejection{"BadArithmetic", id, "DILUTE needs a single lambda in (0,1)"};
    FreeVector combo;
    combo.add_scaled(c.target, lam);
    combo.add_scaled(b.target, Rational(1) - lam);
    if (!(combo == node.target))
      throw Rejection{"BadArithmetic", id, "target is not lambda*child + (1-lambda)*ball"};
    if (node.eps != lam * c.eps)
      throw Rejection{"EpsMismatch", id, "eps must equal lambda * child eps"};
    if (node.depth != c.depth)
      throw Rejection{"BadArithmetic", id, "DILUTE keeps the child's depth"};
  }

  void check_subspace(const std::string& id, const CertNode& node,
                      const PointedMetricSpace& sp) {
    const CertNode& c = node_at(node.child, id);
    const PointedMetricSpace& K = space_of(c.space_id, id);
    if (node.incl_map.size() != static_cast<std::size_t>(K.size()))
      throw Rejection{"MalformedCertificate", id, "inclusion map must cover the subspace"};
    for (int m : node.incl_map)
      if (m < 0 || m >= sp.size())
        throw Rejection{"MalformedCertificate", id, "inclusion map leaves the space"};
    if (node.eps != c.eps) throw Rejection{"EpsMismatch", id, "SUBSPACE keeps the child's eps"};
    if (node.depth != c.depth)
      throw Rejection{"BadArithmetic", id, "SUBSPACE keeps the child's depth"};
    FreeVector image;
    for (const auto& [i, coeff] : c.target.coeffs())
      image.set(node.incl_map[i], image.coeff(node.incl_map[i]) + coeff);
    if (!(image == node.target))
      throw Rejection{"BadArithmetic", id, "target is not the image of the child target"};
    const std::vector<int>& used = used_points(node.child);
    for (std::size_t a = 0; a < used.size(); ++a)
      for (std::size_t b = a + 1; b < used.size(); ++b) {
        int x = used[a], y = used[b];
        if (K.dist(x, y) != sp.dist(node.incl_map[x], node.incl_map[y]))
          throw Rejection{"NonIsometricInclusion", id,
                          "inclusion distorts the pair (" + std::to_string(x) + "," +
                              std::to_string(y) + ")"};
      }
  }

  // Points of a node's own space that its sub-DAG touches (targets, plans,
  // separators, images of deeper inclusions). Memoized; verification of a
  // SUBSPACE node needs its child's set.
  const std::vector<int>& used_points(const std::string& id) {
    auto it = used_.find(id);
    if (it != used_.end()) return it->second;
    const CertNode& node = cert_.nodes.at(id);
    std::set<int> pts;
    for (const auto& [i, c] : node.target.coeffs()) pts.insert(i);
    switch (node.rule) {
      case CertRule::Leaf:
        for (const auto& arc : node.plan.arcs) {
          pts.insert(arc.from);
          pts.insert(arc.to);
        }
        break;
      case CertRule::Midpoint:
        for (const auto& [p, v] : node.separator) pts.insert(p);
        for (const auto& c : node.children)
          for (int p : used_points(c)) pts.insert(p);
        break;
      case CertRule::Convex:
        for (const auto& c : node.children)
          for (int p : used_points(c)) pts.insert(p);
        break;
      case CertRule::Dilute:
        for (int p : used_points(node.child)) pts.insert(p);
        for (int p : used_points(node.ball)) pts.insert(p);
        break;
      case CertRule::Subspace:
        for (int p : used_points(node.child)) pts.insert(node.incl_map[p]);
        break;
    }
    return used_[id] = std::vector<int>(pts.begin(), pts.end());
  }

  const PointedMetricSpace& main_;
  const DentCert& cert_;
  std::set<std::string> verified_, in_progress_;
  std::map<std::string, std::vector<int>> used_;
  std::ostringstream report_;
};

}  // namespace

VerifyOutcome verify(const PointedMetricSpace& main_space, const DentCert& cert,
                     const std::string& expected_space_hash) {
  return Verifier(main_space, cert).run(expected_space_hash);
}

Json cert_to_json(const DentCert& cert) {
  Json doc;
  doc["format"] = "cert/v1";
  doc["space_hash"] = cert.space_hash;
  doc["root"] = cert.root;
  if (!cert.intended_ordinal.empty()) doc["intended_ordinal"] = cert.intended_ordinal;
  Json aux = Json::object();
  for (const auto& [id, sp] : cert.aux_spaces) aux[id] = space_to_json(sp);
  doc["aux_spaces"] = std::move(aux);
  Json nodes = Json::object();
  for (const auto& [id, n] : cert.nodes) {
    Json j;
    j["rule"] = rule_name(n.rule);
    j["space"] = n.space_id;
    j["eps"] = rat_to_string(n.eps);
    j["depth"] = n.depth;
    j["target"] = free_vector_to_json(n.target);
    switch (n.rule) {
      case CertRule::Leaf:
        j["plan"] = plan_to_json(n.plan);
        break;
      case CertRule::Midpoint:
        j["children"] = n.children;
        j["sep"] = partial_fn_to_json(n.separator);
        break;
      case CertRule::Convex: {
        j["children"] = n.children;
        Json w = Json::array();
        for (const Rational& x : n.weights) w.push_back(rat_to_string(x));
        j["weights"] = std::move(w);
        break;
      }
      case CertRule::Dilute:
        j["child"] = n.child;
        j["ball"] = n.ball;
        j["lambda"] = rat_to_string(n.weights.at(0));
        break;
      case CertRule::Subspace:
        j["child"] = n.child;
        j["map"] = n.incl_map;
        break;
    }
    nodes[id] = std::move(j);
  }
  doc["nodes"] = std::move(nodes);
  return doc;
}

DentCert cert_from_json(const Json& doc) {
  if (!doc.is_object() || doc.value("format", "") != "cert/v1")
    throw ParseError("not a cert/v1 document");
  DentCert cert;
  cert.space_hash = doc.value("space_hash", "");
  cert.root = doc.at("root").get<std::string>();
  cert.intended_ordinal = doc.value("intended_ordinal", "");
  for (const auto& [id, sp] : doc.at("aux_spaces").items())
    cert.aux_spaces.emplace(id, space_from_json(sp));
  for (const auto& [id, j] : doc.at("nodes").items()) {
    CertNode n;
    n.rule = rule_from_name(j.at("rule").get<std::string>());
    n.space_id = j.at("space").get<std::string>();
    n.eps = parse_rational(j.at("eps").get<std::string>());
    n.depth = j.at("depth").get<std::uint64_t>();
    n.target = free_vector_from_json(j.at("target"));
    switch (n.rule) {
      case CertRule::Leaf:
        n.plan = plan_from_json(j.at("plan"));
        break;
      case CertRule::Midpoint:
        n.children = j.at("children").get<std::vector<std::string>>();
        n.separator = partial_fn_from_json(j.at("sep"));
        break;
      case CertRule::Convex:
        n.children = j.at("children").get<std::vector<std::string>>();
        for (const auto& w : j.at("weights"))
          n.weights.push_back(parse_rational(w.get<std::string>()));
        break;
      case CertRule::Dilute:
        n.child = j.at("child").get<std::string>();
        n.ball = j.at("ball").get<std::string>();
        n.weights.push_back(parse_rational(j.at("lambda").get<std::string>()));
        break;
      case CertRule::Subspace:
        n.child = j.at("child").get<std::string>();
        n.incl_map = j.at("map").get<std::vector<int>>();
        break;
    }
    cert.nodes.emplace(id, std::move(n));
  }
  return cert;
}

}  // namespace dentlab
