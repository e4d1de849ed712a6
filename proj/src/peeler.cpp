#include "dentlab/peeler.hpp"

#include <algorithm>
#include <atomic>
#include <future>

#include "dentlab/errors.hpp"

namespace dentlab {

namespace {

Rational dot(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

DDPolytope DDPolytope::empty_set(int dim) {
  DDPolytope p;
  p.dim_ = dim;
  return p;
}

DDPolytope DDPolytope::box(const std::vector<Rational>& lower,
                           const std::vector<Rational>& upper) {
  DDPolytope p;
  p.dim_ = static_cast<int>(lower.size());
  for (int c = 0; c < p.dim_; ++c) {
    if (lower[c] > upper[c]) throw DentlabError("box bounds are inverted");
    Halfspace hi, lo;
    hi.normal.assign(p.dim_, Rational(0));
    hi.normal[c] = 1;
    hi.offset = upper[c];
    lo.normal.assign(p.dim_, Rational(0));
    lo.normal[c] = -1;
    lo.offset = -lower[c];
    p.constraints_.push_back(std::move(hi));
    p.constraints_.push_back(std::move(lo));
  }
  const std::size_t corners = std::size_t{1} << p.dim_;
  for (std::size_t mask = 0; mask < corners; ++mask) {
    std::vector<Rational> x(p.dim_);
    for (int c = 0; c < p.dim_; ++c) x[c] = (mask >> c) & 1 ? upper[c] : lower[c];
    p.add_vertex(std::move(x));
  }
  return p;
}

void DDPolytope::add_vertex(std::vector<Rational> x) {
  for (const auto& v : coords_)
    if (v == x) return;
  std::set<int> tight;
  for (std::size_t c = 0; c < constraints_.size(); ++c)
    if (dot(constraints_[c].normal, x) == constraints_[c].offset)
      tight.insert(static_cast<int>(c));
  coords_.push_back(std::move(x));
  tight_.push_back(std::move(tight));
}

void DDPolytope::insert(const Halfspace& h) {
  if (coords_.empty()) return;
  std::vector<Rational> value(coords_.size());
  bool any_pos = false;
  for (std::size_t v = 0; v < coords_.size(); ++v) {
    value[v] = dot(h.normal, coords_[v]) - h.offset;
    if (value[v] > 0) any_pos = true;
  }
  if (!any_pos) return;  // nothing cut; keep the description irredundant

  const int ci = static_cast<int>(constraints_.size());
  constraints_.push_back(h);

  std::vector<std::vector<Rational>> old_coords = std::move(coords_);
  std::vector<std::set<int>> old_tight = std::move(tight_);
  coords_.clear();
  tight_.clear();

  std::vector<std::size_t> keep;
  for (std::size_t v = 0; v < old_coords.size(); ++v)
    if (value[v] <= 0) {
      keep.push_back(v);
      if (value[v] == 0) old_tight[v].insert(ci);
      coords_.push_back(old_coords[v]);
      tight_.push_back(old_tight[v]);
    }

  // Edges between a kept and a cut vertex spawn the new boundary vertices.
  // Two vertices are adjacent exactly when no third one is tight on
  // everything they share.
  for (std::size_t a = 0; a < old_coords.size(); ++a) {
    if (value[a] >= 0) continue;
    for (std::size_t b = 0; b < old_coords.size(); ++b) {
      if (value[b] <= 0) continue;
      std::set<int> common;
      std::set_intersection(old_tight[a].begin(), old_tight[a].end(), old_tight[b].begin(),
                            old_tight[b].end(), std::inserter(common, common.begin()));
      bool adjacent = true;
      for (std::size_t z = 0; z < old_coords.size() && adjacent; ++z) {
        if (z == a || z == b) continue;
        adjacent = !std::includes(old_tight[z].begin(), old_tight[z].end(), common.begin(),
                                  common.end());
      }
      if (!adjacent) continue;
      // x = a + t (b - a) with value zero: t = -value[a] / (value[b] - value[a])
      Rational t = -value[a] / (value[b] - value[a]);
      std::vector<Rational> x(dim_);
      for (int c = 0; c < dim_; ++c)
        x[c] = old_coords[a][c] + t * (old_coords[b][c] - old_coords[a][c]);
      add_vertex(std::move(x));
    }
  }
}

std::vector<Rational> coords_of(const PointedMetricSpace& M, const FreeVector& v) {
  std::vector<Rational> out;
  out.reserve(M.size() - 1);
  for (int p = 0; p < M.size(); ++p)
    if (p != M.base()) out.push_back(v.coeff(p));
  return out;
}

FreeVector vector_of(const PointedMetricSpace& M, const std::vector<Rational>& coords) {
  FreeVector v;
  std::size_t c = 0;
  for (int p = 0; p < M.size(); ++p)
    if (p != M.base()) v.set(p, coords[c++]);
  return v;
}

namespace {

std::vector<Rational> witness_coords(const PointedMetricSpace& M, const LipWitness& f) {
  std::vector<Rational> out;
  out.reserve(M.size() - 1);
  for (int p = 0; p < M.size(); ++p)
    if (p != M.base()) out.push_back(f.values[p]);
  return out;
}

}  // namespace

LipBall lip_ball_vertices(const PointedMetricSpace& M, std::size_t dim_cap) {
  const int n = M.size();
  if (n < 2) return {};
  const std::size_t d = static_cast<std::size_t>(n - 1);
  if (d > dim_cap) throw DimensionLimit(d, dim_cap);

  std::vector<int> pts;  // coordinate -> point index
  for (int p = 0; p < n; ++p)
    if (p != M.base()) pts.push_back(p);

  std::vector<Rational> lo(d), hi(d);
  for (std::size_t c = 0; c < d; ++c) {
    hi[c] = M.dist(pts[c], M.base());
    lo[c] = -hi[c];
  }
  DDPolytope poly = DDPolytope::box(lo, hi);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b) {
      Halfspace h1, h2;
      h1.normal.assign(d, Rational(0));
      h1.normal[a] = 1;
      h1.normal[b] = -1;
      h1.offset = M.dist(pts[a], pts[b]);
      h2 = h1;
      h2.normal[a] = -1;
      h2.normal[b] = 1;
      poly.insert(h1);
      poly.insert(h2);
    }

  LipBall ball;
  for (const auto& x : poly.vertices()) {
    LipWitness f;
    f.values.assign(n, Rational(0));
    for (std::size_t c = 0; c < d; ++c) f.values[pts[c]] = x[c];
    ball.vertices.push_back(std::move(f));
  }
  // deterministic order
  std::sort(ball.vertices.begin(), ball.vertices.end(),
            [](const LipWitness& a, const LipWitness& b) { return a.values < b.values; });
  for (const auto& f : ball.vertices) {
    bool positive = false, zero = true;
    for (const Rational& v : f.values) {
      if (v != 0) {
        positive = v > 0;
        zero = false;
        break;
      }
    }
    if (!zero && positive) ball.family.push_back(f);
  }
  return ball;
}

DDPolytope free_ball(const PointedMetricSpace& M, const LipBall& ball) {
  const int n = M.size();
  const std::size_t d = static_cast<std::size_t>(n - 1);
  std::vector<int> pts;
  for (int p = 0; p < n; ++p)
    if (p != M.base()) pts.push_back(p);
  std::vector<Rational> lo(d), hi(d);
  for (std::size_t c = 0; c < d; ++c) {
    Rational sep(-1);
    for (int z = 0; z < n; ++z)
      if (z != pts[c]) {
        const Rational& dd = M.dist(pts[c], z);
        if (sep < 0 || dd < sep) sep = dd;
      }
    hi[c] = Rational(1) / sep;
    lo[c] = -hi[c];
  }
  DDPolytope poly = DDPolytope::box(lo, hi);
  for (const LipWitness& f : ball.vertices) {
    Halfspace h;
    h.normal = witness_coords(M, f);
    h.offset = 1;
    poly.insert(h);
  }
  return poly;
}

Rational hull_diameter(const PointedMetricSpace& M, const LipBall& ball,
                       const std::vector<std::vector<Rational>>& verts) {
  if (verts.size() < 2) return Rational(0);
  Rational best = 0;
  for (const LipWitness& f : ball.family) {
    std::vector<Rational> fc = witness_coords(M, f);
    Rational mx = dot(fc, verts[0]), mn = mx;
    for (std::size_t v = 1; v < verts.size(); ++v) {
      Rational val = dot(fc, verts[v]);
      if (val > mx) mx = val;
      if (val < mn) mn = val;
    }
    if (mx - mn > best) best = mx - mn;
  }
  return best;
}

Rational slice_threshold(const DDPolytope& C, const PointedMetricSpace& M, const LipBall& ball,
                         const LipWitness& f, const Rational& eps, int resolution) {
  if (C.empty()) throw DentlabError("slice_threshold needs a nonempty set");
  std::vector<Rational> fc = witness_coords(M, f);
  Rational lo = dot(fc, C.vertices()[0]), hi = lo;
  for (const auto& v : C.vertices()) {
    Rational val = dot(fc, v);
    if (val < lo) lo = val;
    if (val > hi) hi = val;
  }
  // open slice above hi is empty, hence trivially removable; below lo the
  // slice is all of C, which the caller guarantees is wide
  auto small_above = [&](const Rational& a) {
    DDPolytope section = C;
    Halfspace h;
    h.normal.resize(fc.size());
    for (std::size_t c = 0; c < fc.size(); ++c) h.normal[c] = -fc[c];
    h.offset = -a;
    section.insert(h);
    return hull_diameter(M, ball, section.vertices()) < eps;
  };
  const Rational step = pow2(-resolution);
  while (hi - lo > step) {
    Rational mid = (lo + hi) / 2;
    if (small_above(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

std::vector<LipWitness> molecule_directions(const PointedMetricSpace& M) {
  std::vector<LipWitness> out;
  for (int x = 0; x < M.size(); ++x)
    for (int y = x + 1; y < M.size(); ++y) {
      LipWitness f;
      f.values.resize(M.size());
      for (int p = 0; p < M.size(); ++p)
        f.values[p] = (M.dist(p, y) - M.dist(p, x)) / 2;
      Rational at_base = f.values[M.base()];
      for (auto& v : f.values) v -= at_base;
      // canonical sign: first nonzero positive
      for (const Rational& v : f.values) {
        if (v == 0) continue;
        if (v < 0)
          for (auto& w : f.values) w = -w;
        break;
      }
      bool dup = false;
      for (const auto& g : out)
        if (g.values == f.values) dup = true;
      if (!dup) out.push_back(std::move(f));
    }
  std::sort(out.begin(), out.end(),
            [](const LipWitness& a, const LipWitness& b) { return a.values < b.values; });
  return out;
}

std::vector<LipWitness> slice_family(const PointedMetricSpace& M, const LipBall& ball,
                                     DirectionFamily which) {
  std::vector<LipWitness> out;
  if (which != DirectionFamily::Molecules) out = ball.family;
  if (which != DirectionFamily::LipBall) {
    for (auto& f : molecule_directions(M)) {
      bool dup = false;
      for (const auto& g : out)
        if (g.values == f.values) dup = true;
      if (!dup) out.push_back(std::move(f));
    }
  }
  return out;
}

DDPolytope peel_step(const DDPolytope& C, const PointedMetricSpace& M, const LipBall& ball,
                     const std::vector<LipWitness>& family, const Rational& eps, int resolution,
                     PeelStep* info, int jobs) {
  DDPolytope out = C;
  if (C.empty()) return out;
  if (hull_diameter(M, ball, C.vertices()) < eps) {
    // one wide-open slice already covers everything
    if (info) {
      info->cuts.clear();
      info->vertex_count = 0;
      info->emptied = true;
    }
    return DDPolytope::empty_set(C.dim());
  }

  struct Cap {
    std::size_t dir;
    int sign;
    Rational threshold;
    std::vector<Rational> normal;
  };
  std::vector<Cap> caps(family.size() * 2);
  auto compute = [&](std::size_t idx) {
    std::size_t dir = idx / 2;
    int sign = idx % 2 == 0 ? 1 : -1;
    LipWitness f = family[dir];
    if (sign < 0)
      for (auto& v : f.values) v = -v;
    Rational a = slice_threshold(C, M, ball, f, eps, resolution);
    caps[idx] = Cap{dir, sign, a, witness_coords(M, f)};
  };
  if (jobs > 1) {
    std::vector<std::future<void>> futures;
    std::atomic<std::size_t> next{0};
    for (int j = 0; j < jobs; ++j)
      futures.push_back(std::async(std::launch::async, [&] {
        for (std::size_t i = next.fetch_add(1); i < caps.size(); i = next.fetch_add(1))
          compute(i);
      }));
    for (auto& fu : futures) fu.get();
  } else {
    for (std::size_t i = 0; i < caps.size(); ++i) compute(i);
  }

  if (info) info->cuts.clear();
  for (const Cap& cap : caps) {
    Halfspace h;
    h.normal = cap.normal;
    h.offset = cap.threshold;
    out.insert(h);
    if (info) info->cuts.push_back({cap.dir, cap.sign, cap.threshold});
  }
  if (info) {
    info->vertex_count = out.vertices().size();
    info->emptied = out.empty();
  }
  return out;
}

PeelResult peel_depth(const PointedMetricSpace& M, const Rational& eps, std::size_t max_steps,
                      int resolution, std::size_t dim_cap, int jobs, DirectionFamily which) {
  if (eps <= 0) throw DentlabError("eps must be positive");
  PeelResult result;
  if (M.size() < 2) {
    // the unit ball of the trivial free space is {0}; the first derivation
    // removes it
    result.emptied = true;
    result.steps = 1;
    PeelStep s;
    s.step = 1;
    s.emptied = true;
    result.transcript.push_back(std::move(s));
    return result;
  }
  if (static_cast<std::size_t>(M.size() - 1) > dim_cap)
    throw DimensionLimit(M.size() - 1, dim_cap);

  LipBall ball = lip_ball_vertices(M, dim_cap);
  std::vector<LipWitness> family = slice_family(M, ball, which);
  DDPolytope C = free_ball(M, ball);
  for (std::size_t step = 1; step <= max_steps; ++step) {
    PeelStep info;
    info.step = step;
    C = peel_step(C, M, ball, family, eps, resolution, &info, jobs);
    result.transcript.push_back(info);
    if (C.empty()) {
      result.emptied = true;
      result.steps = step;
      return result;
    }
  }
  result.emptied = false;
  result.steps = max_steps;
  std::vector<Rational> avg(C.dim(), Rational(0));
  for (const auto& v : C.vertices())
    for (int c = 0; c < C.dim(); ++c) avg[c] += v[c];
  for (auto& x : avg) x /= Rational(static_cast<long>(C.vertices().size()));
  result.witness = vector_of(M, avg);
  return result;
}

}  // namespace dentlab
