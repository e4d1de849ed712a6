#include "dentlab/kr_norm.hpp"

#include <algorithm>
#include <deque>

#include "dentlab/errors.hpp"

namespace dentlab {

Rational TransportPlan::cost(const PointedMetricSpace& M) const {
  Rational c = 0;
  for (const auto& a : arcs) c += a.flow * M.dist(a.from, a.to);
  return c;
}

std::map<int, Rational> TransportPlan::divergence() const {
  std::map<int, Rational> div;
  for (const auto& a : arcs) {
    div[a.from] += a.flow;
    div[a.to] -= a.flow;
  }
  return div;
}

Rational lip_constant(const PointedMetricSpace& M, const LipWitness& f) {
  if (f.values.size() != static_cast<std::size_t>(M.size()))
    throw MissingValue(static_cast<int>(f.values.size()));
  Rational best = 0;
  for (int i = 0; i < M.size(); ++i)
    for (int j = i + 1; j < M.size(); ++j) {
      Rational ratio = abs(f.values[i] - f.values[j]) / M.dist(i, j);
      if (ratio > best) best = ratio;
    }
  return best;
}

Rational partial_lip_constant(const PointedMetricSpace& M,
                              const std::map<int, Rational>& values) {
  Rational best = 0;
  for (auto it = values.begin(); it != values.end(); ++it)
    for (auto jt = std::next(it); jt != values.end(); ++jt) {
      Rational ratio = abs(it->second - jt->second) / M.dist(it->first, jt->first);
      if (ratio > best) best = ratio;
    }
  return best;
}

Rational pairing(const FreeVector& v, const LipWitness& f) {
  Rational s = 0;
  for (const auto& [i, c] : v.coeffs()) {
    if (static_cast<std::size_t>(i) >= f.values.size()) throw MissingValue(i);
    s += c * f.values[i];
  }
  return s;
}

Rational partial_pairing(const FreeVector& v, const std::map<int, Rational>& values, int base) {
  Rational s = 0;
  for (const auto& [i, c] : v.coeffs()) {
    auto it = values.find(i);
    if (it == values.end()) {
      if (i == base) continue;  // f(base) = 0
      throw MissingValue(i);
    }
    s += c * it->second;
  }
  return s;
}

FreeVector molecule(const PointedMetricSpace& M, int x, int y) {
  if (x == y) throw EqualPoints();
  const Rational& d = M.dist(x, y);
  FreeVector v;
  v.set(x, Rational(1) / d);
  v.set(y, Rational(-1) / d);
  return v;
}

namespace {

// Transportation simplex over exact rationals. Bland's rule on both the
// entering cell (first negative reduced cost in row-major order) and the
// leaving cell (smallest index among minimum-ratio candidates), so the pivot
// sequence terminates and is deterministic.
class TransportationSolver {
 public:
  TransportationSolver(std::vector<Rational> supply, std::vector<Rational> demand,
                       std::vector<std::vector<Rational>> cost)
      : a_(std::move(supply)), b_(std::move(demand)), c_(std::move(cost)),
        m_(a_.size()), n_(b_.size()) {}

  void solve() {
    northwest_corner();
    for (;;) {
      compute_potentials();
      int ei = -1, ej = -1;
      for (std::size_t i = 0; i < m_ && ei < 0; ++i)
        for (std::size_t j = 0; j < n_; ++j) {
          if (basic_[i * n_ + j]) continue;
          if (c_[i][j] - u_[i] - v_[j] < 0) {
            ei = static_cast<int>(i);
            ej = static_cast<int>(j);
            break;
          }
        }
      if (ei < 0) break;
      pivot(ei, ej);
    }
  }

  const std::vector<std::vector<Rational>>& flows() const { return x_; }
  const std::vector<Rational>& row_potentials() const { return u_; }
  const std::vector<Rational>& col_potentials() const { return v_; }

 private:
  void northwest_corner() {
    x_.assign(m_, std::vector<Rational>(n_, Rational(0)));
    basic_.assign(m_ * n_, 0);
    std::vector<Rational> a = a_, b = b_;
    std::size_t i = 0, j = 0;
    for (;;) {
      Rational t = std::min(a[i], b[j]);
      x_[i][j] = t;
      basic_[i * n_ + j] = 1;
      a[i] -= t;
      b[j] -= t;
      if (i + 1 == m_ && j + 1 == n_) break;
      if (a[i] == 0 && i + 1 < m_)
        ++i;
      else
        ++j;
    }
  }

  void compute_potentials() {
    u_.assign(m_, Rational(0));
    v_.assign(n_, Rational(0));
    std::vector<char> row_done(m_, 0), col_done(n_, 0);
    std::deque<int> queue;  // rows are 0..m-1, cols are m..m+n-1
    row_done[0] = 1;
    queue.push_back(0);
    while (!queue.empty()) {
      int node = queue.front();
      queue.pop_front();
      if (node < static_cast<int>(m_)) {
        for (std::size_t j = 0; j < n_; ++j)
          if (basic_[node * n_ + j] && !col_done[j]) {
            v_[j] = c_[node][j] - u_[node];
            col_done[j] = 1;
            queue.push_back(static_cast<int>(m_ + j));
          }
      } else {
        std::size_t j = node - m_;
        for (std::size_t i = 0; i < m_; ++i)
          if (basic_[i * n_ + j] && !row_done[i]) {
            u_[i] = c_[i][j] - v_[j];
            row_done[i] = 1;
            queue.push_back(static_cast<int>(i));
          }
      }
    }
  }

  // Unique tree path from row ei to column ej, then alternate +/- around the
  // cycle closed by the entering cell.
  void pivot(int ei, int ej) {
    const int rows = static_cast<int>(m_), total = static_cast<int>(m_ + n_);
    std::vector<int> parent(total, -2);
    std::deque<int> queue;
    parent[ei] = -1;
    queue.push_back(ei);
    while (!queue.empty()) {
      int node = queue.front();
      queue.pop_front();
      if (node == rows + ej) break;
      if (node < rows) {
        for (std::size_t j = 0; j < n_; ++j)
          if (basic_[node * n_ + j] && parent[rows + j] == -2) {
            parent[rows + j] = node;
            queue.push_back(rows + static_cast<int>(j));
          }
      } else {
        std::size_t j = node - rows;
        for (std::size_t i = 0; i < m_; ++i)
          if (basic_[i * n_ + j] && parent[i] == -2) {
            parent[i] = node;
            queue.push_back(static_cast<int>(i));
          }
      }
    }
    std::vector<std::pair<int, int>> path;  // cells from ej side back to ei
    for (int node = rows + ej; parent[node] != -1; node = parent[node]) {
      int p = parent[node];
      if (node >= rows)
        path.push_back({p, node - rows});
      else
        path.push_back({node, p - rows});
    }
    // Entering cell gets +theta; walking the path from the ej end, signs
    // alternate starting with -.
    Rational theta(-1);
    int leave_i = -1, leave_j = -1;
    for (std::size_t p = 0; p < path.size(); p += 2) {
      auto [i, j] = path[p];
      if (theta < 0 || x_[i][j] < theta ||
          (x_[i][j] == theta &&
           (i < leave_i || (i == leave_i && j < leave_j)))) {
        theta = x_[i][j];
        leave_i = i;
        leave_j = j;
      }
    }
    x_[ei][ej] += theta;
    for (std::size_t p = 0; p < path.size(); ++p) {
      auto [i, j] = path[p];
      if (p % 2 == 0)
        x_[i][j] -= theta;
      else
        x_[i][j] += theta;
    }
    basic_[ei * n_ + ej] = 1;
    basic_[leave_i * n_ + leave_j] = 0;
  }

  std::vector<Rational> a_, b_;
  std::vector<std::vector<Rational>> c_;
  std::size_t m_, n_;
  std::vector<std::vector<Rational>> x_;
  std::vector<char> basic_;
  std::vector<Rational> u_, v_;
};

}  // namespace

KrResult kr_norm(const PointedMetricSpace& M, const FreeVector& v) {
  const int base = M.base();
  std::vector<int> src_pt, snk_pt;
  std::vector<Rational> supply, demand;
  Rational imbalance = 0;
  for (const auto& [i, c] : v.coeffs()) {
    if (i < 0 || i >= M.size()) throw DentlabError("vector supported outside the space");
    if (i == base) continue;
    if (c > 0) {
      src_pt.push_back(i);
      supply.push_back(c);
    } else {
      snk_pt.push_back(i);
      demand.push_back(-c);
    }
    imbalance += c;
  }
  if (imbalance > 0) {
    snk_pt.push_back(base);
    demand.push_back(imbalance);
  } else if (imbalance < 0) {
    src_pt.push_back(base);
    supply.push_back(-imbalance);
  }

  KrResult out;
  out.dual.values.assign(M.size(), Rational(0));
  if (src_pt.empty() && snk_pt.empty()) {
    out.norm = 0;
    return out;
  }

  std::vector<std::vector<Rational>> cost(src_pt.size(), std::vector<Rational>(snk_pt.size()));
  for (std::size_t i = 0; i < src_pt.size(); ++i)
    for (std::size_t j = 0; j < snk_pt.size(); ++j) cost[i][j] = M.dist(src_pt[i], snk_pt[j]);

  TransportationSolver solver(supply, demand, cost);
  solver.solve();

  Rational total = 0;
  for (std::size_t i = 0; i < src_pt.size(); ++i)
    for (std::size_t j = 0; j < snk_pt.size(); ++j) {
      const Rational& f = solver.flows()[i][j];
      if (f > 0) {
        out.plan.arcs.push_back({src_pt[i], snk_pt[j], f});
        total += f * cost[i][j];
      }
    }
  std::sort(out.plan.arcs.begin(), out.plan.arcs.end(), [](const auto& a, const auto& b) {
    return a.from != b.from ? a.from < b.from : a.to < b.to;
  });
  out.norm = total;

  // Optimal column potentials extend to a 1-Lipschitz function on all of M by
  // the McShane formula from the sink side; it reproduces the potentials on
  // every source and sink, so it pairs with v to exactly the primal cost.
  const auto& vpot = solver.col_potentials();
  std::vector<Rational> g(M.size());
  for (int p = 0; p < M.size(); ++p) {
    bool first = true;
    for (std::size_t j = 0; j < snk_pt.size(); ++j) {
      Rational cand = M.dist(p, snk_pt[j]) - vpot[j];
      if (first || cand < g[p]) {
        g[p] = cand;
        first = false;
      }
    }
  }
  for (int p = 0; p < M.size(); ++p) out.dual.values[p] = g[p] - g[base];

  if (pairing(v, out.dual) != out.norm)
    throw DentlabError("internal: KR duality gap is nonzero");
  return out;
}

}  // namespace dentlab
