#include "dentlab/metric_space.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

namespace dentlab {

std::string MetricViolation::describe() const {
  std::ostringstream out;
  switch (kind) {
    case Asymmetry:
      out << "AsymmetryError(" << i << "," << j << ")";
      break;
    case TriangleViolation:
      out << "TriangleViolation(" << i << "," << j << "," << k << ")";
      break;
    case ZeroDistance:
      out << "ZeroDistance(" << i << "," << j << ")";
      break;
    case NegativeDistance:
      out << "NegativeDistance(" << i << "," << j << ")";
      break;
    case NonZeroDiagonal:
      out << "NonZeroDiagonal(" << i << ")";
      break;
  }
  return out.str();
}

InvalidMetric::InvalidMetric(std::vector<MetricViolation> v)
    : DentlabError([&] {
        std::string msg = "metric axioms violated:";
        for (const auto& viol : v) msg += " " + viol.describe();
        return msg;
      }()),
      violations(std::move(v)) {}

namespace {

std::vector<MetricViolation> quadratic_checks(const std::vector<Rational>& d, std::size_t n) {
  std::vector<MetricViolation> out;
  auto at = [&](std::size_t i, std::size_t j) -> const Rational& { return d[i * n + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    if (at(i, i) != 0) out.push_back({MetricViolation::NonZeroDiagonal, (int)i, (int)i, -1});
    for (std::size_t j = i + 1; j < n; ++j) {
      if (at(i, j) != at(j, i)) out.push_back({MetricViolation::Asymmetry, (int)i, (int)j, -1});
      if (at(i, j) < 0) out.push_back({MetricViolation::NegativeDistance, (int)i, (int)j, -1});
      if (at(i, j) == 0) out.push_back({MetricViolation::ZeroDistance, (int)i, (int)j, -1});
    }
  }
  return out;
}

}  // namespace

std::vector<MetricViolation> PointedMetricSpace::validate(const std::vector<Rational>& d,
                                                          std::size_t n) {
  std::vector<MetricViolation> out = quadratic_checks(d, n);
  if (!out.empty()) return out;  // triangle checks assume symmetry
  auto at = [&](std::size_t i, std::size_t j) -> const Rational& { return d[i * n + j]; };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (i != j && j != k && i != k && at(i, k) > at(i, j) + at(j, k))
          out.push_back({MetricViolation::TriangleViolation, (int)i, (int)j, (int)k});
  return out;
}

PointedMetricSpace PointedMetricSpace::create(std::vector<std::string> labels, int base,
                                              std::vector<Rational> dist) {
  const std::size_t n = labels.size();
  if (n == 0) throw DentlabError("space needs at least one point");
  if (dist.size() != n * n) throw DentlabError("distance matrix is not n x n");
  if (base < 0 || static_cast<std::size_t>(base) >= n) throw DentlabError("base index out of range");
  auto violations = quadratic_checks(dist, n);
  if (!violations.empty()) throw InvalidMetric(std::move(violations));
  return PointedMetricSpace(std::move(labels), base, std::move(dist));
}

PointedMetricSpace PointedMetricSpace::create_validated(std::vector<std::string> labels, int base,
                                                        std::vector<Rational> dist) {
  const std::size_t n = labels.size();
  if (n != 0 && dist.size() == n * n) {
    auto violations = validate(dist, n);
    if (!violations.empty()) throw InvalidMetric(std::move(violations));
  }
  return create(std::move(labels), base, std::move(dist));
}

int PointedMetricSpace::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return static_cast<int>(i);
  return -1;
}

PointedMetricSpace PointedMetricSpace::rescaled(const Rational& s) const {
  if (s <= 0) throw DentlabError("rescale factor must be positive");
  std::vector<Rational> d(dist_.size());
  for (std::size_t i = 0; i < dist_.size(); ++i) d[i] = dist_[i] * s;
  return PointedMetricSpace(labels_, base_, std::move(d));
}

PointedMetricSpace PointedMetricSpace::subspace(const std::vector<int>& points,
                                                int new_base) const {
  if (points.empty()) throw EmptySubset();
  if (std::find(points.begin(), points.end(), new_base) == points.end())
    throw BaseNotInSubset();
  const std::size_t m = points.size();
  std::vector<std::string> labels(m);
  std::vector<Rational> d(m * m);
  int base_pos = 0;
  for (std::size_t a = 0; a < m; ++a) {
    labels[a] = labels_[points[a]];
    if (points[a] == new_base) base_pos = static_cast<int>(a);
    for (std::size_t b = 0; b < m; ++b) d[a * m + b] = dist(points[a], points[b]);
  }
  return PointedMetricSpace(std::move(labels), base_pos, std::move(d));
}

std::pair<Rational, Rational> PointedMetricSpace::separation_and_diameter() const {
  const int n = size();
  if (n < 2) throw SinglePoint();
  Rational lo = dist(0, 1), hi = dist(0, 1);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Rational& d = dist(i, j);
      if (d < lo) lo = d;
      if (d > hi) hi = d;
    }
  return {lo, hi};
}

PointedMetricSpace shortest_path_metric(const WeightedGraph& g, int base) {
  const std::size_t n = g.labels.size();
  if (n == 0) throw DentlabError("graph needs at least one vertex");
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, edge id)
  bool uniform = true;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    if (edge.u < 0 || edge.v < 0 || static_cast<std::size_t>(edge.u) >= n ||
        static_cast<std::size_t>(edge.v) >= n)
      throw DentlabError("edge endpoint out of range");
    if (edge.weight <= 0) throw DentlabError("edge weights must be positive");
    if (edge.weight != g.edges[0].weight) uniform = false;
    adj[edge.u].push_back({edge.v, static_cast<int>(e)});
    adj[edge.v].push_back({edge.u, static_cast<int>(e)});
  }
  std::vector<Rational> dist(n * n);

  if (uniform && !g.edges.empty()) {
    // unit-length BFS scaled by the common weight
    const Rational& w = g.edges[0].weight;
    std::vector<long> hops(n);
    std::vector<int> queue(n);
    for (std::size_t s = 0; s < n; ++s) {
      std::fill(hops.begin(), hops.end(), -1L);
      hops[s] = 0;
      std::size_t head = 0, tail = 0;
      queue[tail++] = static_cast<int>(s);
      while (head < tail) {
        int v = queue[head++];
        for (auto [to, e] : adj[v])
          if (hops[to] < 0) {
            hops[to] = hops[v] + 1;
            queue[tail++] = to;
          }
      }
      for (std::size_t v = 0; v < n; ++v) {
        if (hops[v] < 0) throw DisconnectedGraph();
        dist[s * n + v] = w * hops[v];
      }
    }
  } else {
    std::vector<char> done(n);
    std::vector<Rational> cur(n);
    std::vector<char> seen(n);
    using Item = std::pair<Rational, int>;
    for (std::size_t s = 0; s < n; ++s) {
      std::fill(done.begin(), done.end(), 0);
      std::fill(seen.begin(), seen.end(), 0);
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      cur[s] = 0;
      seen[s] = 1;
      heap.push({Rational(0), static_cast<int>(s)});
      while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (done[v]) continue;
        done[v] = 1;
        for (auto [to, e] : adj[v]) {
          Rational nd = d + g.edges[e].weight;
          if (!seen[to] || nd < cur[to]) {
            cur[to] = nd;
            seen[to] = 1;
            heap.push({nd, to});
          }
        }
      }
      for (std::size_t v = 0; v < n; ++v) {
        if (!done[v]) throw DisconnectedGraph();
        dist[s * n + v] = cur[v];
      }
    }
  }
  return PointedMetricSpace::create(g.labels, base, std::move(dist));
}

}  // namespace dentlab
