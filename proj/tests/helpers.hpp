#pragma once

// Shared test utilities: deterministic RNG, random metric corpus, and an
// independent brute-force oracle for the KR norm (exhaustive enumeration of
// the basic feasible transport flows; no simplex, no duality).

#include <cstdint>
#include <string>
#include <vector>

#include "dentlab/free_vector.hpp"
#include "dentlab/kr_norm.hpp"
#include "dentlab/metric_space.hpp"

namespace testutil {

using dentlab::FreeVector;
using dentlab::PointedMetricSpace;
using dentlab::Rational;

struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t n) { return next() % n; }
  // dyadic rational p / 2^e with p in [1, 4*2^e]
  Rational positive_dyadic(int emax) {
    int e = static_cast<int>(below(static_cast<std::uint64_t>(emax) + 1));
    std::uint64_t denom = 1ull << e;
    std::uint64_t p = 1 + below(4 * denom);
    return Rational(static_cast<long>(p), static_cast<unsigned long>(denom));
  }
  Rational signed_dyadic(int emax) {
    Rational r = positive_dyadic(emax);
    return below(2) ? r : -r;
  }
};

// Random symmetric positive matrix repaired into a metric by shortest-path
// closure (an independent route to a valid metric).
inline PointedMetricSpace random_space(Rng& rng, int n) {
  std::vector<Rational> d(static_cast<std::size_t>(n) * n, Rational(0));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Rational w = rng.positive_dyadic(3);
      d[i * n + j] = w;
      d[j * n + i] = w;
    }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && i != k && j != k && d[i * n + k] + d[k * n + j] < d[i * n + j]) {
          d[i * n + j] = d[i * n + k] + d[k * n + j];
          d[j * n + i] = d[i * n + j];
        }
  std::vector<std::string> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = "q" + std::to_string(i);
  return PointedMetricSpace::create_validated(std::move(labels), static_cast<int>(rng.below(n)),
                                              std::move(d));
}

inline FreeVector random_vector(Rng& rng, const PointedMetricSpace& M, int support) {
  FreeVector v;
  for (int s = 0; s < support; ++s)
    v.set(static_cast<int>(rng.below(M.size())), rng.signed_dyadic(3));
  return v;
}

// Deterministic corpus of small pointed metric spaces (|M| <= 4).
inline std::vector<PointedMetricSpace> small_corpus(std::size_t at_least, std::uint64_t seed) {
  std::vector<PointedMetricSpace> out;
  auto mk = [](std::vector<std::string> labels, int base, std::vector<long> num,
               long den) {
    std::vector<Rational> d;
    for (long x : num) d.push_back(Rational(x, den));
    return PointedMetricSpace::create_validated(std::move(labels), base, std::move(d));
  };
  out.push_back(mk({"0", "1"}, 0, {0, 1, 1, 0}, 1));                    // two points
  out.push_back(mk({"0", "1"}, 0, {0, 3, 3, 0}, 2));                    // stretched pair
  out.push_back(mk({"a", "b", "c"}, 0, {0, 1, 1, 1, 0, 1, 1, 1, 0}, 1));  // equilateral
  out.push_back(mk({"a", "b", "c"}, 0, {0, 1, 2, 1, 0, 1, 2, 1, 0}, 1));  // path
  out.push_back(mk({"a", "b", "c", "d"}, 0,
                   {0, 1, 2, 3, 1, 0, 1, 2, 2, 1, 0, 1, 3, 2, 1, 0}, 1));  // long path
  out.push_back(mk({"t", "b", "x0", "x1"}, 1,
                   {0, 2, 1, 1, 2, 0, 1, 1, 1, 1, 0, 2, 1, 1, 2, 0}, 1));  // lozenge
  Rng rng(seed);
  while (out.size() < at_least) {
    int n = 2 + static_cast<int>(rng.below(3));
    out.push_back(random_space(rng, n));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force KR oracle: the norm is min cost over the vertices of the
// transportation polytope between positive and negative coefficients (the
// base absorbs the imbalance). Vertices correspond to spanning trees of the
// complete bipartite support graph; flows on a tree are forced by repeated
// leaf elimination.

inline bool oracle_tree_cost(const std::vector<Rational>& supply,
                             const std::vector<Rational>& demand,
                             const std::vector<std::vector<Rational>>& cost,
                             const std::vector<std::pair<int, int>>& cells, Rational& out) {
  const int m = static_cast<int>(supply.size()), n = static_cast<int>(demand.size());
  std::vector<Rational> a = supply, b = demand;
  std::vector<char> used(cells.size(), 0);
  std::vector<int> degree(m + n, 0);
  for (const auto& [i, j] : cells) {
    degree[i] += 1;
    degree[m + j] += 1;
  }
  Rational total = 0;
  for (std::size_t round = 0; round < cells.size(); ++round) {
    // find an unused cell incident to a node of remaining degree 1
    int pick = -1;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (used[c]) continue;
      auto [i, j] = cells[c];
      if (degree[i] == 1 || degree[m + j] == 1) {
        pick = static_cast<int>(c);
        break;
      }
    }
    if (pick < 0) return false;  // cycle: not a tree
    auto [i, j] = cells[pick];
    Rational flow = degree[i] == 1 ? a[i] : b[j];
    if (flow < 0) return false;
    total += flow * cost[i][j];
    a[i] -= flow;
    b[j] -= flow;
    used[pick] = 1;
    degree[i] -= 1;
    degree[m + j] -= 1;
  }
  for (const Rational& r : a)
    if (r != 0) return false;
  for (const Rational& r : b)
    if (r != 0) return false;
  out = total;
  return true;
}

inline Rational oracle_kr_norm(const PointedMetricSpace& M, const FreeVector& v) {
  std::vector<int> src, snk;
  std::vector<Rational> supply, demand;
  Rational imbalance = 0;
  for (const auto& [i, c] : v.coeffs()) {
    if (i == M.base()) continue;
    if (c > 0) {
      src.push_back(i);
      supply.push_back(c);
    } else {
      snk.push_back(i);
      demand.push_back(-c);
    }
    imbalance += c;
  }
  if (imbalance > 0) {
    snk.push_back(M.base());
    demand.push_back(imbalance);
  } else if (imbalance < 0) {
    src.push_back(M.base());
    supply.push_back(-imbalance);
  }
  const int m = static_cast<int>(src.size()), n = static_cast<int>(snk.size());
  if (m == 0) return Rational(0);
  std::vector<std::vector<Rational>> cost(m, std::vector<Rational>(n));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) cost[i][j] = M.dist(src[i], snk[j]);

  // all (m + n - 1)-subsets of the m*n cells
  const int cells = m * n, want = m + n - 1;
  std::vector<int> pick(want);
  for (int i = 0; i < want; ++i) pick[i] = i;
  bool found = false;
  Rational best = 0;
  for (;;) {
    std::vector<std::pair<int, int>> chosen;
    for (int c : pick) chosen.push_back({c / n, c % n});
    Rational total;
    if (oracle_tree_cost(supply, demand, cost, chosen, total)) {
      if (!found || total < best) best = total;
      found = true;
    }
    int i = want - 1;
    while (i >= 0 && pick[i] == cells - want + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < want; ++j) pick[j] = pick[j - 1] + 1;
  }
  if (!found) throw std::logic_error("oracle: no feasible tree");
  return best;
}

}  // namespace testutil
