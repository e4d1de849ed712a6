#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dentlab/errors.hpp"
#include "dentlab/rational.hpp"

namespace dentlab {

/// A finite pointed metric space: opaque labels, a distinguished basepoint and
/// a dense symmetric matrix of exact rational distances. Immutable once built.
class PointedMetricSpace {
 public:
  /// Checks shape, symmetry, zero diagonal and positivity (O(n^2)). The cubic
  /// triangle sweep is in validate(); run it on anything read from outside.
  static PointedMetricSpace create(std::vector<std::string> labels, int base,
                                   std::vector<Rational> row_major_dist);

  /// Same checks plus the validating triangle sweep; throws InvalidMetric.
  static PointedMetricSpace create_validated(std::vector<std::string> labels, int base,
                                             std::vector<Rational> row_major_dist);

  // Checks every metric axiom and reports all violations with offending indices.
  static std::vector<MetricViolation> validate(const std::vector<Rational>& row_major_dist,
                                               std::size_t n);

  int size() const { return static_cast<int>(labels_.size()); }
  int base() const { return base_; }
  const std::string& label(int i) const { return labels_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }
  const Rational& dist(int i, int j) const { return dist_[static_cast<std::size_t>(i) * labels_.size() + j]; }
  const std::vector<Rational>& matrix() const { return dist_; }

  // -1 when the label does not occur.
  int index_of(const std::string& label) const;

  PointedMetricSpace rescaled(const Rational& s) const;
  PointedMetricSpace subspace(const std::vector<int>& points, int new_base) const;
  std::pair<Rational, Rational> separation_and_diameter() const;

  bool same_as(const PointedMetricSpace& other) const {
    return base_ == other.base_ && labels_ == other.labels_ && dist_ == other.dist_;
  }

 private:
  PointedMetricSpace(std::vector<std::string> labels, int base, std::vector<Rational> dist)
      : labels_(std::move(labels)), base_(base), dist_(std::move(dist)) {}

  std::vector<std::string> labels_;
  int base_;
  std::vector<Rational> dist_;
};

struct WeightedEdge {
  int u, v;
  Rational weight;
};

struct WeightedGraph {
  std::vector<std::string> labels;
  std::vector<WeightedEdge> edges;
};

/// All-pairs shortest paths as exact rationals (Dijkstra per source).
PointedMetricSpace shortest_path_metric(const WeightedGraph& g, int base);

}  // namespace dentlab
