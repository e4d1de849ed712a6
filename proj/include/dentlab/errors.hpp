#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dentlab {

struct DentlabError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// metric_core
struct MetricViolation {
  enum Kind { Asymmetry, TriangleViolation, ZeroDistance, NegativeDistance, NonZeroDiagonal };
  Kind kind;
  int i = -1, j = -1, k = -1;
  std::string describe() const;
};

struct InvalidMetric : DentlabError {
  std::vector<MetricViolation> violations;
  explicit InvalidMetric(std::vector<MetricViolation> v);
};

struct DisconnectedGraph : DentlabError {
  DisconnectedGraph() : DentlabError("graph is not connected") {}
};
struct EmptySubset : DentlabError {
  EmptySubset() : DentlabError("subspace needs a nonempty point set") {}
};
struct BaseNotInSubset : DentlabError {
  BaseNotInSubset() : DentlabError("subspace base must belong to the subset") {}
};
struct SinglePoint : DentlabError {
  SinglePoint() : DentlabError("operation needs at least two points") {}
};

// constructions
struct SizeLimitExceeded : DentlabError {
  std::size_t requested, cap;
  SizeLimitExceeded(std::size_t requested_, std::size_t cap_)
      : DentlabError("construction would need " + std::to_string(requested_) +
                     " points, cap is " + std::to_string(cap_)),
        requested(requested_),
        cap(cap_) {}
};
struct EmptyInterior : DentlabError {
  EmptyInterior() : DentlabError("trim leaves no interior point") {}
};
struct MismatchedEndpointDistance : DentlabError {
  MismatchedEndpointDistance() : DentlabError("glued pieces disagree on d(top,bottom)") {}
};

// free_norm
struct EqualPoints : DentlabError {
  EqualPoints() : DentlabError("molecule needs two distinct points") {}
};
struct MissingValue : DentlabError {
  explicit MissingValue(int idx)
      : DentlabError("function has no value at point " + std::to_string(idx)) {}
};

// peeler
struct DimensionLimit : DentlabError {
  DimensionLimit(std::size_t dim, std::size_t cap)
      : DentlabError("ambient dimension " + std::to_string(dim) + " exceeds cap " +
                     std::to_string(cap)) {}
};

// ordinal
struct TooLarge : DentlabError {
  TooLarge() : DentlabError("ordinal exponent is not finite; cannot truncate") {}
};
struct NotALimit : DentlabError {
  NotALimit() : DentlabError("ordinal is not a limit ordinal") {}
};

struct ParseError : DentlabError {
  using DentlabError::DentlabError;
};

}  // namespace dentlab
