#pragma once

#include <map>
#include <vector>

#include "dentlab/free_vector.hpp"
#include "dentlab/metric_space.hpp"

namespace dentlab {

/// Nonnegative flow on ordered point pairs. Feasible for v when the net
/// divergence at every non-base point equals v's coefficient there; the base
/// absorbs the imbalance. Its cost is an upper bound on the KR norm.
struct TransportPlan {
  struct Arc {
    int from, to;
    Rational flow;
  };
  std::vector<Arc> arcs;

  Rational cost(const PointedMetricSpace& M) const;
  /// Net outflow minus inflow per point (only points touched by arcs appear).
  std::map<int, Rational> divergence() const;
};

/// A real function on all points of a space, vanishing at the base. Any such
/// function with Lipschitz constant <= 1 pairs to a lower bound on the norm.
struct LipWitness {
  std::vector<Rational> values;  // indexed by point
};

Rational lip_constant(const PointedMetricSpace& M, const LipWitness& f);

/// Largest |f(x)-f(y)|/d(x,y) over pairs of points where f is defined.
/// McShane extension makes any partial 1-Lipschitz function total, so this is
/// the right feasibility check for separators stored on their support.
Rational partial_lip_constant(const PointedMetricSpace& M, const std::map<int, Rational>& values);

Rational pairing(const FreeVector& v, const LipWitness& f);
/// Pairing against a partial function; throws MissingValue when the support is
/// not covered. The basepoint coefficient contributes f(base) if stored, else 0.
Rational partial_pairing(const FreeVector& v, const std::map<int, Rational>& values, int base);

FreeVector molecule(const PointedMetricSpace& M, int x, int y);

struct KrResult {
  Rational norm;
  TransportPlan plan;
  LipWitness dual;
};

/// Exact Kantorovich-Rubinstein norm of v, solved as a rational transportation
/// LP between positive and negative coefficients with the base absorbing the
/// imbalance. Returns the optimal plan and a 1-Lipschitz dual function with
/// pairing(v, dual) == cost(plan) == norm; the duality gap is checked to be
/// exactly zero before returning.
KrResult kr_norm(const PointedMetricSpace& M, const FreeVector& v);

}  // namespace dentlab
