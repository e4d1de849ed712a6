#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "dentlab/free_vector.hpp"
#include "dentlab/kr_norm.hpp"
#include "dentlab/metric_space.hpp"

namespace dentlab {

inline constexpr std::size_t kDefaultDimensionCap = 5;

struct Halfspace {
  std::vector<Rational> normal;
  Rational offset;  // normal . x <= offset
};

/// Bounded polytope kept as a double-description pair: halfspaces plus exact
/// vertices with their tight incidence sets. Insertions cut with one
/// halfspace at a time; all arithmetic rational.
class DDPolytope {
 public:
  static DDPolytope box(const std::vector<Rational>& lower, const std::vector<Rational>& upper);
  static DDPolytope empty_set(int dim);

  int dim() const { return dim_; }
  bool empty() const { return coords_.empty(); }
  const std::vector<std::vector<Rational>>& vertices() const { return coords_; }
  const std::vector<Halfspace>& constraints() const { return constraints_; }

  /// Cuts with h; no-op when the halfspace does not touch the current set.
  void insert(const Halfspace& h);

 private:
  void add_vertex(std::vector<Rational> x);

  int dim_ = 0;
  std::vector<Halfspace> constraints_;
  std::vector<std::vector<Rational>> coords_;
  std::vector<std::set<int>> tight_;
};

/// Extreme points of {f : f(base) = 0, |f(x)-f(y)| <= d(x,y)}; every vertex
/// has Lipschitz constant exactly 1.
struct LipBall {
  std::vector<LipWitness> vertices;
  /// One representative per antipodal pair, nonzero, first nonzero value > 0.
  std::vector<LipWitness> family;
};
LipBall lip_ball_vertices(const PointedMetricSpace& M,
                          std::size_t dim_cap = kDefaultDimensionCap);

/// The norm-attaining direction of every molecule: (d(.,y) - d(.,x))/2,
/// shifted to vanish at the base. Each one exposes its molecule on the unit
/// sphere, so this family keeps cutting where the extreme-direction family
/// can stall on wide facets. Deduplicated up to sign.
std::vector<LipWitness> molecule_directions(const PointedMetricSpace& M);

enum class DirectionFamily { LipBall, Molecules, Both };

std::vector<LipWitness> slice_family(const PointedMetricSpace& M, const LipBall& ball,
                                     DirectionFamily which);

/// Coefficient coordinates over the non-base points, in index order.
std::vector<Rational> coords_of(const PointedMetricSpace& M, const FreeVector& v);
FreeVector vector_of(const PointedMetricSpace& M, const std::vector<Rational>& coords);

/// The free-space unit ball as a DD pair: facets are the dual-ball vertices.
DDPolytope free_ball(const PointedMetricSpace& M, const LipBall& ball);

/// Exact KR diameter of the convex hull of a vertex list, evaluated as the
/// largest dual-vertex spread.
Rational hull_diameter(const PointedMetricSpace& M, const LipBall& ball,
                       const std::vector<std::vector<Rational>>& verts);

/// Smallest threshold (to within 2^-resolution, rounded to the safe side)
/// such that the open slice {f > a} meets C in a set of diameter < eps.
/// Removing that slice is always sound.
Rational slice_threshold(const DDPolytope& C, const PointedMetricSpace& M, const LipBall& ball,
                         const LipWitness& f, const Rational& eps, int resolution);

struct PeelStep {
  std::size_t step = 0;
  // (family index, sign, threshold) for every direction cap applied
  struct Cut {
    std::size_t direction;
    int sign;
    Rational threshold;
  };
  std::vector<Cut> cuts;
  std::size_t vertex_count = 0;  // after the step
  bool emptied = false;
};

/// One derivation step: caps every slice (both signs of every family
/// direction) at its conservative threshold. The result contains the true
/// derived set.
DDPolytope peel_step(const DDPolytope& C, const PointedMetricSpace& M, const LipBall& ball,
                     const std::vector<LipWitness>& family, const Rational& eps, int resolution,
                     PeelStep* info = nullptr, int jobs = 1);

struct PeelResult {
  bool emptied = false;
  std::size_t steps = 0;  // first empty step, or the number of steps run
  std::vector<PeelStep> transcript;
  FreeVector witness;  // a surviving point when not emptied
};

/// Iterates peel_step from the unit ball; FirstEmpty(j) certifies that the
/// eps-derived set of order j is empty. StillNonempty only reports the
/// over-approximation, never a lower bound.
PeelResult peel_depth(const PointedMetricSpace& M, const Rational& eps, std::size_t max_steps,
                      int resolution = 12, std::size_t dim_cap = kDefaultDimensionCap,
                      int jobs = 1, DirectionFamily family = DirectionFamily::LipBall);

}  // namespace dentlab
