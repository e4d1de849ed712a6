#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dentlab/metric_space.hpp"
#include "dentlab/ordinal.hpp"

namespace dentlab {

inline constexpr std::size_t kDefaultPointCap = 5000;

/// A pointed metric space with two designated endpoints; the bottom is the
/// basepoint and the top is a second distinguished point.
struct TopBottomSpace {
  PointedMetricSpace space;
  int top;

  TopBottomSpace(PointedMetricSpace s, int top_) : space(std::move(s)), top(top_) {
    if (top < 0 || top >= space.size()) throw DentlabError("top index out of range");
    if (top == space.base()) throw DentlabError("top and bottom must differ");
  }
  int bottom() const { return space.base(); }
  const Rational& endpoint_distance() const { return space.dist(top, bottom()); }
};

struct DiamondSpec {
  int level;      // n >= 1
  int branching;  // middle points per lozenge; >= 1 (1 degenerates to a path)
};

/// Diamond graph build with the data the certificate generator walks: each
/// level keeps the maps embedding the previous level into its 2*branching
/// edge copies.
struct DiamondBuild {
  TopBottomSpace space;           // shortest-path metric, d(top,bottom) = 2^level
  std::vector<int> middles;       // top-level x_i indices
  std::vector<std::vector<int>> plus_maps;   // [i][inner point] -> index; copy for edge {t, x_i}
  std::vector<std::vector<int>> minus_maps;  // copy for edge {x_i, b}
  std::shared_ptr<DiamondBuild> inner;       // level - 1 (null at level 1)
  WeightedGraph graph;
};

DiamondBuild diamond_build(const DiamondSpec& spec, std::size_t cap = kDefaultPointCap);
TopBottomSpace diamond(const DiamondSpec& spec, std::size_t cap = kDefaultPointCap);

/// Chain of 2^l copies of (M, s*d), tops glued to the next bottom. Exposes
/// where every copy landed: copy_maps[c][p] is the chain index of point p of
/// copy c (bottom copy first) and junctions runs bottom .. top (2^l + 1 ids).
struct ChainResult {
  TopBottomSpace space;
  std::vector<std::vector<int>> copy_maps;
  std::vector<int> junctions;
};

ChainResult chain_with_embedding(const TopBottomSpace& M, int l, const Rational& s,
                                 std::size_t cap = kDefaultPointCap);
TopBottomSpace chain(const TopBottomSpace& M, int l, const Rational& s,
                     std::size_t cap = kDefaultPointCap);

/// Basepoints identified, cross distances through the common origin.
PointedMetricSpace l1_sum(const std::vector<PointedMetricSpace>& spaces);

/// Keeps top, bottom and every point at distance >= 2^-margin_k from both.
struct TrimResult {
  TopBottomSpace space;
  std::vector<int> old_to_new;  // -1 for dropped points
};
TrimResult trim_P_with_map(const TopBottomSpace& M, int margin_k);
TopBottomSpace trim_P(const TopBottomSpace& M, int margin_k);

/// Shared top and bottom; cross-piece distance is the cheaper route through
/// either shared endpoint.
struct GlueResult {
  TopBottomSpace space;
  std::vector<std::vector<int>> piece_maps;
};
GlueResult glue_top_bottom_with_maps(const std::vector<TopBottomSpace>& pieces);
TopBottomSpace glue_top_bottom(const std::vector<TopBottomSpace>& pieces);

struct MAlphaSpec {
  Ordinal alpha;
  /// eps at a limit ordinal gamma is 2^(1-k) for k = eps_k_by_limit[gamma
  /// printed in CNF]; limits not listed get the smallest uniform k >= 2 that
  /// keeps the slack product at least 1/2.
  std::map<std::string, std::uint64_t> eps_k_by_limit;
  std::uint64_t truncation = 3;  // pieces glued per limit step
  std::size_t cap = kDefaultPointCap;
};

/// Built truncation of an M_alpha stage together with the recipe the
/// certificate generator replays: chains expose copy embeddings, limits
/// expose the surviving span of every glued piece.
struct MAlphaBuild {
  Ordinal alpha;
  Rational mu;  // slack product over the limit ordinals this build touches
  TopBottomSpace space;

  // alpha = core.alpha + finite_part, realized as a chain of 2^finite_part
  // copies of the core (finite_part == 0 means this node IS the core).
  std::uint64_t finite_part = 0;
  std::shared_ptr<MAlphaBuild> core;
  std::vector<std::vector<int>> chain_copy_maps;
  std::vector<int> chain_junctions;

  // Limit structure (set when alpha is a limit ordinal).
  std::uint64_t limit_k = 0;  // eps_alpha = 2^(1-k)
  struct Piece {
    Ordinal gamma;
    std::uint64_t k_n;
    std::shared_ptr<MAlphaBuild> gamma_build;
    std::vector<std::vector<int>> copy_maps;  // surviving copies, bottom to top
    std::vector<int> junctions;               // v .. u inside this node's space
    int u = -1, v = -1;                       // nearest survivors to top / bottom
  };
  std::vector<Piece> pieces;
};

std::shared_ptr<MAlphaBuild> m_alpha(const MAlphaSpec& spec);

/// Predicted point count of the truncated build, without building it.
std::uint64_t m_alpha_point_count(const MAlphaSpec& spec);

/// Per-coordinate nearest integer, ties to even.
std::vector<BigInt> grid_round(const std::vector<Rational>& z);

/// (min, max) of d_target(image(x), image(y)) / d_M(x, y) over pairs;
/// collapsed pairs contribute a 0 lower bound.
std::pair<Rational, Rational> distortion_of_map(const PointedMetricSpace& M,
                                                const std::vector<int>& image,
                                                const PointedMetricSpace& target);

}  // namespace dentlab
