#pragma once

#include <cstdint>

#include "dentlab/cert.hpp"
#include "dentlab/constructions.hpp"

namespace dentlab {

/// Certificate that the end-to-end molecule of the level-n diamond with 2^k
/// branches survives n*k slice derivations at eps = 1: each level embeds the
/// previous level's certificate into every edge copy, averages the branch
/// molecules along a binary tree of midpoints separated by half-split block
/// functions, and closes with the convex midpoint of the two halves.
DentCert gen_diamond_cert(const DiamondBuild& build, int k);
DentCert gen_diamond_cert(int n, int k, std::size_t cap = kDefaultPointCap);

/// Lifts a certificate for the end-to-end molecule of M through a chain of
/// 2^l copies of (M, s*d) sitting inside W: copies carry rescaled images of
/// the inner certificate, adjacent spans merge by midpoints separated by
/// distance ramps at the junctions. Root depth is inner depth + l.
DentCert gen_chain_cert(const DentCert& inner, const PointedMetricSpace& inner_space, int l,
                        const Rational& s, const PointedMetricSpace& W,
                        const std::vector<std::vector<int>>& copy_maps,
                        const std::vector<int>& junctions, const std::string& w_hash);

/// Convenience: builds the chain of 2^l copies of (M, s*d) itself as the
/// enclosing space and lifts the certificate into it.
struct ChainCertResult {
  TopBottomSpace space;
  DentCert cert;
};
ChainCertResult gen_chain_cert_over_chain(const DentCert& inner, const TopBottomSpace& M, int l,
                                          const Rational& s, std::size_t cap = kDefaultPointCap);

/// Certificate for the end-to-end molecule of a truncated M_alpha stage,
/// routed through the given 1-based piece at the outermost limit (inner
/// limits use their deepest piece). Root eps is the stage's exact slack
/// product; depth adds k_n - k at the limit and 1 per successor.
DentCert gen_malpha_cert(const MAlphaBuild& build, std::uint64_t piece_index);

enum class MutationKind { WeakenSeparator, PerturbConvexWeight, CorruptLeafFlow };

/// Deliberately corrupted copy for negative testing; the seed picks the
/// mutated node deterministically.
DentCert mutate(const DentCert& cert, MutationKind kind, std::uint64_t seed);

}  // namespace dentlab
