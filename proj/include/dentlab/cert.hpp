#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dentlab/documents.hpp"
#include "dentlab/free_vector.hpp"
#include "dentlab/kr_norm.hpp"
#include "dentlab/metric_space.hpp"

namespace dentlab {

enum class CertRule { Leaf, Midpoint, Convex, Dilute, Subspace };

std::string rule_name(CertRule r);
CertRule rule_from_name(const std::string& name);

/// One node of a certificate DAG. Accepting the node means
/// target lies in d_eps^depth of the unit ball of the free space over the
/// node's metric space:
///   LEAF      a transport plan of cost <= 1 puts the target in the ball;
///   MIDPOINT  midpoint of two members a separator proves 2*eps apart;
///   CONVEX    convex combination of members at a common eps;
///   DILUTE    lambda * member + (1-lambda) * ball element, eps shrinks to
///             lambda * eps;
///   SUBSPACE  image under an inclusion that is isometric on every point the
///             sub-certificate touches.
struct CertNode {
  CertRule rule;
  std::string space_id;  // "main" or a key of DentCert::aux_spaces
  FreeVector target;
  Rational eps;
  std::uint64_t depth = 0;

  TransportPlan plan;                  // LEAF
  std::vector<std::string> children;   // MIDPOINT (2), CONVEX (>= 1)
  std::map<int, Rational> separator;   // MIDPOINT, values on its support
  std::vector<Rational> weights;       // CONVEX
  std::string child, ball;             // DILUTE
  std::vector<int> incl_map;           // SUBSPACE: child-space point -> node-space point
};

/// DAG-shaped certificate that the root target survives `depth` rounds of the
/// eps-slice derivation inside the free-space unit ball. Targets are kept
/// formally balanced (coefficients sum to zero), which makes every claim
/// basepoint-free and lets SUBSPACE ignore basepoint alignment.
struct DentCert {
  std::string space_hash;  // content hash of the main space document
  std::map<std::string, PointedMetricSpace> aux_spaces;
  std::map<std::string, CertNode> nodes;
  std::string root;
  std::string intended_ordinal;  // annotation only, never verified
};

struct VerifyOutcome {
  bool ok = false;
  Rational eps;
  std::uint64_t depth = 0;
  std::string error_kind;  // BadArithmetic | WeakSeparation | InfeasibleFlow |
                           // NotLipschitz | EpsMismatch | NonIsometricInclusion |
                           // MalformedCertificate
  std::string node;
  std::string detail;
  std::string report;  // deterministic multi-line transcript
};

/// Checks every node's arithmetic identity and witness exactly; accepts only
/// if the whole reachable DAG is sound. `expected_space_hash`, when nonempty,
/// must match the certificate's space reference.
VerifyOutcome verify(const PointedMetricSpace& main_space, const DentCert& cert,
                     const std::string& expected_space_hash = "");

Json cert_to_json(const DentCert& cert);
DentCert cert_from_json(const Json& doc);

}  // namespace dentlab
