#pragma once

#include <json.hpp>

#include <string>

#include "dentlab/constructions.hpp"
#include "dentlab/free_vector.hpp"
#include "dentlab/kr_norm.hpp"
#include "dentlab/metric_space.hpp"

namespace dentlab {

using Json = nlohmann::json;

/// Canonical byte form of any document: compact dump with sorted keys.
std::string dump_canonical(const Json& j);

/// "fnv1a64:<16 hex digits>" over the canonical byte form.
std::string content_hash(const Json& doc);

// space/v1: {"format","labels","base","dist"(+ optional "top")}, distances
// row-major as "p/q" strings. Round-trips bit-exactly.
Json space_to_json(const PointedMetricSpace& M);
Json space_to_json(const TopBottomSpace& M);
PointedMetricSpace space_from_json(const Json& doc, bool full_validation = false);
TopBottomSpace top_bottom_from_json(const Json& doc, bool full_validation = false);

Json free_vector_to_json(const FreeVector& v);
FreeVector free_vector_from_json(const Json& j);

Json plan_to_json(const TransportPlan& plan);
TransportPlan plan_from_json(const Json& j);

Json partial_fn_to_json(const std::map<int, Rational>& values);
std::map<int, Rational> partial_fn_from_json(const Json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace dentlab
