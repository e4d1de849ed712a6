#include "dentlab/documents.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dentlab {

std::string dump_canonical(const Json& j) { return j.dump(); }

std::string content_hash(const Json& doc) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(dump_canonical(doc))));
  return buf;
}

Json space_to_json(const PointedMetricSpace& M) {
  Json doc;
  doc["format"] = "space/v1";
  doc["labels"] = M.labels();
  doc["base"] = M.base();
  Json dist = Json::array();
  for (const Rational& d : M.matrix()) dist.push_back(rat_to_string(d));
  doc["dist"] = std::move(dist);
  return doc;
}

Json space_to_json(const TopBottomSpace& M) {
  Json doc = space_to_json(M.space);
  doc["top"] = M.top;
  return doc;
}

PointedMetricSpace space_from_json(const Json& doc, bool full_validation) {
  if (!doc.is_object() || doc.value("format", "") != "space/v1")
    throw ParseError("not a space/v1 document");
  std::vector<std::string> labels = doc.at("labels").get<std::vector<std::string>>();
  int base = doc.at("base").get<int>();
  const Json& dist = doc.at("dist");
  std::vector<Rational> d;
  d.reserve(dist.size());
  for (const auto& entry : dist) d.push_back(parse_rational(entry.get<std::string>()));
  return full_validation ? PointedMetricSpace::create_validated(std::move(labels), base, std::move(d))
                         : PointedMetricSpace::create(std::move(labels), base, std::move(d));
}

TopBottomSpace top_bottom_from_json(const Json& doc, bool full_validation) {
  if (!doc.contains("top")) throw ParseError("space document has no top point");
  return TopBottomSpace(space_from_json(doc, full_validation), doc.at("top").get<int>());
}

Json free_vector_to_json(const FreeVector& v) {
  Json j = Json::array();
  for (const auto& [i, c] : v.coeffs()) j.push_back(Json::array({i, rat_to_string(c)}));
  return j;
}

FreeVector free_vector_from_json(const Json& j) {
  FreeVector v;
  for (const auto& entry : j) {
    int i = entry.at(0).get<int>();
    if (v.coeff(i) != 0) throw ParseError("duplicate index in coefficient list");
    v.set(i, parse_rational(entry.at(1).get<std::string>()));
  }
  return v;
}

Json plan_to_json(const TransportPlan& plan) {
  Json j = Json::array();
  for (const auto& a : plan.arcs)
    j.push_back(Json::array({a.from, a.to, rat_to_string(a.flow)}));
  return j;
}

TransportPlan plan_from_json(const Json& j) {
  TransportPlan plan;
  for (const auto& entry : j)
    plan.arcs.push_back({entry.at(0).get<int>(), entry.at(1).get<int>(),
                         parse_rational(entry.at(2).get<std::string>())});
  return plan;
}

Json partial_fn_to_json(const std::map<int, Rational>& values) {
  Json j = Json::array();
  for (const auto& [i, val] : values) j.push_back(Json::array({i, rat_to_string(val)}));
  return j;
}

std::map<int, Rational> partial_fn_from_json(const Json& j) {
  std::map<int, Rational> values;
  for (const auto& entry : j)
    values[entry.at(0).get<int>()] = parse_rational(entry.at(1).get<std::string>());
  return values;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DentlabError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DentlabError("cannot write " + path);
  out << contents;
}

}  // namespace dentlab
