// dentlab: exact Kantorovich-Rubinstein norms, slice-derivation certificates
// and a sound peeling engine over finite pointed metric spaces.
//
// Exit codes: 0 success / verified, 1 usage error, 2 verification rejection,
// 3 size or dimension cap exceeded.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "dentlab/cert.hpp"
#include "dentlab/cert_gen.hpp"
#include "dentlab/constructions.hpp"
#include "dentlab/documents.hpp"
#include "dentlab/kr_norm.hpp"
#include "dentlab/ordinal.hpp"
#include "dentlab/peeler.hpp"

namespace fs = std::filesystem;
using namespace dentlab;

namespace {

constexpr int kExitOk = 0, kExitUsage = 1, kExitRejected = 2, kExitCap = 3;

void emit(const std::string& path, const Json& doc, const char* what) {
  std::string bytes = dump_canonical(doc) + "\n";
  if (path.empty() || path == "-") {
    std::cout << bytes;
  } else {
    write_text_file(path, bytes);
    std::cout << what << " " << path << " " << content_hash(doc) << "\n";
  }
}

Json load_json(const std::string& path) {
  return Json::parse(read_text_file(path));
}

// "w:1/4,w*2:1/8" -> canonical limit name -> k with eps = 2^(1-k)
std::map<std::string, std::uint64_t> parse_eps_schedule(const std::string& text) {
  std::map<std::string, std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto colon = item.rfind(':');
    if (colon == std::string::npos)
      throw ParseError("eps entry '" + item + "' is not ordinal:value");
    Ordinal gamma = Ordinal::parse(item.substr(0, colon));
    Rational eps = parse_rational(item.substr(colon + 1));
    // eps must be 2^(1-k)
    std::uint64_t k = 1;
    Rational probe(1);
    while (probe > eps && k < 64) {
      probe /= 2;
      ++k;
    }
    if (probe != eps) throw ParseError("eps must be a power 2^(1-k), got " + rat_to_string(eps));
    out[gamma.to_string()] = k;
  }
  return out;
}

FreeVector parse_vector(const std::string& text) {
  FreeVector v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto colon = item.find(':');
    if (colon == std::string::npos)
      throw ParseError("coefficient entry '" + item + "' is not index:value");
    int idx = std::stoi(item.substr(0, colon));
    v.set(idx, v.coeff(idx) + parse_rational(item.substr(colon + 1)));
  }
  return v;
}

MAlphaSpec malpha_spec_from(const std::string& alpha, const std::string& eps,
                            std::uint64_t trunc, std::size_t cap) {
  MAlphaSpec spec;
  spec.alpha = Ordinal::parse(alpha);
  spec.eps_k_by_limit = parse_eps_schedule(eps);
  spec.truncation = trunc;
  spec.cap = cap;
  return spec;
}

int run_peel(const std::string& space_path, const std::string& eps_text,
             const std::string& directions, std::size_t max_steps, int resolution, int jobs,
             const std::string& transcript_path) {
  Json space_doc = load_json(space_path);
  PointedMetricSpace M = space_from_json(space_doc);
  Rational eps = parse_rational(eps_text);
  DirectionFamily family = DirectionFamily::LipBall;
  if (directions == "molecules") family = DirectionFamily::Molecules;
  else if (directions == "both") family = DirectionFamily::Both;
  else if (directions != "lipball") throw ParseError("unknown direction family " + directions);

  PeelResult r = peel_depth(M, eps, max_steps, resolution, kDefaultDimensionCap, jobs, family);

  std::ostringstream lines;
  {
    Json head;
    head["type"] = "peel";
    head["space"] = content_hash(space_doc);
    head["eps"] = rat_to_string(eps);
    head["resolution"] = resolution;
    head["directions"] = directions;
    head["max_steps"] = max_steps;
    lines << dump_canonical(head) << "\n";
  }
  for (const auto& step : r.transcript) {
    Json j;
    j["type"] = "step";
    j["step"] = step.step;
    Json cuts = Json::array();
    for (const auto& c : step.cuts)
      cuts.push_back(Json::array({c.direction, c.sign, rat_to_string(c.threshold)}));
    j["cuts"] = std::move(cuts);
    j["vertices"] = step.vertex_count;
    j["empty"] = step.emptied;
    lines << dump_canonical(j) << "\n";
  }
  {
    Json tail;
    tail["type"] = "result";
    tail["verdict"] = r.emptied ? "FirstEmpty" : "StillNonempty";
    tail["steps"] = r.steps;
    if (!r.emptied) tail["witness"] = free_vector_to_json(r.witness);
    lines << dump_canonical(tail) << "\n";
  }
  if (!transcript_path.empty()) write_text_file(transcript_path, lines.str());

  if (r.emptied)
    std::cout << "FirstEmpty(" << r.steps << ")\n";
  else
    std::cout << "StillNonempty(" << r.steps << ")\n";
  return kExitOk;
}

int run_report(const std::string& dir, const std::string& out_path) {
  std::ostringstream csv;
  csv << "space,eps,depth,verdict\n";
  std::vector<std::string> files;
  if (!dir.empty() && fs::exists(dir))
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file()) files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());

  // index spaces by content hash, then verify certificates against them
  std::map<std::string, PointedMetricSpace> spaces;
  for (const auto& f : files) {
    if (f.size() < 5 || f.substr(f.size() - 5) != ".json") continue;
    try {
      Json doc = load_json(f);
      if (doc.is_object() && doc.value("format", "") == "space/v1")
        spaces.emplace(content_hash(doc), space_from_json(doc));
    } catch (...) {
    }
  }
  for (const auto& f : files) {
    try {
      if (f.size() > 6 && f.substr(f.size() - 6) == ".jsonl") {
        std::istringstream in(read_text_file(f));
        std::string line;
        std::string space, eps, verdict;
        std::uint64_t steps = 0;
        while (std::getline(in, line)) {
          if (line.empty()) continue;
          Json j = Json::parse(line);
          if (j.value("type", "") == "peel") {
            space = j.value("space", "");
            eps = j.value("eps", "");
          } else if (j.value("type", "") == "result") {
            verdict = j.value("verdict", "");
            steps = j.value("steps", 0ull);
          }
        }
        if (!verdict.empty())
          csv << space << "," << eps << "," << steps << "," << verdict << "\n";
      } else if (f.size() > 5 && f.substr(f.size() - 5) == ".json") {
        Json doc = load_json(f);
        if (!doc.is_object() || doc.value("format", "") != "cert/v1") continue;
        DentCert cert = cert_from_json(doc);
        auto it = spaces.find(cert.space_hash);
        if (it == spaces.end()) {
          csv << cert.space_hash << ",,," << "SpaceMissing" << "\n";
          continue;
        }
        auto v = verify(it->second, cert, cert.space_hash);
        if (v.ok)
          csv << cert.space_hash << "," << rat_to_string(v.eps) << "," << v.depth
              << ",Verified\n";
        else
          csv << cert.space_hash << ",,," << "Rejected:" << v.error_kind << "\n";
      }
    } catch (...) {
      // unreadable artifacts are skipped, the report covers what parses
    }
  }
  if (out_path.empty() || out_path == "-")
    std::cout << csv.str();
  else
    write_text_file(out_path, csv.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact free-space norms, dentability certificates and peeling"};
  // key=value config with one [section] per subcommand; explicit flags win
  app.set_config("--config");
  app.require_subcommand(1);

  // ---- build ----------------------------------------------------------
  auto* build = app.add_subcommand("build", "construct a metric space document");
  build->require_subcommand(1);
  std::string out_path, alpha_text = "w*1", eps_text;
  std::uint64_t trunc = 3;
  std::size_t cap = kDefaultPointCap;

  auto* b_diamond = build->add_subcommand("diamond", "level-n diamond with b branches");
  int dn = 1, db = 2;
  b_diamond->add_option("--n", dn, "level")->required();
  b_diamond->add_option("--b", db, "branching")->required();
  b_diamond->add_option("--cap", cap, "point cap");
  b_diamond->add_option("--out", out_path, "output file");
  b_diamond->callback([&] {
    emit(out_path, space_to_json(diamond({dn, db}, cap)), "space");
  });

  auto* b_malpha = build->add_subcommand("malpha", "truncated transfinite stage");
  b_malpha->add_option("--alpha", alpha_text, "ordinal in CNF, e.g. w*1+2")->required();
  b_malpha->add_option("--eps", eps_text, "per-limit eps, e.g. w*1:1/4");
  b_malpha->add_option("--trunc", trunc, "pieces per limit step");
  b_malpha->add_option("--cap", cap, "point cap");
  b_malpha->add_option("--out", out_path, "output file");
  b_malpha->callback([&] {
    auto spec = malpha_spec_from(alpha_text, eps_text, trunc, cap);
    auto b = m_alpha(spec);
    emit(out_path, space_to_json(b->space), "space");
  });

  auto* b_chain = build->add_subcommand("chain", "chain of 2^l rescaled copies");
  std::string in_path, scale_text = "1/2";
  int chain_l = 1;
  b_chain->add_option("--space", in_path, "top-bottom space document")->required();
  b_chain->add_option("--l", chain_l, "2^l copies")->required();
  b_chain->add_option("--s", scale_text, "scale factor p/q");
  b_chain->add_option("--cap", cap, "point cap");
  b_chain->add_option("--out", out_path, "output file");
  b_chain->callback([&] {
    auto tb = top_bottom_from_json(load_json(in_path));
    emit(out_path, space_to_json(chain(tb, chain_l, parse_rational(scale_text), cap)), "space");
  });

  auto* b_m0 = build->add_subcommand("m0", "the two point space {0,1}");
  b_m0->add_option("--out", out_path, "output file");
  b_m0->callback([&] {
    auto sp = PointedMetricSpace::create(
        {"0", "1"}, 0, {Rational(0), Rational(1), Rational(1), Rational(0)});
    emit(out_path, space_to_json(TopBottomSpace(std::move(sp), 1)), "space");
  });

  auto* b_space = build->add_subcommand("space", "validate and canonicalize a space document");
  b_space->add_option("--in", in_path, "space document")->required();
  b_space->add_option("--out", out_path, "output file");
  b_space->callback([&] {
    Json doc = load_json(in_path);
    PointedMetricSpace M = space_from_json(doc, /*full_validation=*/true);
    if (doc.contains("top"))
      emit(out_path, space_to_json(TopBottomSpace(M, doc.at("top").get<int>())), "space");
    else
      emit(out_path, space_to_json(M), "space");
  });

  // ---- norm -----------------------------------------------------------
  auto* norm_cmd = app.add_subcommand("norm", "exact KR norm of a coefficient vector");
  std::string vec_text;
  bool witness = false;
  norm_cmd->add_option("--space", in_path, "space document")->required();
  norm_cmd->add_option("--vec", vec_text, "coefficients index:p/q,...")->required();
  norm_cmd->add_flag("--witness", witness, "dump the optimal plan and dual");
  norm_cmd->callback([&] {
    PointedMetricSpace M = space_from_json(load_json(in_path));
    FreeVector v = parse_vector(vec_text);
    auto r = kr_norm(M, v);
    std::cout << rat_to_string(r.norm) << "\n";
    if (witness) {
      Json j;
      j["plan"] = plan_to_json(r.plan);
      Json dual = Json::array();
      for (const Rational& val : r.dual.values) dual.push_back(rat_to_string(val));
      j["dual"] = std::move(dual);
      std::cout << dump_canonical(j) << "\n";
    }
  });

  // ---- cert-gen -------------------------------------------------------
  auto* cg = app.add_subcommand("cert-gen", "generate a dentability certificate");
  cg->require_subcommand(1);
  std::string space_out, cert_out;
  auto* cg_diamond = cg->add_subcommand("diamond", "lower-bound certificate for diamonds");
  int gk = 1;
  cg_diamond->add_option("--n", dn, "level")->required();
  cg_diamond->add_option("--k", gk, "branch budget 2^k")->required();
  cg_diamond->add_option("--cap", cap, "point cap");
  cg_diamond->add_option("--space-out", space_out, "write the diamond space here");
  cg_diamond->add_option("--cert-out", cert_out, "write the certificate here");
  cg_diamond->callback([&] {
    auto build_res = diamond_build({dn, 1 << gk}, cap);
    auto cert = gen_diamond_cert(build_res, gk);
    emit(space_out, space_to_json(build_res.space), "space");
    emit(cert_out, cert_to_json(cert), "cert");
  });
  auto* cg_malpha = cg->add_subcommand("malpha", "lower-bound certificate for a stage");
  std::uint64_t piece = 1;
  cg_malpha->add_option("--alpha", alpha_text, "ordinal in CNF")->required();
  cg_malpha->add_option("--eps", eps_text, "per-limit eps schedule");
  cg_malpha->add_option("--trunc", trunc, "pieces per limit step");
  cg_malpha->add_option("--piece", piece, "piece index at the outermost limit");
  cg_malpha->add_option("--cap", cap, "point cap");
  cg_malpha->add_option("--space-out", space_out, "write the stage space here");
  cg_malpha->add_option("--cert-out", cert_out, "write the certificate here");
  cg_malpha->callback([&] {
    auto spec = malpha_spec_from(alpha_text, eps_text, trunc, cap);
    auto b = m_alpha(spec);
    auto cert = gen_malpha_cert(*b, piece);
    emit(space_out, space_to_json(b->space), "space");
    emit(cert_out, cert_to_json(cert), "cert");
  });

  // ---- cert-verify ----------------------------------------------------
  auto* cv = app.add_subcommand("cert-verify", "check a certificate document");
  std::string cert_path, report_path;
  bool full_validate = false;
  cv->add_option("--space", in_path, "space document")->required();
  cv->add_option("--cert", cert_path, "certificate document")->required();
  cv->add_option("--report", report_path, "write the verification transcript here");
  cv->add_flag("--validate", full_validate, "run the cubic metric validation first");
  int verify_exit = kExitOk;
  cv->callback([&] {
    Json space_doc = load_json(in_path);
    PointedMetricSpace M = space_from_json(space_doc, full_validate);
    DentCert cert = cert_from_json(load_json(cert_path));
    auto out = verify(M, cert, content_hash(space_doc));
    if (!report_path.empty()) write_text_file(report_path, out.report);
    if (out.ok) {
      std::cout << "VERIFIED eps=" << rat_to_string(out.eps) << " depth=" << out.depth << "\n";
    } else {
      std::cout << "REJECTED node=" << out.node << " error=" << out.error_kind << " "
                << out.detail << "\n";
      verify_exit = kExitRejected;
    }
  });

  // ---- peel -----------------------------------------------------------
  auto* peel_cmd = app.add_subcommand("peel", "iterated slice removal upper bounds");
  std::string peel_eps = "1/2", directions = "lipball", transcript_path;
  std::size_t max_steps = 16;
  int resolution = 12, jobs = 1, peel_exit = kExitOk;
  peel_cmd->add_option("--space", in_path, "space document")->required();
  peel_cmd->add_option("--eps", peel_eps, "slice width p/q");
  peel_cmd->add_option("--directions", directions, "lipball | molecules | both");
  peel_cmd->add_option("--max-steps", max_steps, "steps before giving up");
  peel_cmd->add_option("--resolution", resolution, "bisection resolution 2^-r");
  peel_cmd->add_option("--jobs", jobs, "parallel slice evaluations");
  peel_cmd->add_option("--transcript", transcript_path, "JSON-lines transcript file");
  peel_cmd->callback([&] {
    peel_exit =
        run_peel(in_path, peel_eps, directions, max_steps, resolution, jobs, transcript_path);
  });

  // ---- report ---------------------------------------------------------
  auto* report_cmd = app.add_subcommand("report", "aggregate artifacts into a CSV table");
  std::string report_dir, report_out;
  report_cmd->add_option("--dir", report_dir, "directory of artifacts")->required();
  report_cmd->add_option("--out", report_out, "CSV output path");
  report_cmd->callback([&] { run_report(report_dir, report_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const SizeLimitExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCap;
  } catch (const DimensionLimit& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCap;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (verify_exit != kExitOk) return verify_exit;
  if (peel_exit != kExitOk) return peel_exit;
  return kExitOk;
}
