#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run(const std::string& args) {
  std::string cmd = std::string(DENTLAB_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof(buf), pipe)) out.append(buf, n);
  int status = pclose(pipe);
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("dentlab_cli_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("cert-gen then cert-verify round trips with exit 0") {
  TempDir tmp;
  auto gen = run("cert-gen diamond --n 1 --k 2 --space-out " + tmp.file("s.json") +
                 " --cert-out " + tmp.file("c.json"));
  REQUIRE_MESSAGE(gen.exit_code == 0, gen.out);
  auto ver = run("cert-verify --space " + tmp.file("s.json") + " --cert " + tmp.file("c.json") +
                 " --report " + tmp.file("rep.txt"));
  CHECK(ver.exit_code == 0);
  CHECK(ver.out.find("VERIFIED eps=1/1 depth=2") != std::string::npos);
  CHECK(slurp(tmp.file("rep.txt")).find("verdict: VERIFIED") != std::string::npos);
}

TEST_CASE("corrupted certificates are rejected with exit 2") {
  TempDir tmp;
  run("cert-gen diamond --n 1 --k 1 --space-out " + tmp.file("s.json") + " --cert-out " +
      tmp.file("c.json"));
  std::string cert = slurp(tmp.file("c.json"));
  // halve a separator value wherever one appears
  auto pos = cert.find("\"sep\":[[");
  REQUIRE(pos != std::string::npos);
  // corrupt by swapping the first separator value string for "1/3"
  auto vstart = cert.find("\"", cert.find(",", pos));
  auto vend = cert.find("\"", vstart + 1);
  cert = cert.substr(0, vstart) + "\"1/3\"" + cert.substr(vend + 1);
  std::ofstream(tmp.file("bad.json"), std::ios::binary) << cert;
  auto ver = run("cert-verify --space " + tmp.file("s.json") + " --cert " + tmp.file("bad.json"));
  CHECK(ver.exit_code == 2);
  CHECK(ver.out.find("REJECTED") != std::string::npos);
}

TEST_CASE("peel on the two point stage reproduces the interval rank") {
  TempDir tmp;
  REQUIRE(run("build m0 --out " + tmp.file("m0.json")).exit_code == 0);
  auto peel = run("peel --space " + tmp.file("m0.json") +
                  " --eps 1/2 --max-steps 8 --transcript " + tmp.file("t.jsonl"));
  CHECK(peel.exit_code == 0);
  CHECK(peel.out.find("FirstEmpty(3)") != std::string::npos);
  std::string transcript = slurp(tmp.file("t.jsonl"));
  CHECK(transcript.find("\"type\":\"peel\"") != std::string::npos);
  CHECK(transcript.find("\"verdict\":\"FirstEmpty\"") != std::string::npos);
}

TEST_CASE("norm subcommand prints the exact rational") {
  TempDir tmp;
  run("build m0 --out " + tmp.file("m0.json"));
  auto r = run("norm --space " + tmp.file("m0.json") + " --vec 1:3/2");
  CHECK(r.exit_code == 0);
  CHECK(r.out.substr(0, 4) == "3/2\n");
  auto w = run("norm --space " + tmp.file("m0.json") + " --vec 1:1/1 --witness");
  CHECK(w.out.find("\"plan\"") != std::string::npos);
}

TEST_CASE("report on an empty directory is a bare header with exit 0") {
  TempDir tmp;
  fs::create_directories(tmp.file("empty"));
  auto r = run("report --dir " + tmp.file("empty"));
  CHECK(r.exit_code == 0);
  CHECK(r.out == "space,eps,depth,verdict\n");
}

TEST_CASE("report aggregates certificates and peel transcripts") {
  TempDir tmp;
  run("cert-gen diamond --n 1 --k 1 --space-out " + tmp.file("s.json") + " --cert-out " +
      tmp.file("c.json"));
  run("build m0 --out " + tmp.file("m0.json"));
  run("peel --space " + tmp.file("m0.json") + " --eps 1/1 --max-steps 4 --transcript " +
      tmp.file("p.jsonl"));
  auto r = run("report --dir " + tmp.path.string() + " --out " + tmp.file("report.csv"));
  CHECK(r.exit_code == 0);
  std::string csv = slurp(tmp.file("report.csv"));
  CHECK(csv.find("space,eps,depth,verdict") == 0);
  CHECK(csv.find(",1/1,1,Verified") != std::string::npos);
  CHECK(csv.find(",1/1,2,FirstEmpty") != std::string::npos);
}

TEST_CASE("identical invocations write byte-identical artifacts") {
  TempDir tmp;
  run("build diamond --n 2 --b 3 --out " + tmp.file("a.json"));
  run("build diamond --n 2 --b 3 --out " + tmp.file("b.json"));
  CHECK(slurp(tmp.file("a.json")) == slurp(tmp.file("b.json")));
  run("cert-gen malpha --alpha w*1 --piece 2 --space-out " + tmp.file("s1.json") +
      " --cert-out " + tmp.file("c1.json"));
  run("cert-gen malpha --alpha w*1 --piece 2 --space-out " + tmp.file("s2.json") +
      " --cert-out " + tmp.file("c2.json"));
  CHECK(slurp(tmp.file("s1.json")) == slurp(tmp.file("s2.json")));
  CHECK(slurp(tmp.file("c1.json")) == slurp(tmp.file("c2.json")));
}

TEST_CASE("malpha certificates verify through the CLI") {
  TempDir tmp;
  auto gen = run("cert-gen malpha --alpha w*1+1 --eps w*1:1/4 --piece 3 --space-out " +
                 tmp.file("s.json") + " --cert-out " + tmp.file("c.json"));
  REQUIRE_MESSAGE(gen.exit_code == 0, gen.out);
  auto ver = run("cert-verify --space " + tmp.file("s.json") + " --cert " + tmp.file("c.json"));
  CHECK(ver.exit_code == 0);
  // k = 3, piece 3 has k_n = 9, depth = (9 - 3) + 1 successor
  CHECK(ver.out.find("VERIFIED eps=3/4 depth=7") != std::string::npos);
}

TEST_CASE("usage errors exit with 1 and caps with 3") {
  CHECK(run("no-such-command").exit_code == 1);
  CHECK(run("build diamond --n 1").exit_code == 1);  // missing --b
  CHECK(run("build diamond --n 9 --b 2").exit_code == 3);
  TempDir tmp;
  run("build diamond --n 1 --b 5 --out " + tmp.file("d.json"));  // 7 points, dimension 6
  CHECK(run("peel --space " + tmp.file("d.json") + " --eps 1/2").exit_code == 3);
}

TEST_CASE("validate subcommand rejects broken metrics") {
  TempDir tmp;
  std::ofstream(tmp.file("bad.json"), std::ios::binary)
      << R"({"base":0,"dist":["0/1","1/1","3/1","1/1","0/1","1/1","3/1","1/1","0/1"],)"
      << R"("format":"space/v1","labels":["a","b","c"]})";
  auto r = run("build space --in " + tmp.file("bad.json"));
  CHECK(r.exit_code == 1);
  CHECK(r.out.find("riangle") != std::string::npos);
}

TEST_CASE("config file supplies defaults but flags win") {
  TempDir tmp;
  std::ofstream(tmp.file("peel.ini"), std::ios::binary) << "[peel]\nmax-steps=2\neps=1/1\n";
  run("build m0 --out " + tmp.file("m0.json"));
  auto r = run("--config " + tmp.file("peel.ini") + " peel --space " + tmp.file("m0.json"));
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("FirstEmpty(2)") != std::string::npos);
  auto r2 = run("--config " + tmp.file("peel.ini") + " peel --space " + tmp.file("m0.json") +
                " --eps 1/4 --max-steps 8");
  CHECK(r2.out.find("FirstEmpty(5)") != std::string::npos);
}
