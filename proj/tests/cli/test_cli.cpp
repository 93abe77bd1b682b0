#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

Run cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " '" CIRL_CLI_PATH "' " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) r.output += buf.data();
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cirl_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

const char* kTiny = " --max-outer 2 --inner-iters 10";

struct Cleanup {
  ~Cleanup() { fs::remove_all(fs::temp_directory_path() / ("cirl_cli_" + std::to_string(::getpid()))); }
} cleanup;

}  // namespace

TEST_CASE("recover writes three artifacts") {
  const auto out = scratch("recover");
  const Run r = cli("recover --algo co-l1 --gen finite-diff --alpha 27 --mn 0.25 --snr 40 --seed 7 --out " +
                    out.string());
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "trace.csv"));
  CHECK(fs::exists(out / "xhat.pgm"));
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(std::distance(fs::directory_iterator(out), fs::directory_iterator{}) == 3);
  const json m = json::parse(slurp(out / "manifest.json"));
  CHECK(m["command"] == "recover");
  CHECK(m["args"]["seed"] == 7);
  CHECK(m["args"]["alpha"] == 27.0);
  CHECK(!m["args"].contains("out"));
  CHECK(m.contains("version"));
  // 16 iterations x 2 bands plus the header.
  CHECK(lines(slurp(out / "trace.csv")) == 1 + 16 * 2);
}

TEST_CASE("usage errors exit with 2") {
  Run r = cli("recover --gen finite-diff");
  CHECK(r.code == 2);
  CHECK(r.output.find("--algo") != std::string::npos);
  CHECK(cli("recover --algo l1 --no-such-flag 3").code == 2);
  CHECK(cli("recover --algo nonsense --out " + scratch("bad").string()).code == 2);
  CHECK(cli("recover --algo l1 --mn 1.5 --out " + scratch("bad").string()).code == 2);
  CHECK(cli("experiment no-such-protocol").code == 2);
  CHECK(cli("").code == 2);
  CHECK(cli("--config /nonexistent.json").code == 2);
}

TEST_CASE("flags override config values; manifests replay") {
  const auto dir = scratch("config");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "cfg.json") << R"({"command": "recover", "algo": "irw-l1", "seed": 3, "max-outer": 2, "n1": 16, "transitions": 8})";
  }
  Run r = cli("--config " + (dir / "cfg.json").string() + " --seed 4 --out " + (dir / "a").string());
  REQUIRE(r.code == 0);
  const json m = json::parse(slurp(dir / "a" / "manifest.json"));
  CHECK(m["args"]["algo"] == "irw-l1");
  CHECK(m["args"]["seed"] == 4);
  CHECK(m["args"]["max-outer"] == 2);
  r = cli("recover --config " + (dir / "a" / "manifest.json").string() + " --out " + (dir / "b").string());
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"));
  // A manifest for one command cannot drive another.
  CHECK(cli("certify --config " + (dir / "a" / "manifest.json").string()).code == 2);
}

TEST_CASE("output directory falls back to the environment") {
  const auto dir = scratch("env");
  const Run r = cli("recover --algo l1 --n1 16 --transitions 6 --max-outer 1", "CIRL_OUTPUT_DIR=" + dir.string());
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("alpha-sweep writes medians for four algorithms per alpha") {
  const auto out = scratch("alpha");
  const Run r = cli(std::string("experiment alpha-sweep --trials 1") + kTiny + " --out " + out.string());
  REQUIRE(r.code == 0);
  const std::string med = slurp(out / "medians.csv");
  CHECK(lines(med) == 1 + 4 * 4);
  CHECK(med.rfind("experiment,algorithm,sweep_param,median_snr_db,trial_count\n", 0) == 0);
  for (const char* a : {"L1", "Co-L1", "IRW-L1", "Co-IRW-L1"}) {
    CHECK(med.find(std::string("alpha-sweep,") + a + ",19,") != std::string::npos);
  }
  CHECK(lines(slurp(out / "results.csv")) == 1 + 16);
  const json t = json::parse(slurp(out / "timings.json"));
  CHECK(t.size() == 16);
}

TEST_CASE("image and dictionary protocols") {
  const auto out = scratch("image");
  Run r = cli(std::string("experiment image --dict uwt-db1 --levels 1 --target shepp --trials 1") + kTiny +
              " --dump --out " + out.string());
  REQUIRE(r.code == 0);
  json m = json::parse(slurp(out / "manifest.json"));
  REQUIRE(m["derived"]["points"].size() == 2);
  CHECK(m["derived"]["points"][0]["dictionary"] == "uwt-db1_lvl1");
  CHECK(m["derived"]["points"][0]["n1"] == 64);
  CHECK(m["derived"]["points"][0]["sampling_ratio"] == 0.2);
  CHECK(std::distance(fs::directory_iterator(out / "reconstructions"), fs::directory_iterator{}) == 8);

  const auto out2 = scratch("dict");
  r = cli(std::string("experiment dictionary-sweep --trials 1 --max-outer 1 --inner-iters 2 --out ") + out2.string());
  REQUIRE(r.code == 0);
  m = json::parse(slurp(out2 / "manifest.json"));
  CHECK(m["derived"]["points"].size() == 15);
  CHECK(m["derived"]["points"][14]["dictionary"] == "uwt-db1-db2_lvl3");
}

TEST_CASE("certificate suite verdicts") {
  const auto out = scratch("certify");
  const Run a = cli("certify --out " + out.string());
  CHECK(a.code == 0);
  CHECK(a.output.find("FAIL") == std::string::npos);
  const Run b = cli("certify --seed 99 --out " + scratch("certify99").string());
  CHECK(b.code == 0);
  auto verdicts = [](const std::string& s) {
    std::istringstream in(s);
    std::string line, v;
    while (std::getline(in, line)) v += line.substr(0, line.find(':')) + "\n";
    return v;
  };
  CHECK(verdicts(a.output) == verdicts(b.output));
  CHECK(a.output != b.output);

  const auto bug = scratch("bug");
  const Run c = cli("certify --inject-bug --out " + bug.string());
  CHECK(c.code == 1);
  CHECK(c.output.find("FAIL mm_descent") != std::string::npos);
  const json rep = json::parse(slurp(bug / "certificates.json"));
  bool found = false;
  for (const auto& e : rep["certificates"]) {
    if (e["name"] == "mm_descent") {
      found = true;
      CHECK(e["passed"] == false);
      CHECK(e["instance"]["lambda_perturbation"] == 0.01);
    } else {
      CHECK(e["passed"] == true);
    }
  }
  CHECK(found);
}
