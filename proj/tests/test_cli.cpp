// End-to-end checks of the command-line tool: exit codes, configuration
// precedence, output schemas, and byte-level reproducibility across thread
// counts.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

const std::string kBinary = ABCLAB_CLI_PATH;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + kBinary + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("invalid options exit with code 1 and name the flag") {
  const RunResult r = run("lyapunov --u-max -1 --steps 10 --ensemble 2");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("u-max") != std::string::npos);

  const RunResult unknown = run("lyapunov --no-such-flag 3");
  CHECK(unknown.exit_code == 1);
}

TEST_CASE("config file: precedence and unknown-key rejection") {
  {
    std::ofstream cfg("cli_seed.cfg");
    cfg << "# configuration for a small run\n";
    cfg << "seed = 7\n";
    cfg << "steps = 50\n";
    cfg << "ensemble = 4\n";
  }
  const RunResult r =
      run("lyapunov --config cli_seed.cfg --seed 9 --out cli_prec");
  REQUIRE(r.exit_code == 0);
  const auto report = nlohmann::json::parse(slurp("cli_prec.json"));
  CHECK(report["config"]["seed"] == 9);   // flag beats file
  CHECK(report["config"]["steps"] == 50); // file beats default

  {
    std::ofstream cfg("cli_bad.cfg");
    cfg << "wibble = 3\n";
  }
  const RunResult bad = run("lyapunov --config cli_bad.cfg");
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("wibble") != std::string::npos);
}

TEST_CASE("lyapunov writes the per-trajectory CSV and a JSON summary") {
  const RunResult r = run("lyapunov --steps 200 --ensemble 8 --out cli_ly");
  REQUIRE(r.exit_code == 0);
  const std::string csv = slurp("cli_ly.csv");
  CHECK(count_lines(csv) == 9);  // header + one row per trajectory
  CHECK(csv.rfind("trajectory,lambda\n", 0) == 0);
  const auto j = nlohmann::json::parse(slurp("cli_ly.json"));
  CHECK(j["lambda"].is_number());
  CHECK(j["config"]["u_max"].is_number());
}

TEST_CASE("mix emits one CSV row per recorded iteration plus a fit block") {
  const RunResult r = run("mix --steps 20 --grid 64 --seed 42 --out cli_mix");
  REQUIRE(r.exit_code == 0);
  const std::string csv = slurp("cli_mix.csv");
  CHECK(count_lines(csv) == 22);  // header + t = 0..20
  const auto j = nlohmann::json::parse(slurp("cli_mix.json"));
  CHECK(j.contains("fit"));
  CHECK(j["fit"]["rate"].is_number());
  CHECK(double(j["fit"]["rate"]) < 0.0);
  CHECK(j["series"].size() == 21);
}

TEST_CASE("dynamo reports the Lyapunov comparison flag") {
  const RunResult r = run("dynamo --steps 12 --grid 16 --p 1 --out cli_dy");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(slurp("cli_dy.json"));
  CHECK(j["eta_at_least_lambda1_within_3se"].is_boolean());
  CHECK(double(j["fit"]["rate"]) > 0.0);
  const std::string csv = slurp("cli_dy.csv");
  CHECK(count_lines(csv) == 14);  // header + n = 0..12
}

TEST_CASE("verify passes with shipped tolerances and reports five certificates") {
  const RunResult r = run("verify --out cli_verify");
  CHECK(r.exit_code == 0);
  const auto j = nlohmann::json::parse(slurp("cli_verify.json"));
  CHECK(j["certificates"].size() == 5);
  for (const auto& cert : j["certificates"]) CHECK(cert["pass"] == true);
}

TEST_CASE("control emits the plan as six-tuples with replay errors") {
  const RunResult r =
      run("control --kind one-point --from 0,0,0 --to 1,2,3 --out cli_ctl");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(slurp("cli_ctl.json"));
  REQUIRE(j["plan"]["samples"].size() == 1);
  CHECK(j["plan"]["samples"][0].size() == 6);
  CHECK(double(j["plan"]["position_error"]) < 1e-10);
}

TEST_CASE("chain-stats reports the uniformity diagnostic") {
  const RunResult r = run("chain-stats --steps 200000 --bins 4 --out cli_chain");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(slurp("cli_chain.json"));
  CHECK(double(j["p_value"]) > 0.01);
}

TEST_CASE("identical command lines are byte-identical at any thread count") {
  const std::string cmd = "lyapunov --steps 400 --ensemble 12 --seed 5 --out cli_rep";
  REQUIRE(run(cmd, "ABC_LAB_THREADS=1").exit_code == 0);
  const std::string csv1 = slurp("cli_rep.csv"), json1 = slurp("cli_rep.json");
  REQUIRE(run(cmd, "ABC_LAB_THREADS=4").exit_code == 0);
  CHECK(slurp("cli_rep.csv") == csv1);
  CHECK(slurp("cli_rep.json") == json1);

  const std::string mix_cmd = "mix --steps 6 --grid 32 --seed 3 --out cli_repmix";
  REQUIRE(run(mix_cmd, "ABC_LAB_THREADS=1").exit_code == 0);
  const std::string mix1 = slurp("cli_repmix.csv"), mixj1 = slurp("cli_repmix.json");
  REQUIRE(run(mix_cmd, "ABC_LAB_THREADS=8").exit_code == 0);
  CHECK(slurp("cli_repmix.csv") == mix1);
  CHECK(slurp("cli_repmix.json") == mixj1);

  const std::string diff_cmd =
      "mix --steps 4 --grid 16 --kappa 1e-3 --samples 2000 --k-cutoff 2 --seed 3 "
      "--out cli_repdiff";
  REQUIRE(run(diff_cmd, "ABC_LAB_THREADS=1").exit_code == 0);
  const std::string diff1 = slurp("cli_repdiff.csv");
  REQUIRE(run(diff_cmd, "ABC_LAB_THREADS=8").exit_code == 0);
  CHECK(slurp("cli_repdiff.csv") == diff1);
}
