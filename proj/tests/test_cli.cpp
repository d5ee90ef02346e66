#include "doctest.h"

#include "switchstab/examples.hpp"
#include "switchstab/io.hpp"
#include "switchstab/lmi.hpp"
#include "switchstab/model.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <variant>
#include <vector>

using namespace switchstab;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const std::string errfile =
      "/tmp/switchstab_cli_stderr_" + std::to_string(counter++) + ".txt";
  const std::string cmd = (env.empty() ? "" : env + " ") +
                          std::string(SWITCHSTAB_CLI_PATH) + " " + args +
                          " 2>" + errfile;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult res;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0)
    res.out.append(buf, got);
  const int status = ::pclose(pipe);
  res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  try {
    res.err = read_text_file(errfile);
  } catch (const ParseError&) {
  }
  std::remove(errfile.c_str());
  return res;
}

std::string write_problem(const ProblemFile& pf, const std::string& name) {
  const std::string path = "/tmp/" + name;
  write_text_file(path, emit_problem(pf));
  return path;
}

std::string benchmark_path() {
  ProblemFile pf;
  pf.spec = examples::pair3();
  return write_problem(pf, "cli_benchmark.json");
}

}  // namespace

TEST_CASE("design certifies the benchmark and reports reproducibly") {
  const std::string path = benchmark_path();
  const CliResult a = run_cli("design " + path);
  CHECK(a.code == 0);
  CHECK(a.err.find("status=certified") != std::string::npos);

  const json report = json::parse(a.out);
  CHECK(report["command"] == "design");
  CHECK(report["exit_code"] == 0);
  CHECK(report["tool"]["name"] == "switchstab");
  REQUIRE(report.contains("design"));
  REQUIRE(report.contains("certificate"));
  CHECK(report["certificate"]["margin_pd"].get<double>() >= 1e-6);
  for (const auto& m : report["certificate"]["margins_decrease"])
    CHECK(m.get<double>() >= 1e-6);
  REQUIRE(report.contains("simulation"));
  CHECK(report["simulation"]["random"]["lyapunov_strictly_decreasing"] == true);

  // Byte-identical on rerun.
  const CliResult b = run_cli("design " + path);
  CHECK(b.code == 0);
  CHECK(b.out == a.out);
}

TEST_CASE("design writes the report to --output when asked") {
  const std::string path = benchmark_path();
  const std::string out = "/tmp/cli_design_report.json";
  std::remove(out.c_str());
  const CliResult r = run_cli("design " + path + " --output " + out);
  CHECK(r.code == 0);
  const json report = json::parse(read_text_file(out));
  CHECK(report["exit_code"] == 0);
  std::remove(out.c_str());
}

TEST_CASE("design reports infeasibility with exit code 2") {
  ProblemFile pf;
  pf.spec = examples::coupled2(1.5);
  const std::string path = write_problem(pf, "cli_infeasible.json");
  const CliResult r = run_cli("design " + path);
  CHECK(r.code == 2);
  CHECK(r.err.find("status=infeasible") != std::string::npos);
  const json report = json::parse(r.out);
  CHECK(report["exit_code"] == 2);
  REQUIRE(report.contains("design_failure"));
  CHECK(report["design_failure"]["level"] == 1);
}

TEST_CASE("malformed and invalid inputs exit with code 1") {
  write_text_file("/tmp/cli_broken.json", "{ not json");
  CHECK(run_cli("design /tmp/cli_broken.json").code == 1);
  CHECK(run_cli("design /tmp/cli_no_such_file.json").code == 1);

  // Structurally valid JSON, but the system fails validation.
  ProblemFile pf;
  Mat A = Mat::Identity(2, 2) * Complex(0.5, 0.0);
  Mat B(2, 1);
  B << Complex(0.0), Complex(1.0);
  pf.spec.modes.push_back({A, B, 1});
  const std::string path = write_problem(pf, "cli_uncontrollable.json");
  const CliResult r = run_cli("design " + path);
  CHECK(r.code == 1);
  CHECK(r.err.find("status=input_error") != std::string::npos);

  // Unknown subcommand / bad flag usage also fail as input errors.
  CHECK(run_cli("frobnicate " + benchmark_path()).code == 1);
  CHECK(run_cli("design").code == 1);
}

TEST_CASE("check certifies synthesized gains and rejects unstable ones") {
  ProblemFile pf;
  pf.spec = examples::pair3();
  const auto syn = synthesize_lmi(pf.spec);
  REQUIRE(std::holds_alternative<SynthesisCertificate>(syn));
  for (const auto& K : std::get<SynthesisCertificate>(syn).gains)
    pf.gains.push_back(K.cast<Complex>());
  const std::string good = write_problem(pf, "cli_check_good.json");
  const CliResult ok = run_cli("check " + good);
  CHECK(ok.code == 0);
  const json report = json::parse(ok.out);
  CHECK(report["command"] == "check");
  CHECK(report["certificate"]["margin_pd"].get<double>() > 0.0);

  // Zero gains leave the open loop; the second mode is unstable.
  ProblemFile bad = pf;
  for (auto& K : bad.gains) K = Mat::Zero(1, 3);
  const std::string badp = write_problem(bad, "cli_check_bad.json");
  const CliResult no = run_cli("check " + badp);
  CHECK(no.code == 3);
  const json vr = json::parse(no.out);
  CHECK(vr["verdict"]["reason"] == "mode_unstable");
  CHECK(vr["verdict"]["exact"] == true);

  // Gains are required.
  ProblemFile none;
  none.spec = examples::pair3();
  const std::string nop = write_problem(none, "cli_check_none.json");
  CHECK(run_cli("check " + nop).code == 1);
}

TEST_CASE("synthesize exits 0 on feasible and 2 on infeasible systems") {
  const CliResult ok = run_cli("synthesize " + benchmark_path());
  CHECK(ok.code == 0);
  const json report = json::parse(ok.out);
  REQUIRE(report.contains("synthesis"));
  CHECK(report["synthesis"]["gains"].size() == 2);
  for (const auto& m : report["synthesis"]["block_margins"])
    CHECK(m.get<double>() >= 1e-6);

  ProblemFile pf;
  pf.spec = examples::coupled2(1.5);
  const std::string path = write_problem(pf, "cli_synth_infeasible.json");
  const CliResult no = run_cli("synthesize " + path);
  CHECK(no.code == 2);
  CHECK(json::parse(no.out)["verdict"]["best_deficit"].get<double>() > 0.0);
}

TEST_CASE("simulate emits full traces for supplied gains") {
  ProblemFile pf;
  pf.spec = examples::pair3();
  const auto syn = synthesize_lmi(pf.spec);
  REQUIRE(std::holds_alternative<SynthesisCertificate>(syn));
  for (const auto& K : std::get<SynthesisCertificate>(syn).gains)
    pf.gains.push_back(K.cast<Complex>());
  const std::string path = write_problem(pf, "cli_simulate.json");

  const CliResult r = run_cli("simulate " + path + " --horizon 12 --seed 5");
  CHECK(r.code == 0);
  const json report = json::parse(r.out);
  const json& sim = report["simulation"];
  CHECK(sim["horizon"] == 12);
  for (const char* kind : {"random", "periodic", "adversarial"}) {
    CHECK(sim[kind]["sequence"].size() == 12);
    CHECK(sim[kind]["states"].size() == 13);
    CHECK(sim[kind]["states"][0].size() == 3);
  }
  CHECK(sim["product_radius_lower_bound"]["value"].get<double>() < 1.0);

  // Gains are required here too.
  ProblemFile none;
  none.spec = examples::pair3();
  const std::string nop = write_problem(none, "cli_sim_none.json");
  CHECK(run_cli("simulate " + nop).code == 1);
}

TEST_CASE("examples subcommand passes and writes a combined report") {
  const std::string out = "/tmp/cli_examples_report.json";
  std::remove(out.c_str());
  const CliResult r = run_cli("examples all --output " + out);
  CHECK(r.code == 0);
  CHECK(r.err.find("status=examples_pass") != std::string::npos);
  // One PASS line per example on stdout.
  std::size_t passes = 0, pos = 0;
  while ((pos = r.out.find("PASS", pos)) != std::string::npos) {
    ++passes;
    pos += 4;
  }
  CHECK(passes == 3);
  const json combined = json::parse(read_text_file(out));
  CHECK(combined["reports"].size() == 3);
  std::remove(out.c_str());

  const CliResult one = run_cli("examples 4.1");
  CHECK(one.code == 0);
  CHECK(one.out.find("4.1") != std::string::npos);
}

TEST_CASE("seed resolution prefers flags over environment over defaults") {
  const std::string path = benchmark_path();

  const CliResult def = run_cli("design " + path);
  CHECK(json::parse(def.out)["seed"] == 1);

  const CliResult envr = run_cli("design " + path, "SWITCHSTAB_SEED=123");
  CHECK(json::parse(envr.out)["seed"] == 123);

  const CliResult flag =
      run_cli("design " + path + " --seed 7", "SWITCHSTAB_SEED=123");
  CHECK(json::parse(flag.out)["seed"] == 7);
}

TEST_CASE("parameter flags override problem-file params") {
  ProblemFile pf;
  pf.spec = examples::pair3();
  pf.params.eps_c = 1e-4;
  pf.params.seed = 11u;
  const std::string path = write_problem(pf, "cli_params.json");

  const CliResult file_wins = run_cli("design " + path);
  const json a = json::parse(file_wins.out);
  CHECK(a["params"]["eps_c"].get<double>() == 1e-4);
  CHECK(a["seed"] == 11);

  const CliResult flag_wins =
      run_cli("design " + path + " --eps-c 2e-4 --seed 3");
  const json b = json::parse(flag_wins.out);
  CHECK(b["params"]["eps_c"].get<double>() == 2e-4);
  CHECK(b["seed"] == 3);
  // The echoed inputs carry the resolved parameters for re-running.
  CHECK(b["inputs"]["params"]["eps_c"].get<double>() == 2e-4);
}
