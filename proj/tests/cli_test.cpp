#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "doctest.h"
#include "kadapt/oracle.hpp"

using namespace kadapt;
using namespace kadapt::cli;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

const char* kTinyManifest = R"({
  "epsilon": 0.0, "time_limit": 60,
  "runs": [
    {"family": "generic", "size": 4, "tiny": true, "K": [1, 2], "seeds": [3]},
    {"family": "knapsack", "size": 4, "tiny": true, "K": 2, "seeds": 2}
  ]})";

}  // namespace

TEST_CASE("generate is reproducible and matches the requested sizes") {
  GenerateSpec sp;
  sp.family = "shortest-path";
  sp.size = 20;
  sp.gamma = 3;
  CHECK(instance_to_json_text(generate(sp)) == instance_to_json_text(generate(sp)));

  GenerateSpec kp;
  kp.family = "knapsack";
  kp.size = 100;
  CHECK(generate(kp).m == 100);

  GenerateSpec gen;
  gen.family = "generic";
  gen.size = 20;
  const KAdaptInstance g = generate(gen);
  bool has_cardinality_row = false;
  const Polytope& x_set = g.first_stage_set;
  for (int r = 0; r < x_set.num_rows(); ++r) {
    bool ones = true;
    for (double a : x_set.lhs.row(r)) ones = ones && a == 1.0;
    if (ones && x_set.rhs[r] == 10.0 && x_set.sense[r] == milp::RowSense::kEqual) {
      has_cardinality_row = true;
    }
  }
  CHECK(has_cardinality_row);

  sp.variant = Variant::kConstraint;
  CHECK_THROWS_AS(generate(sp), ModelError);
  sp.family = "bogus";
  sp.variant = Variant::kObjective;
  CHECK_THROWS_AS(generate(sp), ModelError);
}

TEST_CASE("exit codes follow the policy status") {
  CHECK(exit_code(PolicyStatus::kOptimal) == 0);
  CHECK(exit_code(PolicyStatus::kTimeLimit) == 2);
  CHECK(exit_code(PolicyStatus::kInfeasible) == 3);
}

TEST_CASE("solve on a tiny instance matches the oracle") {
  const KAdaptInstance inst = generate_tiny("generic", Variant::kObjective, 4, 2, 11);
  SolveRequest req;
  req.K = 2;
  req.epsilon = 0.0;
  const KPolicy p = solve_instance(inst, req);
  CHECK(exit_code(p.status) == kExitOptimal);
  CHECK(std::abs(p.value - brute_force_solve(inst, 2).value) <= 1e-6);
  const RunRecord r = make_record(inst, 2, p);
  CHECK(r.gap >= 0.0);
  CHECK(json_line(r).find("\"status\":\"Optimal\"") != std::string::npos);
  CHECK(policy_json(inst, 2, p).find("\"recourses\"") != std::string::npos);

  // The constraint variant with W_l = 0 gives the same value.
  req.variant = Variant::kConstraint;
  CHECK(std::abs(solve_instance(inst, req).value - p.value) <= 1e-6);
}

TEST_CASE("forced timeout reports TimeLimit") {
  GenerateSpec spec;
  spec.family = "knapsack";
  spec.size = 100;
  SolveRequest req;
  req.time_limit = 1e-3;
  const KAdaptInstance inst = generate(spec);
  const KPolicy p = solve_instance(inst, req);
  CHECK(exit_code(p.status) == kExitTimeLimit);
  const RunRecord r = make_record(inst, 2, p);
  CHECK(r.incumbent == p.has_incumbent());
  if (!r.incumbent) CHECK(json_line(r).find("\"value\":null") != std::string::npos);
}

TEST_CASE("solve defaults are a 5% gap and a two hour limit") {
  const SolveRequest req;
  CHECK(req.epsilon == 0.05);
  CHECK(req.time_limit == 7200.0);
}

TEST_CASE("bench writes one row per run and a summary") {
  const BenchManifest manifest = parse_manifest(kTinyManifest);
  REQUIRE(manifest.runs.size() == 4);
  CHECK(manifest.runs[1].K == 2);
  CHECK(manifest.runs[3].seed == 2);

  const auto dir = std::filesystem::temp_directory_path() / "kadapt_cli_test_bench";
  std::filesystem::remove_all(dir);
  const auto first = run_bench(manifest, 2);
  std::ostringstream report;
  write_bench(dir.string(), manifest, first, report);
  const std::string csv = read_file(dir / "results.csv");
  CHECK(csv.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  CHECK(count_lines(csv) == 5);
  const std::string summary = read_file(dir / "summary.csv");
  CHECK(count_lines(summary) == 4);  // header + three (family, size, K) cells

  const auto cells = summarize(manifest.runs, first);
  REQUIRE(cells.size() == 3);
  for (const auto& c : cells) {
    CHECK(c.percent_solved() == doctest::Approx(100.0 * c.solved / c.total));
  }

  // Same manifest and seeds give the same values, regardless of job count.
  const auto second = run_bench(manifest, 1);
  for (size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].status == second[i].status);
    CHECK(first[i].value == second[i].value);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("bench records failing rows without aborting") {
  BenchManifest manifest = parse_manifest(kTinyManifest);
  manifest.runs[0].family = "bogus";
  const auto records = run_bench(manifest, 1);
  CHECK(records[0].status == "Error");
  CHECK(!records[0].error.empty());
  CHECK(records[1].status == "Optimal");
  const auto cells = summarize(manifest.runs, records);
  CHECK(cells[0].solved == 0);
}

TEST_CASE("oracle check") {
  OracleCheckOptions o;
  o.count = 0;
  CHECK(oracle_check(o).mismatches == 0);
  o.count = 12;
  o.max_dims = 4;
  const OracleCheckReport good = oracle_check(o);
  CHECK(good.checked == 12);
  CHECK(good.mismatches == 0);
  // A loose solver gap is caught as a mismatch.
  o.count = 20;
  o.max_dims = 5;
  o.epsilon = 10.0;
  CHECK(oracle_check(o).mismatches > 0);
}
