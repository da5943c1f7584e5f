// Command implementations behind the kadapt executable. Kept apart from
// argument parsing so tests can drive them directly.

#ifndef KADAPT_TOOLS_COMMANDS_HPP_
#define KADAPT_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kadapt/benders.hpp"
#include "kadapt/instance.hpp"

namespace kadapt::cli {

inline constexpr int kExitOptimal = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitTimeLimit = 2;
inline constexpr int kExitInfeasible = 3;

int exit_code(PolicyStatus status);

// What one generated instance looks like before it exists.
struct GenerateSpec {
  std::string family = "shortest-path";  // shortest-path | knapsack | generic
  int size = 20;        // nodes, items, or n = m
  double gamma = 3.0;
  int K = 2;
  std::uint64_t seed = 1;
  Variant variant = Variant::kObjective;
  bool tiny = false;    // oracle-sized instance with at most `size` dimensions
  double coupling_level = 0.0;  // generic only
};

KAdaptInstance generate(const GenerateSpec& spec);

// One solved instance, mirroring the benchmark table columns.
struct RunRecord {
  std::string name;
  std::string family;
  int n = 0, m = 0, q = 0, K = 0;
  double gamma = 0.0;
  std::string status;
  double value = milp::kInfinity;  // in the original objective sense
  double gap = milp::kInfinity;
  double time_s = 0.0;
  int iters = 0;
  int opt_cuts = 0;
  int feas_cuts = 0;
  int scenarios = 0;
  int pool = 0;
  bool incumbent = false;
  std::string error;  // set when the run failed before producing a policy
};

inline constexpr const char* kCsvHeader =
    "name,family,n,m,q,K,gamma,status,value,gap,time_s,iters,opt_cuts,feas_cuts,scenarios,pool";

// Budget of the scenario set when it is a single 0/1 row, otherwise 0.
double budget_of(const KAdaptInstance& inst);
RunRecord make_record(const KAdaptInstance& inst, int K, const KPolicy& policy);
std::string csv_row(const RunRecord& record);
std::string json_line(const RunRecord& record);
std::string policy_json(const KAdaptInstance& inst, int K, const KPolicy& policy);

struct SolveRequest {
  int K = 0;  // 0: the instance's K
  double epsilon = 0.05;
  double time_limit = 7200.0;
  bool warm_start = false;
  std::optional<Variant> variant;
};

// Applies the requested variant. Asking for the constraint variant on an
// objective instance yields the same instance with every W_l = 0; asking for
// the objective variant on an instance with uncertain coupling throws.
KAdaptInstance with_variant(const KAdaptInstance& inst, std::optional<Variant> variant);
// Solves through the integer and dependent-cost transforms, logging
// iterations according to KADAPT_LOG.
KPolicy solve_instance(const KAdaptInstance& inst, const SolveRequest& request);

// Trace verbosity from KADAPT_LOG: 0 silent, 1 one JSON line per Benders
// iteration, 2 also subproblem rounds. Lines go to stderr.
int log_level();

struct BenchManifest {
  double epsilon = 0.05;
  double time_limit = 7200.0;
  bool warm_start = false;
  std::vector<GenerateSpec> runs;  // expanded, in manifest order
};
// {"epsilon", "time_limit", "warm_start", "runs": [{"family", "size",
// "gamma", "K", "seeds", "variant", "tiny", "coupling_level"}]} where K and
// seeds may each be a number or a list (a number of seeds means 1..count).
BenchManifest parse_manifest(const std::string& json_text);

struct CellSummary {
  std::string family;
  int size = 0;
  int K = 0;
  int total = 0;
  int solved = 0;
  double mean_time_solved = 0.0;
  double percent_solved() const { return total == 0 ? 0.0 : 100.0 * solved / total; }
};
std::vector<CellSummary> summarize(const std::vector<GenerateSpec>& runs,
                                   const std::vector<RunRecord>& records);

// Runs every manifest row (up to `jobs` at a time) and returns the records in
// manifest order. A failing row is recorded with status "Error".
std::vector<RunRecord> run_bench(const BenchManifest& manifest, int jobs);
// Writes results.csv and summary.csv under out_dir.
void write_bench(const std::string& out_dir, const BenchManifest& manifest,
                 const std::vector<RunRecord>& records, std::ostream& report);

struct OracleCheckOptions {
  int count = 20;
  int max_dims = 5;
  std::uint64_t seed = 1;
  double epsilon = 0.0;  // raising it is a negative control
  double tolerance = 1e-6;
};
struct OracleCheckReport {
  int checked = 0;
  int mismatches = 0;
  std::vector<std::string> lines;
};
// Random tiny instances across every family and both variants, K cycling
// through 1..3, solved and compared against brute-force enumeration.
OracleCheckReport oracle_check(const OracleCheckOptions& options);

}  // namespace kadapt::cli

#endif  // KADAPT_TOOLS_COMMANDS_HPP_
