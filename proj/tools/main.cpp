#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using namespace kadapt;
using namespace kadapt::cli;

std::optional<Variant> variant_flag(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return parse_variant(text);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"K-adaptability two-stage robust optimization solver"};
  app.require_subcommand(1);

  GenerateSpec gen;
  std::string gen_variant = "objective";
  std::string gen_out;
  auto* generate_cmd = app.add_subcommand("generate", "Write a random instance file");
  generate_cmd->add_option("--family", gen.family, "shortest-path | knapsack | generic")
      ->check(CLI::IsMember({"shortest-path", "knapsack", "generic"}));
  generate_cmd->add_option("--size", gen.size, "Nodes, items, or n = m");
  generate_cmd->add_option("--gamma", gen.gamma, "Uncertainty budget");
  generate_cmd->add_option("--k", gen.K, "Number of recourse policies stored in the instance");
  generate_cmd->add_option("--seed", gen.seed, "Random seed");
  generate_cmd->add_option("--variant", gen_variant, "objective | constraint")
      ->check(CLI::IsMember({"objective", "constraint"}));
  generate_cmd->add_flag("--tiny", gen.tiny, "Oracle-sized instance with at most --size dims");
  generate_cmd->add_option("--coupling-level", gen.coupling_level,
                           "Generic family: right-hand side of the coupling row");
  generate_cmd->add_option("--out", gen_out, "Output path")->required();

  std::string solve_path;
  std::string solve_out;
  std::string solve_variant;
  SolveRequest req;
  auto* solve_cmd = app.add_subcommand("solve", "Solve an instance file");
  solve_cmd->add_option("instance", solve_path, "Instance file")->required();
  solve_cmd->add_option("--k", req.K, "Number of recourse policies (default: instance K)");
  solve_cmd->add_option("--epsilon", req.epsilon, "Relative optimality gap");
  solve_cmd->add_option("--time-limit", req.time_limit, "Seconds");
  solve_cmd->add_flag("--warm-start", req.warm_start, "Reuse subproblem pools across iterations");
  solve_cmd->add_option("--variant", solve_variant, "objective | constraint")
      ->check(CLI::IsMember({"objective", "constraint"}));
  solve_cmd->add_option("--out", solve_out, "Policy file");

  std::string manifest_path;
  std::string bench_out = "bench-out";
  int jobs = 1;
  std::optional<double> bench_eps;
  std::optional<double> bench_tl;
  auto* bench_cmd = app.add_subcommand("bench", "Run a manifest of generated instances");
  bench_cmd->add_option("manifest", manifest_path, "JSON manifest")->required();
  bench_cmd->add_option("--out", bench_out, "Output directory");
  bench_cmd->add_option("--jobs", jobs, "Concurrent runs");
  bench_cmd->add_option("--epsilon", bench_eps, "Override the manifest gap");
  bench_cmd->add_option("--time-limit", bench_tl, "Override the manifest time limit");

  OracleCheckOptions check;
  auto* check_cmd = app.add_subcommand("oracle-check", "Compare against brute force");
  check_cmd->add_option("--count", check.count, "Number of instances");
  check_cmd->add_option("--max-dims", check.max_dims, "Dimension cap of tiny instances");
  check_cmd->add_option("--seed", check.seed, "Random seed");
  check_cmd->add_option("--epsilon", check.epsilon, "Solver gap (nonzero for negative controls)");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check an instance file");
  validate_cmd->add_option("instance", validate_path, "Instance file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate_cmd) {
      gen.variant = parse_variant(gen_variant);
      const KAdaptInstance inst = generate(gen);
      validate(inst);
      save_instance(inst, gen_out);
      std::cout << inst.name << '\n';
      return kExitOptimal;
    }
    if (*solve_cmd) {
      req.variant = variant_flag(solve_variant);
      const KAdaptInstance inst = load_instance(solve_path);
      const int K = req.K > 0 ? req.K : inst.K;
      const KPolicy policy = solve_instance(inst, req);
      std::cout << json_line(make_record(inst, K, policy)) << std::endl;
      if (!solve_out.empty()) write_text(solve_out, policy_json(inst, K, policy));
      return exit_code(policy.status);
    }
    if (*bench_cmd) {
      BenchManifest manifest = parse_manifest(read_text(manifest_path));
      if (bench_eps) manifest.epsilon = *bench_eps;
      if (bench_tl) manifest.time_limit = *bench_tl;
      const auto records = run_bench(manifest, jobs);
      write_bench(bench_out, manifest, records, std::cout);
      return kExitOptimal;
    }
    if (*check_cmd) {
      const OracleCheckReport report = oracle_check(check);
      for (const auto& line : report.lines) std::cout << line << '\n';
      std::cout << report.checked - report.mismatches << "/" << report.checked << " match\n";
      return report.mismatches == 0 ? kExitOptimal : kExitError;
    }
    if (*validate_cmd) {
      validate(load_instance(validate_path), true);
      std::cout << "ok\n";
      return kExitOptimal;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
