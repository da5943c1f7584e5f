#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "kadapt/oracle.hpp"

namespace kadapt::cli {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string format_number(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::mutex& log_mutex() {
  static std::mutex mu;
  return mu;
}

void log_json(const json& line) {
  const std::lock_guard<std::mutex> lock(log_mutex());
  std::cerr << line.dump() << '\n';
}

std::vector<int> int_list(const json& node, const char* key, int fallback) {
  if (!node.contains(key)) return {fallback};
  const json& v = node.at(key);
  if (v.is_array()) return v.get<std::vector<int>>();
  return {v.get<int>()};
}

}  // namespace

int exit_code(PolicyStatus status) {
  switch (status) {
    case PolicyStatus::kOptimal:
      return kExitOptimal;
    case PolicyStatus::kTimeLimit:
      return kExitTimeLimit;
    case PolicyStatus::kInfeasible:
      return kExitInfeasible;
  }
  return kExitError;
}

KAdaptInstance generate(const GenerateSpec& spec) {
  if (spec.tiny) {
    return generate_tiny(spec.family, spec.variant, spec.size, spec.K, spec.seed);
  }
  if (spec.variant == Variant::kConstraint) {
    throw ModelError("the constraint variant is only generated for tiny instances");
  }
  if (spec.family == "shortest-path") {
    ShortestPathParams p;
    p.num_nodes = spec.size;
    p.gamma = spec.gamma;
    p.K = spec.K;
    return generate_shortest_path(p, spec.seed);
  }
  if (spec.family == "knapsack") {
    KnapsackParams p;
    p.items = spec.size;
    p.K = spec.K;
    KAdaptInstance inst = generate_knapsack(p, spec.seed);
    return inst;
  }
  if (spec.family == "generic") {
    GenericParams p;
    p.n = spec.size;
    p.m = spec.size;
    p.gamma = spec.gamma;
    p.K = spec.K;
    p.coupling_level = spec.coupling_level;
    return generate_generic(p, spec.seed);
  }
  throw ModelError("unknown family '" + spec.family + "'");
}

double budget_of(const KAdaptInstance& inst) {
  const Polytope& rows = inst.scenario_set.rows;
  for (int r = 0; r < rows.num_rows(); ++r) {
    if (rows.sense[r] != milp::RowSense::kLessEqual) continue;
    const auto coefs = rows.lhs.row(r);
    const bool unit = std::all_of(coefs.begin(), coefs.end(),
                                  [](double a) { return a == 0.0 || a == 1.0; });
    if (unit) return rows.rhs[r];
  }
  return 0.0;
}

RunRecord make_record(const KAdaptInstance& inst, int K, const KPolicy& policy) {
  RunRecord r;
  r.name = inst.name;
  r.family = inst.family;
  r.n = inst.n;
  r.m = inst.m;
  r.q = inst.q;
  r.K = K;
  r.gamma = budget_of(inst);
  r.status = std::string(to_string(policy.status));
  r.incumbent = policy.has_incumbent();
  r.value = r.incumbent ? policy.value : milp::kInfinity;
  if (inst.negated_objective && std::isfinite(r.value)) r.value = -r.value;
  r.gap = policy.gap;
  r.time_s = policy.stats.wall_time;
  r.iters = policy.stats.iterations;
  r.opt_cuts = policy.stats.optimality_cuts;
  r.feas_cuts = policy.stats.feasibility_cuts;
  r.scenarios = policy.stats.scenarios;
  r.pool = policy.stats.pool_size;
  return r;
}

std::string csv_row(const RunRecord& r) {
  std::ostringstream out;
  out << r.name << ',' << r.family << ',' << r.n << ',' << r.m << ',' << r.q << ',' << r.K
      << ',' << format_number(r.gamma) << ',' << r.status << ',' << format_number(r.value) << ','
      << format_number(r.gap) << ',' << format_number(r.time_s) << ',' << r.iters << ','
      << r.opt_cuts << ',' << r.feas_cuts << ',' << r.scenarios << ',' << r.pool;
  return out.str();
}

std::string json_line(const RunRecord& r) {
  json j = {{"name", r.name},         {"family", r.family},
            {"n", r.n},               {"m", r.m},
            {"q", r.q},               {"K", r.K},
            {"gamma", r.gamma},       {"status", r.status},
            {"value", number_or_null(r.value)},
            {"gap", number_or_null(r.gap)},
            {"time_s", r.time_s},     {"iters", r.iters},
            {"opt_cuts", r.opt_cuts}, {"feas_cuts", r.feas_cuts},
            {"scenarios", r.scenarios}, {"pool", r.pool},
            {"incumbent", r.incumbent}};
  if (!r.error.empty()) j["error"] = r.error;
  return j.dump();
}

std::string policy_json(const KAdaptInstance& inst, int K, const KPolicy& policy) {
  double value = policy.has_incumbent() ? policy.value : milp::kInfinity;
  if (inst.negated_objective && std::isfinite(value)) value = -value;
  json j = {{"instance", inst.name},
            {"status", std::string(to_string(policy.status))},
            {"K", K},
            {"incumbent", policy.has_incumbent()},
            {"x", policy.x},
            {"recourses", policy.recourses},
            {"value", number_or_null(value)},
            {"lower_bound", number_or_null(policy.lower_bound)},
            {"gap", number_or_null(policy.gap)},
            {"negated_objective", inst.negated_objective}};
  return j.dump(2) + "\n";
}

int log_level() {
  const char* env = std::getenv("KADAPT_LOG");
  if (env == nullptr) return 0;
  const std::string v(env);
  if (v.empty() || v == "0" || v == "off") return 0;
  if (v == "2" || v == "debug") return 2;
  return 1;
}

KAdaptInstance with_variant(const KAdaptInstance& inst, std::optional<Variant> variant) {
  if (!variant || *variant == inst.variant) return inst;
  if (*variant == Variant::kConstraint) return with_zero_constraint_uncertainty(inst);
  for (const Matrix& w : inst.coupling_uncertain) {
    if (!w.is_zero()) {
      throw ModelError("instance has uncertain coupling; it cannot be solved as objective-only");
    }
  }
  KAdaptInstance out = inst;
  out.variant = Variant::kObjective;
  out.coupling_uncertain.clear();
  return out;
}

KPolicy solve_instance(const KAdaptInstance& inst, const SolveRequest& request) {
  const KAdaptInstance work = with_variant(inst, request.variant);
  SolverOptions options;
  options.K = request.K;
  options.epsilon = request.epsilon;
  options.time_limit = request.time_limit;
  options.warm_start = request.warm_start;
  const int level = log_level();
  const std::string name = inst.name;
  if (level >= 1) {
    options.on_iteration = [name](const BendersTrace& t) {
      log_json({{"event", "iteration"},
                {"instance", name},
                {"iteration", t.iteration},
                {"ub", number_or_null(t.ub)},
                {"lb", number_or_null(t.lb)},
                {"theta", number_or_null(t.theta)},
                {"lower", number_or_null(t.lower)},
                {"feasibility_cut", t.feasibility_cut},
                {"subproblem_iterations", t.subproblem_iterations},
                {"scenarios", t.scenarios},
                {"pool", t.pool_size},
                {"elapsed", t.elapsed}});
    };
  }
  if (level >= 2) {
    options.subproblem.on_trace = [name](const SubproblemTrace& t) {
      log_json({{"event", "subproblem"},
                {"instance", name},
                {"round", t.iteration},
                {"ub", number_or_null(t.ub)},
                {"lb", number_or_null(t.lb)},
                {"scenarios", t.scenarios},
                {"solutions", t.solutions},
                {"nodes", t.nodes}});
    };
  }
  return solve_any(work, options);
}

BenchManifest parse_manifest(const std::string& json_text) {
  const json doc = json::parse(json_text);
  BenchManifest manifest;
  manifest.epsilon = doc.value("epsilon", manifest.epsilon);
  manifest.time_limit = doc.value("time_limit", manifest.time_limit);
  manifest.warm_start = doc.value("warm_start", manifest.warm_start);
  if (!doc.contains("runs") || !doc.at("runs").is_array()) {
    throw ModelError("manifest needs a 'runs' array");
  }
  for (const json& row : doc.at("runs")) {
    GenerateSpec base;
    base.family = row.at("family").get<std::string>();
    base.size = row.at("size").get<int>();
    base.gamma = row.value("gamma", base.gamma);
    base.variant = parse_variant(row.value("variant", std::string("objective")));
    base.tiny = row.value("tiny", false);
    base.coupling_level = row.value("coupling_level", 0.0);
    std::vector<std::uint64_t> seeds;
    const json s = row.value("seeds", json(1));
    if (s.is_array()) {
      seeds = s.get<std::vector<std::uint64_t>>();
    } else {
      for (std::uint64_t k = 1; k <= s.get<std::uint64_t>(); ++k) seeds.push_back(k);
    }
    for (int K : int_list(row, "K", base.K)) {
      for (std::uint64_t seed : seeds) {
        GenerateSpec spec = base;
        spec.K = K;
        spec.seed = seed;
        manifest.runs.push_back(spec);
      }
    }
  }
  return manifest;
}

std::vector<CellSummary> summarize(const std::vector<GenerateSpec>& runs,
                                   const std::vector<RunRecord>& records) {
  std::map<std::tuple<std::string, int, int>, CellSummary> cells;
  std::vector<std::tuple<std::string, int, int>> order;
  for (size_t i = 0; i < runs.size(); ++i) {
    const auto key = std::make_tuple(runs[i].family, runs[i].size, runs[i].K);
    auto [it, fresh] = cells.try_emplace(key);
    if (fresh) {
      order.push_back(key);
      it->second.family = runs[i].family;
      it->second.size = runs[i].size;
      it->second.K = runs[i].K;
    }
    CellSummary& c = it->second;
    ++c.total;
    if (records[i].status == "Optimal") {
      c.mean_time_solved += records[i].time_s;
      ++c.solved;
    }
  }
  std::vector<CellSummary> out;
  for (const auto& key : order) {
    CellSummary c = cells.at(key);
    if (c.solved > 0) c.mean_time_solved /= c.solved;
    out.push_back(c);
  }
  return out;
}

std::vector<RunRecord> run_bench(const BenchManifest& manifest, int jobs) {
  const int total = static_cast<int>(manifest.runs.size());
  std::vector<RunRecord> records(total);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < total; i = next++) {
      const GenerateSpec& spec = manifest.runs[i];
      RunRecord& r = records[i];
      try {
        const KAdaptInstance inst = generate(spec);
        SolveRequest req;
        req.K = spec.K;
        req.epsilon = manifest.epsilon;
        req.time_limit = manifest.time_limit;
        req.warm_start = manifest.warm_start;
        r = make_record(inst, spec.K, solve_instance(inst, req));
      } catch (const std::exception& e) {
        r.family = spec.family;
        r.K = spec.K;
        r.gamma = spec.gamma;
        r.status = "Error";
        r.error = e.what();
      }
    }
  };
  const int threads = std::clamp(jobs, 1, std::max(1, total));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return records;
}

void write_bench(const std::string& out_dir, const BenchManifest& manifest,
                 const std::vector<RunRecord>& records, std::ostream& report) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  {
    std::ofstream csv(dir / "results.csv");
    if (!csv) throw ModelError("cannot write " + (dir / "results.csv").string());
    csv << kCsvHeader << '\n';
    for (const RunRecord& r : records) csv << csv_row(r) << '\n';
  }
  std::ofstream summary(dir / "summary.csv");
  if (!summary) throw ModelError("cannot write " + (dir / "summary.csv").string());
  summary << "family,size,K,total,solved,percent_solved,mean_time_solved\n";
  report << "family          size   K  solved  mean time (s)\n";
  for (const CellSummary& c : summarize(manifest.runs, records)) {
    summary << c.family << ',' << c.size << ',' << c.K << ',' << c.total << ',' << c.solved
            << ',' << format_number(c.percent_solved()) << ','
            << format_number(c.mean_time_solved) << '\n';
    char line[160];
    std::snprintf(line, sizeof(line), "%-14s %5d %3d  %5.1f%%  %13.3f\n", c.family.c_str(),
                  c.size, c.K, c.percent_solved(), c.mean_time_solved);
    report << line;
  }
}

OracleCheckReport oracle_check(const OracleCheckOptions& options) {
  static constexpr const char* kFamilies[] = {"shortest-path", "knapsack", "generic"};
  OracleCheckReport report;
  for (int i = 0; i < options.count; ++i) {
    const char* family = kFamilies[i % 3];
    const Variant variant = (i / 3) % 2 == 0 ? Variant::kObjective : Variant::kConstraint;
    const int K = 1 + i % 3;
    const KAdaptInstance inst =
        generate_tiny(family, variant, std::max(2, options.max_dims), K, options.seed * 1000 + i);
    SolverOptions so;
    so.K = K;
    so.epsilon = options.epsilon;
    so.time_limit = 600.0;
    const KPolicy policy = solve_any(inst, so);
    const OracleResult ref = brute_force_solve(inst, K);
    bool ok;
    if (!ref.feasible) {
      ok = policy.status == PolicyStatus::kInfeasible;
    } else {
      ok = policy.status == PolicyStatus::kOptimal &&
           std::abs(policy.value - ref.value) <= options.tolerance;
    }
    ++report.checked;
    if (!ok) ++report.mismatches;
    char line[256];
    std::snprintf(line, sizeof(line), "%s %s K=%d solver=%s %s oracle=%s", ok ? "ok  " : "FAIL",
                  inst.name.c_str(), K, std::string(to_string(policy.status)).c_str(),
                  format_number(policy.value).c_str(),
                  ref.feasible ? format_number(ref.value).c_str() : "infeasible");
    report.lines.emplace_back(line);
  }
  return report;
}

}  // namespace kadapt::cli
