#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "kadapt/benders.hpp"
#include "kadapt/double_oracle.hpp"
#include "kadapt/instance.hpp"
#include "kadapt/oracle.hpp"

namespace py = pybind11;
using namespace kadapt;

namespace {

KAdaptInstance generate(const std::string& family, int size, double gamma, int K,
                        std::uint64_t seed, const std::string& variant, bool tiny,
                        double coupling_level) {
  if (tiny) return generate_tiny(family, parse_variant(variant), size, K, seed);
  if (parse_variant(variant) == Variant::kConstraint) {
    throw ModelError("the constraint variant is only generated for tiny instances");
  }
  if (family == "shortest-path") {
    ShortestPathParams p;
    p.num_nodes = size;
    p.gamma = gamma;
    p.K = K;
    return generate_shortest_path(p, seed);
  }
  if (family == "knapsack") {
    KnapsackParams p;
    p.items = size;
    p.K = K;
    return generate_knapsack(p, seed);
  }
  if (family == "generic") {
    GenericParams p;
    p.n = size;
    p.m = size;
    p.gamma = gamma;
    p.K = K;
    p.coupling_level = coupling_level;
    return generate_generic(p, seed);
  }
  throw ModelError("unknown family '" + family + "'");
}

py::dict trace_dict(const BendersTrace& t) {
  py::dict d;
  d["iteration"] = t.iteration;
  d["ub"] = t.ub;
  d["lb"] = t.lb;
  d["theta"] = t.theta;
  d["lower"] = t.lower;
  d["feasibility_cut"] = t.feasibility_cut;
  d["subproblem_iterations"] = t.subproblem_iterations;
  d["scenarios"] = t.scenarios;
  d["pool_size"] = t.pool_size;
  d["elapsed"] = t.elapsed;
  return d;
}

}  // namespace

PYBIND11_MODULE(_kadapt, m) {
  m.doc() = "K-adaptability two-stage robust optimization solver";

  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);

  py::class_<KAdaptInstance>(m, "Instance")
      .def_readonly("name", &KAdaptInstance::name)
      .def_readonly("family", &KAdaptInstance::family)
      .def_readonly("seed", &KAdaptInstance::seed)
      .def_readonly("n", &KAdaptInstance::n)
      .def_readonly("m", &KAdaptInstance::m)
      .def_readonly("q", &KAdaptInstance::q)
      .def_readwrite("K", &KAdaptInstance::K)
      .def_readonly("first_stage_cost", &KAdaptInstance::first_stage_cost)
      .def_readonly("integer_upper", &KAdaptInstance::integer_upper)
      .def_readonly("negated_objective", &KAdaptInstance::negated_objective)
      .def_property_readonly("variant",
                             [](const KAdaptInstance& i) { return std::string(to_string(i.variant)); })
      .def("to_json", [](const KAdaptInstance& i) { return instance_to_json_text(i); })
      .def("validate", [](const KAdaptInstance& i) { validate(i, true); })
      .def("__eq__", [](const KAdaptInstance& a, const KAdaptInstance& b) { return a == b; })
      .def("__repr__", [](const KAdaptInstance& i) {
        return "<Instance " + i.name + " n=" + std::to_string(i.n) + " m=" + std::to_string(i.m) +
               " q=" + std::to_string(i.q) + ">";
      });

  m.def("from_json", [](const std::string& text) { return instance_from_json_text(text); },
        py::arg("text"));
  m.def("load_instance", &load_instance, py::arg("path"));
  m.def("save_instance", &save_instance, py::arg("instance"), py::arg("path"));
  m.def("generate", &generate, py::arg("family"), py::arg("size"), py::arg("gamma") = 3.0,
        py::arg("K") = 2, py::arg("seed") = 1, py::arg("variant") = "objective",
        py::arg("tiny") = false, py::arg("coupling_level") = 0.0);
  m.def("with_zero_constraint_uncertainty", &with_zero_constraint_uncertainty,
        py::arg("instance"));

  py::class_<KPolicy>(m, "Policy")
      .def_property_readonly("status",
                             [](const KPolicy& p) { return std::string(to_string(p.status)); })
      .def_readonly("x", &KPolicy::x)
      .def_readonly("recourses", &KPolicy::recourses)
      .def_readonly("value", &KPolicy::value)
      .def_readonly("lower_bound", &KPolicy::lower_bound)
      .def_readonly("gap", &KPolicy::gap)
      .def_property_readonly("has_incumbent", &KPolicy::has_incumbent)
      .def_property_readonly("stats",
                             [](const KPolicy& p) {
                               py::dict d;
                               d["iterations"] = p.stats.iterations;
                               d["optimality_cuts"] = p.stats.optimality_cuts;
                               d["feasibility_cuts"] = p.stats.feasibility_cuts;
                               d["scenarios"] = p.stats.scenarios;
                               d["pool_size"] = p.stats.pool_size;
                               d["effective_K"] = p.stats.effective_K;
                               d["nodes"] = p.stats.nodes;
                               d["wall_time"] = p.stats.wall_time;
                               return d;
                             })
      .def_property_readonly("trace", [](const KPolicy& p) {
        py::list out;
        for (const auto& t : p.trace) out.append(trace_dict(t));
        return out;
      });

  m.def(
      "solve",
      [](const KAdaptInstance& inst, int K, double epsilon, double time_limit, bool warm_start) {
        SolverOptions o;
        o.K = K;
        o.epsilon = epsilon;
        o.time_limit = time_limit;
        o.warm_start = warm_start;
        py::gil_scoped_release release;
        return solve_any(inst, o);
      },
      py::arg("instance"), py::arg("K") = 0, py::arg("epsilon") = 0.05,
      py::arg("time_limit") = 7200.0, py::arg("warm_start") = false);

  m.def(
      "solve_subproblem",
      [](const KAdaptInstance& inst, const std::vector<double>& x, int K, double epsilon) {
        SubproblemOptions o;
        o.epsilon = epsilon;
        SubproblemResult r;
        {
          py::gil_scoped_release release;
          r = solve_subproblem(inst, x, K, o);
        }
        py::dict d;
        d["status"] = r.status == OracleStatus::kOptimal      ? "Optimal"
                      : r.status == OracleStatus::kInfeasible ? "Infeasible"
                                                              : "TimeLimit";
        d["ub"] = r.ub;
        d["lb"] = r.lb;
        d["recourses"] = r.recourses;
        d["scenarios"] = r.scenarios.scenarios();
        d["effective_K"] = r.effective_K;
        return d;
      },
      py::arg("instance"), py::arg("x"), py::arg("K"), py::arg("epsilon") = 0.0);

  m.def(
      "brute_force_solve",
      [](const KAdaptInstance& inst, int K) {
        OracleResult r;
        {
          py::gil_scoped_release release;
          r = brute_force_solve(inst, K);
        }
        py::dict d;
        d["feasible"] = r.feasible;
        d["value"] = r.value;
        d["x"] = r.x;
        d["recourses"] = r.recourses;
        return d;
      },
      py::arg("instance"), py::arg("K"));

  m.def(
      "second_stage_value",
      [](const KAdaptInstance& inst, const std::vector<double>& x, int K) {
        return second_stage_value(inst, x, K).value;
      },
      py::arg("instance"), py::arg("x"), py::arg("K"));
}
