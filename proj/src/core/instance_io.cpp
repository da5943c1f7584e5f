#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "kadapt/instance.hpp"

namespace kadapt {
namespace {

using json = nlohmann::json;
using milp::RowSense;

const char* sense_text(RowSense s) {
  switch (s) {
    case RowSense::kLessEqual: return "<=";
    case RowSense::kEqual: return "=";
    case RowSense::kGreaterEqual: return ">=";
  }
  return "<=";
}

RowSense parse_sense(const std::string& s) {
  if (s == "<=" || s == "L" || s == "le") return RowSense::kLessEqual;
  if (s == ">=" || s == "G" || s == "ge") return RowSense::kGreaterEqual;
  if (s == "=" || s == "==" || s == "E" || s == "eq") return RowSense::kEqual;
  throw ModelError("unknown row sense '" + s + "'");
}

// Sparse matrices are written as triplets, dense ones as nested arrays.
json matrix_to_json(const Matrix& a) {
  int nnz = 0;
  for (double v : a.data()) nnz += v != 0.0;
  if (a.rows() == 0 || 3 * nnz < a.rows() * a.cols()) {
    json entries = json::array();
    for (int i = 0; i < a.rows(); ++i) {
      for (int j = 0; j < a.cols(); ++j) {
        if (a(i, j) != 0.0) entries.push_back(json::array({i, j, a(i, j)}));
      }
    }
    return json{{"rows", a.rows()}, {"cols", a.cols()}, {"triplets", entries}};
  }
  json rows = json::array();
  for (int i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (double v : a.row(i)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, int rows, int cols, const char* what) {
  const std::string label(what);
  if (j.is_object()) {
    const int r = j.at("rows").get<int>();
    const int c = j.at("cols").get<int>();
    if ((rows >= 0 && r != rows) || (cols >= 0 && c != cols)) {
      throw ModelError(label + " has shape " + std::to_string(r) + "x" + std::to_string(c) +
                       ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    Matrix a(r, c);
    for (const json& t : j.at("triplets")) {
      const int i = t.at(0).get<int>();
      const int k = t.at(1).get<int>();
      if (i < 0 || i >= r || k < 0 || k >= c) throw ModelError(label + " triplet out of range");
      a(i, k) = t.at(2).get<double>();
    }
    return a;
  }
  if (!j.is_array()) throw ModelError(label + " must be an array or a triplet object");
  const int r = static_cast<int>(j.size());
  if (rows >= 0 && r != rows) {
    throw ModelError(label + " has " + std::to_string(r) + " rows, expected " +
                     std::to_string(rows));
  }
  int c = cols;
  if (c < 0) c = r > 0 ? static_cast<int>(j[0].size()) : 0;
  Matrix a(r, c);
  for (int i = 0; i < r; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != c) {
      throw ModelError(label + " row " + std::to_string(i) + " has the wrong length");
    }
    for (int k = 0; k < c; ++k) a(i, k) = j[i][k].get<double>();
  }
  return a;
}

std::vector<double> vector_from_json(const json& j, int size, const char* what) {
  auto v = j.get<std::vector<double>>();
  if (size >= 0 && static_cast<int>(v.size()) != size) {
    throw ModelError(std::string(what) + " has " + std::to_string(v.size()) +
                     " entries, expected " + std::to_string(size));
  }
  return v;
}

json polytope_to_json(const Polytope& p) {
  json senses = json::array();
  for (RowSense s : p.sense) senses.push_back(sense_text(s));
  return json{{"A", matrix_to_json(p.lhs)}, {"sense", senses}, {"rhs", p.rhs}};
}

Polytope polytope_from_json(const json& j, int dim, const char* what) {
  Polytope p;
  const int rows = static_cast<int>(j.at("rhs").size());
  p.lhs = matrix_from_json(j.at("A"), rows, dim, what);
  p.rhs = vector_from_json(j.at("rhs"), rows, what);
  const json& senses = j.at("sense");
  if (static_cast<int>(senses.size()) != rows) {
    throw ModelError(std::string(what) + " sense list has the wrong length");
  }
  for (const json& s : senses) p.sense.push_back(parse_sense(s.get<std::string>()));
  return p;
}

json uncertainty_to_json(const UncertaintySet& u) {
  json j = polytope_to_json(u.rows);
  j["lo"] = u.lo;
  j["hi"] = u.hi;
  return j;
}

UncertaintySet uncertainty_from_json(const json& j, int dim, const char* what) {
  UncertaintySet u;
  u.rows = polytope_from_json(j, dim, what);
  u.lo = vector_from_json(j.at("lo"), dim, what);
  u.hi = vector_from_json(j.at("hi"), dim, what);
  return u;
}

}  // namespace

std::string instance_to_json_text(const KAdaptInstance& inst) {
  json doc;
  doc["meta"] = {{"name", inst.name},
                 {"family", inst.family},
                 {"variant", std::string(to_string(inst.variant))},
                 {"seed", inst.seed}};
  doc["dims"] = {{"n", inst.n}, {"m", inst.m}, {"q", inst.q}, {"s", inst.s()}, {"K", inst.K}};
  doc["cost"] = {{"c", inst.first_stage_cost}, {"Q", matrix_to_json(inst.recourse_cost)}};
  json coupling = {{"T", matrix_to_json(inst.coupling_first)},
                   {"W", matrix_to_json(inst.coupling_recourse)},
                   {"b", inst.coupling_rhs}};
  if (inst.variant == Variant::kConstraint) {
    json wl = json::array();
    for (const Matrix& w : inst.coupling_uncertain) wl.push_back(matrix_to_json(w));
    coupling["W_l"] = std::move(wl);
  }
  doc["coupling"] = std::move(coupling);
  doc["sets"] = {{"X_poly", polytope_to_json(inst.first_stage_set)},
                 {"Y_poly", polytope_to_json(inst.recourse_set)},
                 {"Xi_poly", uncertainty_to_json(inst.scenario_set)}};
  json options = {{"xi0_augmented", inst.xi0_augmented},
                  {"negated_objective", inst.negated_objective}};
  if (inst.integer_first_stage()) options["integer_upper"] = inst.integer_upper;
  if (inst.first_stage_uncertainty) {
    const FirstStageUncertainty& fs = *inst.first_stage_uncertainty;
    json f = {{"C", matrix_to_json(fs.cost_map)}, {"dependent", fs.dependent}};
    if (!fs.dependent) f["Omega_poly"] = uncertainty_to_json(fs.omega);
    options["first_stage_uncertainty"] = std::move(f);
  }
  doc["options"] = std::move(options);
  return doc.dump(1) + "\n";
}

KAdaptInstance instance_from_json_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelError(std::string("instance file is not valid JSON: ") + e.what());
  }
  KAdaptInstance inst;
  try {
    const json& meta = doc.at("meta");
    inst.name = meta.value("name", "");
    inst.family = meta.value("family", "");
    inst.variant = parse_variant(meta.value("variant", "objective"));
    inst.seed = meta.value("seed", std::uint64_t{0});

    const json& dims = doc.at("dims");
    inst.n = dims.at("n").get<int>();
    inst.m = dims.at("m").get<int>();
    inst.q = dims.at("q").get<int>();
    inst.K = dims.value("K", 1);
    const int s = dims.value("s", 0);
    if (inst.n < 0 || inst.m < 0 || inst.q < 0 || s < 0) throw ModelError("negative dimension");

    const json& cost = doc.at("cost");
    inst.first_stage_cost = vector_from_json(cost.at("c"), inst.n, "c");
    inst.recourse_cost = matrix_from_json(cost.at("Q"), inst.q, inst.m, "Q");

    if (doc.contains("coupling")) {
      const json& coupling = doc.at("coupling");
      inst.coupling_first = matrix_from_json(coupling.at("T"), s, inst.n, "T");
      inst.coupling_recourse = matrix_from_json(coupling.at("W"), s, inst.m, "W");
      inst.coupling_rhs = vector_from_json(coupling.at("b"), s, "b");
      if (coupling.contains("W_l")) {
        for (const json& w : coupling.at("W_l")) {
          inst.coupling_uncertain.push_back(matrix_from_json(w, s, inst.m, "W_l"));
        }
      }
    } else {
      if (s != 0) throw ModelError("coupling section missing");
      inst.coupling_first = Matrix(0, inst.n);
      inst.coupling_recourse = Matrix(0, inst.m);
    }

    const json& sets = doc.at("sets");
    inst.first_stage_set = sets.contains("X_poly")
                               ? polytope_from_json(sets.at("X_poly"), inst.n, "X_poly")
                               : Polytope::empty(inst.n);
    inst.recourse_set = sets.contains("Y_poly")
                            ? polytope_from_json(sets.at("Y_poly"), inst.m, "Y_poly")
                            : Polytope::empty(inst.m);
    inst.scenario_set = uncertainty_from_json(sets.at("Xi_poly"), inst.q, "Xi_poly");

    if (doc.contains("options")) {
      const json& options = doc.at("options");
      inst.xi0_augmented = options.value("xi0_augmented", false);
      inst.negated_objective = options.value("negated_objective", false);
      if (options.contains("integer_upper")) {
        inst.integer_upper = options.at("integer_upper").get<std::vector<int>>();
      }
      if (options.contains("first_stage_uncertainty") &&
          !options.at("first_stage_uncertainty").is_null()) {
        const json& f = options.at("first_stage_uncertainty");
        FirstStageUncertainty fs;
        fs.dependent = f.value("dependent", false);
        fs.cost_map = matrix_from_json(f.at("C"), fs.dependent ? inst.q : -1, inst.n, "C");
        if (!fs.dependent) {
          fs.omega = uncertainty_from_json(f.at("Omega_poly"), fs.cost_map.rows(), "Omega_poly");
        }
        inst.first_stage_uncertainty = std::move(fs);
      }
    }
  } catch (const json::exception& e) {
    throw ModelError(std::string("instance schema violation: ") + e.what());
  }
  validate(inst);
  return inst;
}

KAdaptInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open instance file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return instance_from_json_text(buffer.str());
}

void save_instance(const KAdaptInstance& inst, const std::string& path) {
  validate(inst);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write instance file " + path);
  out << instance_to_json_text(inst);
  if (!out) throw ModelError("failed writing instance file " + path);
}

}  // namespace kadapt
