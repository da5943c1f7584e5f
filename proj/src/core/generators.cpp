#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <utility>

#include "kadapt/instance.hpp"

namespace kadapt {

using milp::RowSense;

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

int SplitMix64::uniform_int(int lo, int hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(next() % span);
}

namespace {

// Budget set {xi in [0,1]^d : sum xi <= gamma} behind a fixed coordinate 0.
UncertaintySet augmented_budget_set(int d, double gamma) {
  UncertaintySet u;
  u.lo.assign(d + 1, 0.0);
  u.hi.assign(d + 1, 1.0);
  u.lo[0] = 1.0;
  u.rows = Polytope::empty(d + 1);
  std::vector<double> row(d + 1, 1.0);
  row[0] = 0.0;
  u.rows.add_row(row, RowSense::kLessEqual, gamma);
  return u;
}

void init_empty_coupling(KAdaptInstance& inst) {
  inst.coupling_first = Matrix(0, inst.n);
  inst.coupling_recourse = Matrix(0, inst.m);
  inst.coupling_rhs.clear();
}

std::string format_name(const char* prefix, std::initializer_list<std::pair<const char*, double>> parts,
                        std::uint64_t seed) {
  std::string name = prefix;
  for (const auto& [key, value] : parts) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "-%s%g", key, value);
    name += buf;
  }
  return name + "-s" + std::to_string(seed);
}

}  // namespace

KAdaptInstance generate_shortest_path(const ShortestPathParams& params, std::uint64_t seed) {
  if (params.num_nodes < 2) throw ModelError("shortest path needs at least 2 nodes");
  if (params.gamma < 0) throw ModelError("uncertainty budget must be nonnegative");
  if (params.out_degree < 1) throw ModelError("out-degree must be at least 1");
  if (params.K < 1) throw ModelError("K must be at least 1");

  SplitMix64 root(seed);
  SplitMix64 layout = root.split();
  SplitMix64 costs = root.split();

  const int nodes = params.num_nodes;
  std::vector<std::pair<double, double>> pts(nodes);
  for (auto& p : pts) {
    p.first = layout.uniform();
    p.second = layout.uniform();
  }
  std::stable_sort(pts.begin(), pts.end());

  // Arcs only point to later nodes, so the graph is acyclic and every node
  // other than the last has a way forward; an s-t path therefore always exists.
  std::vector<std::pair<int, int>> arcs;
  for (int i = 0; i + 1 < nodes; ++i) {
    std::vector<int> ahead(nodes - i - 1);
    std::iota(ahead.begin(), ahead.end(), i + 1);
    auto dist = [&](int j) {
      const double dx = pts[j].first - pts[i].first, dy = pts[j].second - pts[i].second;
      return dx * dx + dy * dy;
    };
    std::stable_sort(ahead.begin(), ahead.end(),
                     [&](int a, int b) { return dist(a) < dist(b); });
    const int take = std::min<int>(params.out_degree, ahead.size());
    std::vector<int> chosen(ahead.begin(), ahead.begin() + take);
    std::sort(chosen.begin(), chosen.end());
    for (int j : chosen) arcs.emplace_back(i, j);
  }

  const int num_arcs = static_cast<int>(arcs.size());
  KAdaptInstance inst;
  inst.family = "shortest-path";
  inst.name = format_name("sp", {{"v", nodes}, {"g", params.gamma}}, seed);
  inst.seed = seed;
  inst.n = 0;
  inst.m = num_arcs;
  inst.q = num_arcs + 1;
  inst.K = params.K;
  inst.xi0_augmented = true;
  init_empty_coupling(inst);

  inst.recourse_cost = Matrix(inst.q, inst.m);
  for (int a = 0; a < num_arcs; ++a) {
    const double nominal = costs.uniform(1.0, 100.0);
    inst.recourse_cost(0, a) = nominal;
    inst.recourse_cost(a + 1, a) = nominal / 2.0;
  }

  // Flow conservation: inflow - outflow = -1 at s, +1 at t, 0 elsewhere.
  inst.recourse_set = Polytope::empty(inst.m);
  for (int v = 0; v < nodes; ++v) {
    std::vector<double> row(inst.m, 0.0);
    for (int a = 0; a < num_arcs; ++a) {
      if (arcs[a].second == v) row[a] += 1.0;
      if (arcs[a].first == v) row[a] -= 1.0;
    }
    const double rhs = v == 0 ? -1.0 : v == nodes - 1 ? 1.0 : 0.0;
    inst.recourse_set.add_row(row, RowSense::kEqual, rhs);
  }
  inst.first_stage_set = Polytope::empty(0);
  inst.scenario_set = augmented_budget_set(num_arcs, params.gamma);
  validate(inst);
  return inst;
}

KAdaptInstance generate_knapsack(const KnapsackParams& params, std::uint64_t seed) {
  if (params.items < 1) throw ModelError("knapsack needs at least one item");
  if (params.K < 1) throw ModelError("K must be at least 1");
  const int items = params.items;
  const int factors = params.factors > 0 ? params.factors : std::max(1, (items + 9) / 10);

  SplitMix64 root(seed);
  SplitMix64 weight_rng = root.split();
  SplitMix64 profit_rng = root.split();
  SplitMix64 loading_rng = root.split();

  std::vector<double> weights(items), profits(items);
  for (double& w : weights) w = std::round(weight_rng.uniform(params.weight_lo, params.weight_hi));
  for (double& p : profits) p = profit_rng.uniform(params.profit_lo, params.profit_hi);
  const double capacity =
      std::floor(params.budget_fraction * std::accumulate(weights.begin(), weights.end(), 0.0));

  // Loading rows are drawn in [-1,1] and scaled to unit L1 norm, so every
  // realized profit stays within half of its nominal value.
  Matrix loadings(items, factors);
  for (int i = 0; i < items; ++i) {
    double norm = 0.0;
    for (int j = 0; j < factors; ++j) {
      loadings(i, j) = loading_rng.uniform(-1.0, 1.0);
      norm += std::abs(loadings(i, j));
    }
    if (norm == 0.0) {
      loadings(i, 0) = 1.0;
      norm = 1.0;
    }
    for (int j = 0; j < factors; ++j) loadings(i, j) /= norm;
  }

  KAdaptInstance inst;
  inst.family = "knapsack";
  inst.name = format_name("kp", {{"n", items}}, seed);
  inst.seed = seed;
  inst.n = 0;
  inst.m = items;
  inst.q = factors + 1;
  inst.K = params.K;
  inst.xi0_augmented = true;
  inst.negated_objective = true;
  init_empty_coupling(inst);

  // Profits p_i = pbar_i (1 + sum_j Phi_ij xi_j / 2), stored negated.
  inst.recourse_cost = Matrix(inst.q, inst.m);
  for (int i = 0; i < items; ++i) {
    inst.recourse_cost(0, i) = -profits[i];
    for (int j = 0; j < factors; ++j) {
      inst.recourse_cost(j + 1, i) = -loadings(i, j) * profits[i] / 2.0;
    }
  }
  inst.recourse_set = Polytope::empty(inst.m);
  inst.recourse_set.add_row(weights, RowSense::kLessEqual, capacity);
  inst.first_stage_set = Polytope::empty(0);

  inst.scenario_set.lo.assign(inst.q, -1.0);
  inst.scenario_set.hi.assign(inst.q, 1.0);
  inst.scenario_set.lo[0] = inst.scenario_set.hi[0] = 1.0;
  inst.scenario_set.rows = Polytope::empty(inst.q);
  validate(inst);
  return inst;
}

KAdaptInstance generate_generic(const GenericParams& params, std::uint64_t seed) {
  if (params.n < 1 || params.m < 1) throw ModelError("generic instance needs n, m >= 1");
  if (params.gamma < 0) throw ModelError("uncertainty budget must be nonnegative");
  if (params.K < 1) throw ModelError("K must be at least 1");
  if (params.b > params.n) {
    throw ModelError("first-stage cardinality b=" + std::to_string(params.b) +
                     " exceeds n=" + std::to_string(params.n));
  }
  const int b = params.b > 0 ? params.b : std::min(10, params.n);

  SplitMix64 root(seed);
  SplitMix64 a_rng = root.split();
  SplitMix64 c_rng = root.split();
  SplitMix64 d_rng = root.split();
  SplitMix64 f_rng = root.split();

  KAdaptInstance inst;
  inst.family = "generic";
  inst.name = format_name("gen", {{"n", params.n}, {"m", params.m}, {"g", params.gamma}}, seed);
  inst.seed = seed;
  inst.n = params.n;
  inst.m = params.m;
  inst.q = params.m + 1;
  inst.K = params.K;
  inst.xi0_augmented = true;

  inst.first_stage_cost.resize(inst.n);
  for (double& a : inst.first_stage_cost) a = a_rng.uniform(8.0, 12.0);

  inst.recourse_cost = Matrix(inst.q, inst.m);
  for (int j = 0; j < inst.m; ++j) {
    const double nominal = c_rng.uniform(8.0, 12.0);
    inst.recourse_cost(0, j) = nominal;
    inst.recourse_cost(j + 1, j) = params.deviation_sign * params.deviation_fraction * nominal;
  }

  // d'x + f'y >= l, stored as -d'x - f'y <= -l.
  inst.coupling_first = Matrix(1, inst.n);
  inst.coupling_recourse = Matrix(1, inst.m);
  for (int i = 0; i < inst.n; ++i) inst.coupling_first(0, i) = -d_rng.uniform(50.0, 100.0);
  for (int j = 0; j < inst.m; ++j) inst.coupling_recourse(0, j) = -f_rng.uniform(80.0, 90.0);
  inst.coupling_rhs = {-params.coupling_level};

  inst.first_stage_set = Polytope::empty(inst.n);
  inst.first_stage_set.add_row(std::vector<double>(inst.n, 1.0), RowSense::kEqual, b);
  inst.recourse_set = Polytope::empty(inst.m);
  inst.scenario_set = augmented_budget_set(inst.m, params.gamma);
  validate(inst);
  return inst;
}

}  // namespace kadapt

namespace kadapt {

KAdaptInstance with_zero_constraint_uncertainty(const KAdaptInstance& inst) {
  KAdaptInstance out = inst;
  out.variant = Variant::kConstraint;
  out.coupling_uncertain.assign(inst.q, Matrix(inst.s(), inst.m));
  return out;
}

KAdaptInstance generate_tiny(std::string_view family, Variant variant, int max_dim, int K,
                             std::uint64_t seed) {
  if (max_dim < 2) throw ModelError("tiny instances need max_dim >= 2");
  SplitMix64 root(seed);
  SplitMix64 shape = root.split();
  const std::uint64_t data_seed = root.next();
  SplitMix64 extra = root.split();

  KAdaptInstance inst;
  if (family == "shortest-path") {
    ShortestPathParams p;
    p.num_nodes = shape.uniform_int(3, std::min(6, max_dim + 1));
    p.gamma = shape.uniform_int(0, 2);
    p.K = K;
    inst = generate_shortest_path(p, data_seed);
    if (variant == Variant::kConstraint) {
      // Risk budget: sum_a rho_a (1 + xi_a) y_a <= R, with R leaving room
      // for the least risky path under the nominal scenario.
      std::vector<double> rho(inst.m);
      for (double& r : rho) r = extra.uniform(1.0, 3.0);
      milp::MilpModel model;
      for (int a = 0; a < inst.m; ++a) model.add_binary();
      for (int i = 0; i < inst.recourse_set.num_rows(); ++i) {
        std::vector<milp::Term> terms;
        for (int a = 0; a < inst.m; ++a) {
          if (inst.recourse_set.lhs(i, a) != 0.0) terms.push_back({a, inst.recourse_set.lhs(i, a)});
        }
        model.add_row(std::move(terms), inst.recourse_set.sense[i], inst.recourse_set.rhs[i]);
      }
      std::vector<milp::Term> obj;
      for (int a = 0; a < inst.m; ++a) obj.push_back({a, rho[a]});
      model.set_objective(std::move(obj));
      const double least = milp::solve_milp(model).objective;
      inst.coupling_first = Matrix(1, 0);
      inst.coupling_recourse = Matrix(1, inst.m);
      for (int a = 0; a < inst.m; ++a) inst.coupling_recourse(0, a) = rho[a];
      inst.coupling_rhs = {1.4 * least + 0.5};
      inst.variant = Variant::kConstraint;
      inst.coupling_uncertain.assign(inst.q, Matrix(1, inst.m));
      for (int a = 0; a < inst.m; ++a) inst.coupling_uncertain[a + 1](0, a) = rho[a];
    }
  } else if (family == "knapsack") {
    KnapsackParams p;
    p.items = shape.uniform_int(2, std::min(8, max_dim + 3));
    p.factors = 1;
    p.K = K;
    inst = generate_knapsack(p, data_seed);
    if (variant == Variant::kConstraint) {
      // The capacity row moves into the coupling block, where the single
      // factor perturbs every weight by up to 20 percent.
      const std::vector<double> w(inst.recourse_set.lhs.row(0).begin(),
                                  inst.recourse_set.lhs.row(0).end());
      const double cap = inst.recourse_set.rhs[0];
      inst.recourse_set = Polytope::empty(inst.m);
      inst.coupling_first = Matrix(1, 0);
      inst.coupling_recourse = Matrix(1, inst.m);
      for (int i = 0; i < inst.m; ++i) inst.coupling_recourse(0, i) = w[i];
      inst.coupling_rhs = {cap};
      inst.variant = Variant::kConstraint;
      inst.coupling_uncertain.assign(inst.q, Matrix(1, inst.m));
      for (int i = 0; i < inst.m; ++i) {
        inst.coupling_uncertain[1](0, i) = 0.2 * w[i] * extra.uniform();
      }
    }
  } else if (family == "generic") {
    GenericParams p;
    p.n = shape.uniform_int(2, max_dim);
    p.m = shape.uniform_int(2, max_dim);
    p.b = shape.uniform_int(1, p.n - 1);
    p.gamma = shape.uniform_int(0, 2);
    p.K = K;
    p.deviation_sign = 1.0;
    // Every x then needs about r recourse items of capacity f >= 80.
    const int r = shape.uniform_int(1, std::max(1, p.m / 2));
    p.coupling_level = 50.0 * p.b + 80.0 * r;
    inst = generate_generic(p, data_seed);
    if (variant == Variant::kConstraint) {
      inst.variant = Variant::kConstraint;
      inst.coupling_uncertain.assign(inst.q, Matrix(1, inst.m));
      for (int j = 0; j < inst.m; ++j) {
        inst.coupling_uncertain[j + 1](0, j) = -0.3 * inst.coupling_recourse(0, j);
      }
    }
  } else {
    throw ModelError("unknown family '" + std::string(family) + "'");
  }
  inst.name = "tiny-" + std::string(family) + "-" + std::string(to_string(variant)) + "-s" +
              std::to_string(seed);
  inst.seed = seed;
  validate(inst);
  return inst;
}

}  // namespace kadapt
