#include "sarop/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace sarop {

namespace {

Json vector_to_json(const Eigen::Ref<const VectorXd>& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

VectorXd vector_from_json(const Json& array, const char* what) {
  if (!array.is_array())
    throw std::invalid_argument(std::string(what) + ": expected an array");
  VectorXd v(array.size());
  Eigen::Index i = 0;
  for (const Json& entry : array) v[i++] = entry.get<double>();
  return v;
}

// One polynomial term as JSON: dense exponent vector plus [re, im].
Json term_to_json(const Exponents& exponents, Complex coeff) {
  Json term;
  term["exponents"] = exponents;
  term["coeff"] = {coeff.real(), coeff.imag()};
  return term;
}

// Quadratic monomial eta(s,a) * eta(s2,a2) over the flattened coordinates.
Json quadratic_term(int n_vars, int s, int a, int s2, int a2, int n_actions,
                    double coeff) {
  Exponents exps(n_vars, 0);
  exps[sa_index(s, a, n_actions)] += 1;
  exps[sa_index(s2, a2, n_actions)] += 1;
  return term_to_json(exps, Complex(coeff, 0.0));
}

}  // namespace

Json pomdp_to_json(const Pomdp& model) {
  Json document;
  document["n_states"] = model.n_states;
  document["n_actions"] = model.n_actions;
  document["n_observations"] = model.n_observations;
  document["gamma"] = model.gamma;
  document["mu"] = vector_to_json(model.mu);
  document["g_beta"] = model.g_beta;
  Json alpha = Json::array();
  for (int s = 0; s < model.n_states; ++s)
    for (int a = 0; a < model.n_actions; ++a)
      alpha.push_back(vector_to_json(model.alpha.col(sa_index(s, a, model.n_actions))));
  document["alpha"] = alpha;
  Json reward = Json::array();
  for (int s = 0; s < model.n_states; ++s) {
    Json row = Json::array();
    for (int a = 0; a < model.n_actions; ++a) row.push_back(model.reward(s, a));
    reward.push_back(row);
  }
  document["reward"] = reward;
  return document;
}

Pomdp pomdp_from_json(const Json& document) {
  for (const char* key : {"n_states", "n_actions", "n_observations", "gamma",
                          "mu", "g_beta", "alpha", "reward"}) {
    if (!document.contains(key))
      throw std::invalid_argument(std::string("instance document: missing field '") +
                                  key + "'");
  }
  Pomdp model;
  model.n_states = document["n_states"].get<int>();
  model.n_actions = document["n_actions"].get<int>();
  model.n_observations = document["n_observations"].get<int>();
  model.gamma = document["gamma"].get<double>();
  model.mu = vector_from_json(document["mu"], "mu");
  model.g_beta = document["g_beta"].get<std::vector<int>>();

  const Json& alpha = document["alpha"];
  if (!alpha.is_array() ||
      static_cast<int>(alpha.size()) != model.n_states * model.n_actions) {
    throw std::invalid_argument(
        "alpha: expected one next-state distribution per flattened "
        "(state, action) pair, " +
        std::to_string(model.n_states * model.n_actions) + " in total");
  }
  model.alpha.resize(model.n_states, model.n_states * model.n_actions);
  for (int col = 0; col < static_cast<int>(alpha.size()); ++col) {
    VectorXd column = vector_from_json(alpha[col], "alpha column");
    if (column.size() != model.n_states)
      throw std::invalid_argument("alpha: column " + std::to_string(col) +
                                  " has wrong length");
    model.alpha.col(col) = column;
  }

  const Json& reward = document["reward"];
  if (!reward.is_array() || static_cast<int>(reward.size()) != model.n_states)
    throw std::invalid_argument("reward: expected one row per state");
  model.reward.resize(model.n_states, model.n_actions);
  for (int s = 0; s < model.n_states; ++s) {
    VectorXd row = vector_from_json(reward[s], "reward row");
    if (row.size() != model.n_actions)
      throw std::invalid_argument("reward: row " + std::to_string(s) +
                                  " has wrong length");
    model.reward.row(s) = row.transpose();
  }

  const std::vector<std::string> violations = validate(model);
  if (!violations.empty()) {
    std::string message = "instance document is inconsistent:";
    for (const std::string& v : violations) message += "\n  - " + v;
    throw std::invalid_argument(message);
  }
  return model;
}

Pomdp load_pomdp(const std::string& path) {
  std::ifstream stream(path);
  if (!stream)
    throw std::runtime_error("cannot open instance file '" + path + "'");
  // Parse with exceptions on: malformed documents raise
  // nlohmann::json::parse_error carrying the byte offset.
  Json document = Json::parse(stream);
  return pomdp_from_json(document);
}

void save_pomdp(const Pomdp& model, const std::string& path) {
  std::ofstream stream(path);
  if (!stream)
    throw std::runtime_error("cannot write instance file '" + path + "'");
  stream << pomdp_to_json(model).dump(2) << '\n';
}

Json constraints_to_json(const Pomdp& model, const Anchors& anchors) {
  const int n_vars = model.n_states * model.n_actions;
  Json out;
  out["n_vars"] = n_vars;

  Json linears = Json::array();
  for (const LinearConstraint& c : linear_constraints(model)) {
    Json entry;
    entry["kind"] = "linear";
    entry["state"] = c.state;
    Json terms = Json::array();
    for (int v = 0; v < n_vars; ++v) {
      if (c.coeffs[v] == 0.0) continue;
      Exponents exps(n_vars, 0);
      exps[v] = 1;
      terms.push_back(term_to_json(exps, Complex(c.coeffs[v], 0.0)));
    }
    if (c.constant != 0.0)
      terms.push_back(term_to_json(Exponents(n_vars, 0), Complex(c.constant, 0.0)));
    entry["terms"] = terms;
    linears.push_back(entry);
  }
  out["linear"] = linears;

  Json minors = Json::array();
  for (const MinorConstraint& c : minor_constraints(model)) {
    Json entry;
    entry["kind"] = "minor";
    entry["obs"] = c.obs;
    entry["states"] = {c.s, c.s2};
    entry["actions"] = {c.a, c.a2};
    entry["terms"] = {
        quadratic_term(n_vars, c.s, c.a, c.s2, c.a2, model.n_actions, 1.0),
        quadratic_term(n_vars, c.s, c.a2, c.s2, c.a, model.n_actions, -1.0)};
    minors.push_back(entry);
  }
  out["minor"] = minors;

  Json reduced = Json::array();
  for (const ReducedQuadratic& c : reduced_quadratics(model, anchors)) {
    Json entry;
    entry["kind"] = "reduced-quadratic";
    entry["obs"] = c.obs;
    entry["state"] = c.s;
    entry["action"] = c.a;
    entry["anchor_state"] = c.anchor_state;
    entry["anchor_action"] = c.anchor_action;
    Json terms = Json::array();
    for (int a2 = 0; a2 < model.n_actions; ++a2) {
      if (a2 == c.a) continue;
      terms.push_back(quadratic_term(n_vars, c.s, c.a, c.anchor_state, a2,
                                     model.n_actions, 1.0));
      terms.push_back(quadratic_term(n_vars, c.anchor_state, c.a, c.s, a2,
                                     model.n_actions, -1.0));
    }
    entry["terms"] = terms;
    reduced.push_back(entry);
  }
  out["reduced"] = reduced;
  return out;
}

Json system_to_json(const PolySystem& system) {
  Json out;
  out["variables"] = system.registry.names();
  Json equations = Json::array();
  for (const Polynomial& equation : system.equations) {
    Json terms = Json::array();
    for (const auto& [exps, coeff] : equation.terms())
      terms.push_back(term_to_json(exps, coeff));
    equations.push_back(terms);
  }
  out["equations"] = equations;
  return out;
}

PolySystem system_from_json(const Json& document) {
  PolySystem system;
  for (const Json& name : document.at("variables"))
    system.registry.add(name.get<std::string>());
  const int n_vars = system.n_vars();
  for (const Json& terms : document.at("equations")) {
    Polynomial equation(n_vars);
    for (const Json& term : terms) {
      const Exponents exps = term.at("exponents").get<Exponents>();
      if (static_cast<int>(exps.size()) != n_vars)
        throw std::invalid_argument(
            "system document: exponent vector length mismatch");
      const Json& coeff = term.at("coeff");
      equation.add_term(exps,
                        Complex(coeff.at(0).get<double>(),
                                coeff.at(1).get<double>()));
    }
    system.equations.push_back(std::move(equation));
  }
  return system;
}

namespace {

Json solution_to_json(const TrackedSolution& solution) {
  Json out;
  Json coords = Json::array();
  for (Eigen::Index i = 0; i < solution.point.size(); ++i)
    coords.push_back({solution.point[i].real(), solution.point[i].imag()});
  out["point"] = coords;
  out["residual"] = solution.residual;
  out["status"] = to_string(solution.status);
  out["is_real"] = solution.is_real;
  out["is_positive_feasible"] = solution.is_positive_feasible;
  out["certified"] = solution.certified;
  if (std::isfinite(solution.objective)) out["objective"] = solution.objective;
  return out;
}

Json component_to_json(const ComponentResult& result, bool include_solutions) {
  Json out;
  Json zero_sets = Json::array();
  for (std::uint32_t mask : result.component.zero_sets) zero_sets.push_back(mask);
  out["zero_sets"] = zero_sets;
  out["n"] = result.component.n;
  out["m"] = result.component.m;
  out["bound"] = result.component.bound;
  out["relevant"] = result.component.relevant;
  out["n_complex"] = result.n_complex;
  out["n_real"] = result.n_real;
  out["n_positive"] = result.n_positive;
  if (std::isfinite(result.best_local_objective))
    out["best_local_objective"] = result.best_local_objective;
  out["paths"] = result.stats.n_paths;
  out["linear_direct"] = result.stats.linear_direct;
  out["n_retried"] = result.stats.n_retried;
  if (include_solutions) {
    Json solutions = Json::array();
    for (const TrackedSolution& solution : result.solutions)
      solutions.push_back(solution_to_json(solution));
    out["solutions"] = solutions;
  }
  return out;
}

}  // namespace

Json report_to_json(const SolveReport& report, bool include_solutions) {
  Json out;
  out["method"] = to_string(report.method);
  out["success"] = report.success;
  if (!report.success) out["failure"] = report.failure;
  out["total_complex"] = report.total_complex;
  out["total_real"] = report.total_real;
  out["total_positive"] = report.total_positive;
  if (report.method == Method::kkt) out["dual_feasible"] = report.dual_feasible;
  if (report.success) {
    out["best_value"] = report.best_value;
    out["best_eta"] = vector_to_json(report.best_eta.eta);
    Json policy = Json::array();
    for (int o = 0; o < report.best_policy.prob.cols(); ++o)
      policy.push_back(vector_to_json(report.best_policy.prob.col(o)));
    out["best_policy"] = policy;
    out["retry_gap"] = report.retry_gap;
  }
  out["wall_time_seconds"] = report.wall_time_seconds;
  Json components = Json::array();
  for (const ComponentResult& result : report.per_component)
    components.push_back(component_to_json(result, include_solutions));
  out["components"] = components;
  return out;
}

Json batch_to_json(const BatchResult& batch) {
  Json out;
  out["n_states"] = batch.n_states;
  out["n_actions"] = batch.n_actions;
  out["partition"] = format_partition(batch.fiber_sizes);
  out["seed"] = batch.seed;
  out["value_agreement_max_gap"] = batch.value_agreement_max_gap;
  Json methods = Json::array();
  for (const MethodStats& stats : batch.per_method) {
    Json entry;
    entry["method"] = to_string(stats.method);
    entry["n_instances"] = stats.n_instances;
    entry["n_failed"] = stats.n_failed;
    entry["complex_mean"] = stats.complex_mean;
    entry["complex_sd"] = stats.complex_sd;
    entry["real_mean"] = stats.real_mean;
    entry["real_sd"] = stats.real_sd;
    entry["positive_mean"] = stats.positive_mean;
    entry["positive_sd"] = stats.positive_sd;
    entry["complex_counts"] = stats.complex_counts;
    entry["real_counts"] = stats.real_counts;
    entry["positive_counts"] = stats.positive_counts;
    Json values = Json::array();
    for (double v : stats.best_values) {
      if (std::isfinite(v))
        values.push_back(v);
      else
        values.push_back(nullptr);
    }
    entry["best_values"] = values;
    methods.push_back(entry);
  }
  out["methods"] = methods;
  return out;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[64];
  const auto result =
      std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::string format_partition(const std::vector<int>& fiber_sizes) {
  std::string out;
  for (std::size_t i = 0; i < fiber_sizes.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(fiber_sizes[i]);
  }
  return out;
}

std::string bounds_csv_header() {
  return "partition,n_actions,components_total,components_relevant,"
         "bound_total,bound_relevant";
}

std::string bounds_csv_row(const std::vector<int>& fiber_sizes, int n_actions,
                           const BoundSummary& summary) {
  std::ostringstream row;
  row << csv_quote(format_partition(fiber_sizes)) << ',' << n_actions << ','
      << summary.total_components << ',' << summary.relevant_components << ','
      << summary.total_bound << ',' << summary.relevant_bound;
  return row.str();
}

std::string batch_csv_header() {
  return "partition,method,complex_mean,complex_sd,real_mean,real_sd,"
         "positive_mean,positive_sd,value_agreement_max_gap";
}

std::string batch_csv_rows(const BatchResult& batch) {
  std::ostringstream rows;
  for (const MethodStats& stats : batch.per_method) {
    rows << csv_quote(format_partition(batch.fiber_sizes)) << ','
         << to_string(stats.method) << ',';
    if (stats.n_instances > 0 && stats.n_failed == stats.n_instances) {
      // Every instance failed (e.g. the degree-bound budget tripped);
      // statistics would be meaningless.
      rows << "skipped,skipped,skipped,skipped,skipped,skipped,";
    } else {
      rows << format_double(stats.complex_mean) << ','
           << format_double(stats.complex_sd) << ','
           << format_double(stats.real_mean) << ','
           << format_double(stats.real_sd) << ','
           << format_double(stats.positive_mean) << ','
           << format_double(stats.positive_sd) << ',';
    }
    rows << format_double(batch.value_agreement_max_gap) << '\n';
  }
  return rows.str();
}

}  // namespace sarop
