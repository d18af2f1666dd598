// Command-line surface: bounds tables, single-instance solves, batch
// experiments over random instances, and an invariant-check harness.
//
// Exit codes: 0 success, 1 usage/file/parse errors, 2 solver failure,
// 3 failed checks.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sarop/constraints.hpp"
#include "sarop/geometry.hpp"
#include "sarop/io.hpp"
#include "sarop/optimize.hpp"
#include "sarop/pomdp.hpp"
#include "sarop/random.hpp"

namespace {

using namespace sarop;

// ---------------------------------------------------------------------------
// Shared configuration
// ---------------------------------------------------------------------------

struct Config {
  // bounds
  std::string partitions_text;
  int n_actions = 2;
  // instance source (solve / check)
  std::string input_path;
  std::string partition_text;
  std::uint64_t seed = 0;
  // solve / batch
  std::string method_name = "lagrange-relevant";
  std::string methods_text = "kkt,lagrange-all,lagrange-relevant";
  int n_trials = 20;
  double grid_step = 0.02;
  int pgd_steps = 300;
  double pgd_rate = 1.0;
  bool include_solutions = false;
  std::string dump_system_path;
  // check
  int check_trials = 20;
  double check_tol = 1e-7;
  // output
  std::string format = "table";
  std::string output_path;
  // tracker
  TrackerOptions tracker;
};

std::vector<int> parse_partition(const std::string& text) {
  std::vector<int> sizes;
  std::stringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ',')) {
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(token, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("partition: '" + token +
                                  "' is not an integer");
    }
    if (used != token.size() || value <= 0)
      throw std::invalid_argument("partition: fiber sizes must be positive "
                                  "integers, got '" + token + "'");
    sizes.push_back(value);
  }
  if (sizes.empty())
    throw std::invalid_argument("partition: expected a comma-separated list "
                                "of fiber sizes, e.g. 2,1");
  return sizes;
}

std::vector<std::vector<int>> parse_partitions(const std::string& text) {
  std::vector<std::vector<int>> partitions;
  std::stringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ';'))
    partitions.push_back(parse_partition(token));
  if (partitions.empty())
    throw std::invalid_argument("partitions: expected semicolon-separated "
                                "partitions, e.g. 3;2,1;1,1,1");
  return partitions;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream stream(path);
  if (!stream)
    throw std::runtime_error("cannot write output file '" + path + "'");
  stream << text;
  if (!text.empty() && text.back() != '\n') stream << '\n';
}

Pomdp make_instance(const Config& config) {
  const bool have_file = !config.input_path.empty();
  const bool have_generator = !config.partition_text.empty();
  if (have_file == have_generator) {
    throw std::invalid_argument(
        "exactly one instance source is required: --input FILE or "
        "--partition SIZES (with --na / --seed)");
  }
  if (have_file) return load_pomdp(config.input_path);
  const std::vector<int> fibers = parse_partition(config.partition_text);
  const int n_states = std::accumulate(fibers.begin(), fibers.end(), 0);
  return random_pomdp(n_states, config.n_actions, fibers, config.seed);
}

std::vector<Method> parse_methods(const std::string& text) {
  std::vector<Method> methods;
  std::stringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ','))
    methods.push_back(method_from_string(token));
  if (methods.empty())
    throw std::invalid_argument("methods: expected a comma-separated list");
  return methods;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

int run_bounds(const Config& config) {
  const auto partitions = parse_partitions(config.partitions_text);
  std::vector<BoundSummary> summaries;
  summaries.reserve(partitions.size());
  for (const auto& fibers : partitions) {
    const int n_states = std::accumulate(fibers.begin(), fibers.end(), 0);
    summaries.push_back(bound_summary(n_states, config.n_actions, fibers));
  }

  std::ostringstream out;
  if (config.format == "csv") {
    out << bounds_csv_header() << '\n';
    for (std::size_t i = 0; i < partitions.size(); ++i)
      out << bounds_csv_row(partitions[i], config.n_actions, summaries[i])
          << '\n';
  } else if (config.format == "json") {
    Json rows = Json::array();
    for (std::size_t i = 0; i < partitions.size(); ++i) {
      Json row;
      row["partition"] = format_partition(partitions[i]);
      row["n_actions"] = config.n_actions;
      row["components_total"] = summaries[i].total_components;
      row["components_relevant"] = summaries[i].relevant_components;
      row["bound_total"] = summaries[i].total_bound;
      row["bound_relevant"] = summaries[i].relevant_bound;
      rows.push_back(row);
    }
    out << rows.dump(2) << '\n';
  } else {
    out << std::left << std::setw(14) << "partition" << std::right
        << std::setw(12) << "components" << std::setw(12) << "relevant"
        << std::setw(12) << "bound" << std::setw(16) << "relevant_bound"
        << '\n';
    for (std::size_t i = 0; i < partitions.size(); ++i) {
      out << std::left << std::setw(14)
          << ("(" + format_partition(partitions[i]) + ")") << std::right
          << std::setw(12) << summaries[i].total_components << std::setw(12)
          << summaries[i].relevant_components << std::setw(12)
          << summaries[i].total_bound << std::setw(16)
          << summaries[i].relevant_bound << '\n';
    }
  }
  write_output(out.str(), config.output_path);
  return 0;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

void dump_systems(const Pomdp& model, Method method, const std::string& path) {
  Json dump;
  dump["method"] = to_string(method);
  Json systems = Json::array();
  auto add = [&](const BoundaryComponent& component, const PolySystem& system) {
    Json entry;
    Json zero_sets = Json::array();
    for (std::uint32_t mask : component.zero_sets) zero_sets.push_back(mask);
    entry["zero_sets"] = zero_sets;
    entry["system"] = system_to_json(system);
    systems.push_back(entry);
  };
  const std::vector<int> fibers = model.fiber_sizes();
  if (method == Method::kkt) {
    const BoundaryComponent interior =
        full_component(model.n_actions, fibers, model.n_states);
    add(interior, build_kkt_system(model, component_anchors(model, interior)));
  } else {
    const auto components = method == Method::lagrange_relevant
                                ? enumerate_relevant(model.n_actions, fibers)
                                : enumerate_components(model.n_actions, fibers);
    for (const BoundaryComponent& component : components)
      add(component,
          build_lagrange_system(model, component,
                                component_anchors(model, component)));
  }
  dump["systems"] = systems;
  std::ofstream stream(path);
  if (!stream)
    throw std::runtime_error("cannot write system dump '" + path + "'");
  stream << dump.dump(2) << '\n';
}

std::string policy_table(const Policy& policy) {
  std::ostringstream out;
  for (int o = 0; o < policy.prob.cols(); ++o) {
    out << "  obs " << o << ":";
    for (int a = 0; a < policy.prob.rows(); ++a)
      out << ' ' << format_double(policy.prob(a, o));
    out << '\n';
  }
  return out.str();
}

int run_solve(Config& config) {
  const Pomdp model = make_instance(config);
  const Method method = method_from_string(config.method_name);

  if (!config.dump_system_path.empty() && method != Method::pgd &&
      method != Method::brute) {
    dump_systems(model, method, config.dump_system_path);
  }

  SolveReport report;
  if (method == Method::pgd) {
    auto [policy, value] = projected_gradient(
        model, uniform_policy(model.n_actions, model.n_observations),
        config.pgd_steps, config.pgd_rate);
    report.method = method;
    report.success = true;
    report.best_policy = policy;
    report.best_value = value;
    report.best_eta = phi(model, policy);
  } else if (method == Method::brute) {
    auto [policy, value] = brute_force(model, config.grid_step);
    report.method = method;
    report.success = true;
    report.best_policy = policy;
    report.best_value = value;
    report.best_eta = phi(model, policy);
  } else {
    report = solve_with_method(model, method, config.tracker);
  }

  std::ostringstream out;
  if (config.format == "json") {
    out << report_to_json(report, config.include_solutions).dump(2) << '\n';
  } else {
    out << "method: " << to_string(report.method) << '\n';
    if (method != Method::pgd && method != Method::brute) {
      out << "components solved: " << report.per_component.size() << '\n'
          << "critical points (complex / real / positive): "
          << report.total_complex << " / " << report.total_real << " / "
          << report.total_positive << '\n';
      if (method == Method::kkt)
        out << "dual feasible: " << report.dual_feasible << '\n';
    }
    if (report.success) {
      out << "best value: " << format_double(report.best_value) << '\n'
          << "best policy (rows = actions):\n"
          << policy_table(report.best_policy);
      if (method == Method::lagrange_all || method == Method::lagrange_relevant)
        out << "confirmation gap: " << format_double(report.retry_gap) << '\n';
    } else {
      out << "FAILED: " << report.failure << '\n';
    }
  }
  write_output(out.str(), config.output_path);

  if (!report.success) {
    std::cerr << "solver failure: " << report.failure << '\n';
    return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// batch
// ---------------------------------------------------------------------------

int run_batch(Config& config) {
  if (config.partition_text.empty())
    throw std::invalid_argument("batch: --partition is required");
  const std::vector<int> fibers = parse_partition(config.partition_text);
  const int n_states = std::accumulate(fibers.begin(), fibers.end(), 0);
  const std::vector<Method> methods = parse_methods(config.methods_text);

  const BatchResult batch =
      batch_experiment(n_states, config.n_actions, fibers, config.n_trials,
                       config.seed, methods, config.tracker);

  std::ostringstream out;
  if (config.format == "json") {
    out << batch_to_json(batch).dump(2) << '\n';
  } else if (config.format == "table") {
    out << std::left << std::setw(12) << "partition" << std::setw(20)
        << "method" << std::right << std::setw(16) << "complex"
        << std::setw(16) << "real" << std::setw(16) << "positive"
        << std::setw(10) << "failed" << '\n';
    for (const MethodStats& stats : batch.per_method) {
      auto cell = [](double mean, double sd) {
        std::ostringstream c;
        c << std::fixed << std::setprecision(2) << mean << " +- " << sd;
        return c.str();
      };
      out << std::left << std::setw(12)
          << ("(" + format_partition(fibers) + ")") << std::setw(20)
          << to_string(stats.method) << std::right << std::setw(16)
          << cell(stats.complex_mean, stats.complex_sd) << std::setw(16)
          << cell(stats.real_mean, stats.real_sd) << std::setw(16)
          << cell(stats.positive_mean, stats.positive_sd) << std::setw(10)
          << stats.n_failed << '\n';
    }
    out << "max best-value gap across methods: "
        << format_double(batch.value_agreement_max_gap) << '\n';
  } else {
    out << batch_csv_header() << '\n' << batch_csv_rows(batch);
  }
  write_output(out.str(), config.output_path);
  return 0;
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

int run_check(Config& config) {
  std::vector<std::string> failures;
  std::ostringstream out;
  auto record = [&](const std::string& name, bool ok,
                    const std::string& detail) {
    out << (ok ? "PASS " : "FAIL ") << name;
    if (!detail.empty()) out << " (" << detail << ")";
    out << '\n';
    if (!ok) failures.push_back(name);
  };

  std::vector<Pomdp> models;
  if (!config.input_path.empty()) {
    try {
      models.push_back(load_pomdp(config.input_path));
      record("instance-validation", true, config.input_path);
    } catch (const std::invalid_argument& error) {
      record("instance-validation", false, error.what());
      write_output(out.str(), config.output_path);
      return 3;
    }
  } else {
    // Rotate through small shapes covering blind, mixed and fully
    // observable fibers.
    const std::vector<std::vector<int>> shapes = {
        {3}, {2, 1}, {1, 1, 1}, {2, 2}, {2, 1, 1}};
    std::mt19937_64 gen(config.seed);
    for (int t = 0; t < config.check_trials; ++t) {
      const auto& fibers = shapes[t % shapes.size()];
      const int n_states = std::accumulate(fibers.begin(), fibers.end(), 0);
      models.push_back(random_pomdp(n_states, 2 + t % 2, fibers, gen()));
    }
  }

  // Feasibility of the frequency map: phi(pi) must satisfy every linear and
  // minor constraint and be a nonnegative distribution.
  {
    double worst = 0.0;
    std::mt19937_64 gen(config.seed ^ 0x9E3779B97F4A7C15ull);
    for (const Pomdp& model : models) {
      for (int k = 0; k < 5; ++k) {
        const Policy pi =
            random_policy(model.n_actions, model.n_observations, gen());
        const StateActionFrequency eta = phi(model, pi);
        const FeasibilityResidual residual =
            feasibility_residual(model, eta.eta);
        worst = std::max({worst, residual.max_linear, residual.max_quadratic,
                          residual.sum_gap, -residual.min_entry});
      }
    }
    record("frequency-feasibility", worst < config.check_tol,
           "worst residual " + format_double(worst) + ", tol " +
               format_double(config.check_tol));
  }

  // Reward gradient against central differences.
  {
    double worst_rel = 0.0;
    std::mt19937_64 gen(config.seed ^ 0xD1B54A32D192ED03ull);
    for (const Pomdp& model : models) {
      Policy pi = random_policy(model.n_actions, model.n_observations, gen());
      // Step toward the interior so finite differences stay in the simplex.
      pi.prob = 0.8 * pi.prob +
                0.2 * MatrixXd::Constant(model.n_actions, model.n_observations,
                                         1.0 / model.n_actions);
      const MatrixXd grad = reward_gradient(model, pi);
      const double h = 1e-5;
      for (int o = 0; o < model.n_observations; ++o) {
        // Tangent direction: move action 0 mass toward action 1.
        Policy up = pi, down = pi;
        up.prob(0, o) += h;
        up.prob(1, o) -= h;
        down.prob(0, o) -= h;
        down.prob(1, o) += h;
        const double directional =
            (reward_value(model, up) - reward_value(model, down)) / (2 * h);
        const double predicted = grad(0, o) - grad(1, o);
        const double scale = std::max(1.0, std::abs(directional));
        worst_rel =
            std::max(worst_rel, std::abs(directional - predicted) / scale);
      }
    }
    record("gradient-vs-differences", worst_rel < 1e-5,
           "worst relative error " + format_double(worst_rel));
  }

  // Method agreement: the KKT route and the full Lagrange sweep must find
  // the same best value.
  {
    double worst_gap = 0.0;
    bool all_succeeded = true;
    std::mt19937_64 gen(config.seed ^ 0x94D049BB133111EBull);
    const int n_agree = std::min<int>(3, static_cast<int>(models.size()));
    for (int t = 0; t < n_agree; ++t) {
      const Pomdp model = random_pomdp(3, 2, {2, 1}, gen());
      const SolveReport kkt = solve_kkt(model, config.tracker);
      const SolveReport sweep =
          solve_boundary_sweep(model, /*relevant_only=*/false, config.tracker);
      if (!kkt.success || !sweep.success) {
        all_succeeded = false;
        continue;
      }
      worst_gap =
          std::max(worst_gap, std::abs(kkt.best_value - sweep.best_value));
    }
    record("kkt-vs-sweep-agreement", all_succeeded && worst_gap < 1e-6,
           all_succeeded ? "worst gap " + format_double(worst_gap)
                         : "a solve failed");
  }

  write_output(out.str(), config.output_path);
  if (!failures.empty()) {
    std::cerr << failures.size() << " check(s) failed:";
    for (const std::string& name : failures) std::cerr << ' ' << name;
    std::cerr << '\n';
    return 3;
  }
  return 0;
}

void add_tracker_flags(CLI::App* cmd, Config& config) {
  cmd->add_option("--gamma-seed", config.tracker.gamma_seed,
                  "Seed for the homotopy gamma draw");
  cmd->add_option("--threads", config.tracker.threads,
                  "Worker threads for path tracking (1 = reference run)");
  cmd->add_option("--budget", config.tracker.bezout_budget,
                  "Refuse systems whose path count exceeds this bound")
      ->envname("SAROP_BUDGET");
  cmd->add_option("--initial-step", config.tracker.initial_step,
                  "Initial continuation step");
  cmd->add_option("--min-step", config.tracker.min_step,
                  "Smallest step before a path is abandoned");
  cmd->add_option("--corrector-tol", config.tracker.corrector_tol,
                  "Newton corrector tolerance");
  cmd->add_option("--endpoint-tol", config.tracker.endpoint_tol,
                  "Final residual tolerance at t = 1");
  cmd->add_option("--max-path-steps", config.tracker.max_path_steps,
                  "Step limit per path");
  cmd->add_option("--tol-real", config.tracker.tol_real,
                  "Imaginary-part tolerance for classifying real solutions");
  cmd->add_option("--tol-pos", config.tracker.tol_pos,
                  "Negativity tolerance for classifying feasible solutions");
  cmd->add_option("--dedupe-radius", config.tracker.dedupe_radius,
                  "Clustering radius for duplicate endpoints");
  cmd->add_option("--divergence-threshold", config.tracker.divergence_threshold,
                  "Norm beyond which a path counts as diverging to infinity");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Certified policy optimization for discounted POMDPs whose "
      "observations deterministically aggregate states: exact bounds on the "
      "number of critical points, homotopy-continuation solves of the "
      "KKT/Lagrange systems, and baseline methods"};
  app.require_subcommand(1);
  Config config;
  int exit_code = 0;

  CLI::App* bounds = app.add_subcommand(
      "bounds", "Boundary-component counts and critical-point bounds");
  bounds
      ->add_option("--partitions", config.partitions_text,
                   "Semicolon-separated fiber-size lists, e.g. 3;2,1;1,1,1")
      ->required();
  bounds->add_option("--na", config.n_actions, "Number of actions")
      ->required();
  bounds->add_option("--format", config.format, "table, csv or json")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  bounds->add_option("-o,--output", config.output_path, "Output file");
  bounds->callback([&]() { exit_code = run_bounds(config); });

  CLI::App* solve = app.add_subcommand(
      "solve", "Solve one instance for a certified optimal policy");
  solve->add_option("--input", config.input_path, "Instance JSON file");
  solve->add_option("--partition", config.partition_text,
                    "Generate: fiber sizes, e.g. 2,1");
  solve->add_option("--na", config.n_actions, "Generate: number of actions");
  solve->add_option("--seed", config.seed, "Generate: instance seed");
  solve->add_option("--method", config.method_name,
                    "kkt, lagrange-all, lagrange-relevant, pgd or brute");
  solve->add_option("--grid-step", config.grid_step,
                    "Grid spacing for --method brute");
  solve->add_option("--pgd-steps", config.pgd_steps,
                    "Iteration limit for --method pgd");
  solve->add_option("--pgd-rate", config.pgd_rate,
                    "Initial learning rate for --method pgd");
  solve->add_flag("--solutions", config.include_solutions,
                  "Include every classified solution in JSON output");
  solve->add_option("--dump-system", config.dump_system_path,
                    "Write the polynomial system(s) as JSON to this file");
  solve->add_option("--format", config.format, "table or json")
      ->check(CLI::IsMember({"table", "json"}));
  solve->add_option("-o,--output", config.output_path, "Output file");
  add_tracker_flags(solve, config);
  solve->callback([&]() { exit_code = run_solve(config); });

  CLI::App* batch = app.add_subcommand(
      "batch", "Solution statistics over random instances");
  batch
      ->add_option("--partition", config.partition_text,
                   "Fiber sizes, e.g. 2,1")
      ->required();
  batch->add_option("--na", config.n_actions, "Number of actions");
  batch->add_option("--trials", config.n_trials, "Number of random instances");
  batch->add_option("--seed", config.seed, "Master seed")->required();
  batch->add_option("--methods", config.methods_text,
                    "Comma-separated method list");
  batch->add_option("--format", config.format, "table, csv or json")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  batch->add_option("-o,--output", config.output_path, "Output file");
  add_tracker_flags(batch, config);
  batch->callback([&]() { exit_code = run_batch(config); });

  CLI::App* check = app.add_subcommand(
      "check", "Run the invariant suites (feasibility, gradients, method "
               "agreement) on generated instances or one input file");
  check->add_option("--input", config.input_path,
                    "Validate and check this instance instead");
  check->add_option("--seed", config.seed, "Master seed");
  check->add_option("--trials", config.check_trials,
                    "Number of generated instances");
  check->add_option("--tol", config.check_tol,
                    "Feasibility residual tolerance");
  check->add_option("-o,--output", config.output_path, "Output file");
  add_tracker_flags(check, config);
  check->callback([&]() { exit_code = run_check(config); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? 0 : 1;
  } catch (const BudgetExceeded& error) {
    std::cerr << "solver failure: " << error.what() << '\n';
    return 2;
  } catch (const Json::parse_error& error) {
    std::cerr << "parse error: " << error.what() << '\n';
    return 1;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << '\n';
    return 1;
  }
  return exit_code;
}
