#include "sarop/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sarop {

namespace {

constexpr std::uint64_t kPositivityProbeSeed = 1729;
constexpr int kPositivityProbes = 20;
// Improvement threshold beyond which the confirmation re-run replaces the
// first-pass winner.
constexpr double kRetryImprovement = 1e-8;
constexpr std::uint64_t kGammaRetryMultiplier = 0x9E3779B97F4A7C15ull;

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

void require_positive_marginals(const Pomdp& model) {
  if (!check_positivity(model, kPositivityProbes, kPositivityProbeSeed)) {
    throw std::invalid_argument(
        "some state keeps a zero discounted marginal under random probe "
        "policies; conditioning frequencies on states is then undefined and "
        "the critical-point reformulation does not apply");
  }
}

// Solves one boundary component's Lagrange system and classifies the roots.
ComponentResult solve_component(const Pomdp& model,
                                const BoundaryComponent& component,
                                const TrackerOptions& options) {
  ComponentResult result;
  result.component = component;
  const Anchors anchors = component_anchors(model, component);
  const PolySystem system = build_lagrange_system(model, component, anchors);
  SolveResult solved = solve_system(system, options);
  result.stats = solved.stats;
  result.solutions.reserve(solved.solutions.size());
  for (TrackedSolution& raw : solved.solutions) {
    TrackedSolution sol = classify(std::move(raw), model, component,
                                   options.tol_real, options.tol_pos);
    if (sol.status == PathStatus::converged) ++result.n_complex;
    if (sol.is_real) ++result.n_real;
    if (sol.is_positive_feasible) {
      ++result.n_positive;
      if (std::isnan(result.best_local_objective) ||
          sol.objective > result.best_local_objective) {
        result.best_local_objective = sol.objective;
      }
    }
    result.solutions.push_back(std::move(sol));
  }
  return result;
}

// Embeds the winning solution, recovers the policy, and fills the report's
// best_* fields.  Tiny negative entries (within tol_pos) are clamped to zero
// before conditioning so the recovered policy is a genuine distribution.
void fill_best(SolveReport& report, const Pomdp& model,
               const BoundaryComponent& component,
               const TrackedSolution& solution) {
  VectorXd eta = embed_eta(model, component, solution.point);
  report.best_eta =
      StateActionFrequency{eta, model.n_states, model.n_actions};
  const StateActionFrequency clamped{eta.cwiseMax(0.0), model.n_states,
                                     model.n_actions};
  report.best_policy = recover_policy(clamped, model.g_beta);
  report.best_value = solution.objective;
}

double sample_sd(const std::vector<int>& counts, double mean, int n) {
  if (n < 2) return 0.0;
  double acc = 0.0;
  for (int c : counts)
    if (c >= 0) acc += (c - mean) * (c - mean);
  return std::sqrt(acc / (n - 1));
}

}  // namespace

const char* to_string(Method method) {
  switch (method) {
    case Method::kkt: return "kkt";
    case Method::lagrange_all: return "lagrange-all";
    case Method::lagrange_relevant: return "lagrange-relevant";
    case Method::pgd: return "pgd";
    case Method::brute: return "brute";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "kkt") return Method::kkt;
  if (name == "lagrange-all") return Method::lagrange_all;
  if (name == "lagrange-relevant") return Method::lagrange_relevant;
  if (name == "pgd") return Method::pgd;
  if (name == "brute") return Method::brute;
  throw std::invalid_argument("unknown method '" + name +
                              "' (expected kkt, lagrange-all, "
                              "lagrange-relevant, pgd or brute)");
}

SolveReport solve_boundary_sweep(const Pomdp& model, bool relevant_only,
                                 const TrackerOptions& options) {
  Timer timer;
  require_positive_marginals(model);
  const std::vector<int> fibers = model.fiber_sizes();
  const std::vector<BoundaryComponent> components =
      relevant_only ? enumerate_relevant(model.n_actions, fibers)
                    : enumerate_components(model.n_actions, fibers);

  SolveReport report;
  report.method =
      relevant_only ? Method::lagrange_relevant : Method::lagrange_all;
  report.per_component.reserve(components.size());

  int best_component = -1;
  int best_solution = -1;
  for (const BoundaryComponent& component : components) {
    ComponentResult result = solve_component(model, component, options);
    report.total_complex += result.n_complex;
    report.total_real += result.n_real;
    report.total_positive += result.n_positive;
    const int index = static_cast<int>(report.per_component.size());
    for (int i = 0; i < static_cast<int>(result.solutions.size()); ++i) {
      const TrackedSolution& sol = result.solutions[i];
      if (!sol.is_positive_feasible) continue;
      if (best_component < 0 || sol.objective > report.best_value) {
        best_component = index;
        best_solution = i;
        report.best_value = sol.objective;
      }
    }
    report.per_component.push_back(std::move(result));
  }

  if (best_component < 0) {
    report.failure = "no nonnegative real critical point over " +
                     std::to_string(components.size()) +
                     " boundary components (" +
                     std::to_string(report.total_complex) +
                     " finite critical points found); the tracker may have "
                     "lost paths, or the instance is degenerate";
    report.wall_time_seconds = timer.elapsed();
    return report;
  }

  // Lost-path check: the winning component is solved once more with a fresh
  // homotopy gamma.  An improvement beyond kRetryImprovement means the first
  // pass missed the actual maximizer, so the re-run's winner is adopted.
  const BoundaryComponent& winning_component =
      report.per_component[best_component].component;
  TrackerOptions retry_options = options;
  retry_options.gamma_seed = options.gamma_seed * kGammaRetryMultiplier + 1;
  const ComponentResult retry =
      solve_component(model, winning_component, retry_options);
  const TrackedSolution* winner =
      &report.per_component[best_component].solutions[best_solution];
  const TrackedSolution* retry_winner = nullptr;
  for (const TrackedSolution& sol : retry.solutions) {
    if (!sol.is_positive_feasible) continue;
    if (retry_winner == nullptr || sol.objective > retry_winner->objective)
      retry_winner = &sol;
  }
  if (retry_winner != nullptr) {
    report.retry_gap = std::abs(retry_winner->objective - winner->objective);
    if (retry_winner->objective > winner->objective + kRetryImprovement)
      winner = retry_winner;
  }

  fill_best(report, model, winning_component, *winner);
  report.success = true;
  report.wall_time_seconds = timer.elapsed();
  return report;
}

SolveReport solve_kkt(const Pomdp& model, const TrackerOptions& options) {
  Timer timer;
  require_positive_marginals(model);
  const BoundaryComponent interior =
      full_component(model.n_actions, model.fiber_sizes(), model.n_states);
  const Anchors anchors = component_anchors(model, interior);
  const PolySystem system = build_kkt_system(model, anchors);
  const int kappa_base =
      system.n_vars() - model.n_observations * model.n_actions;

  SolveReport report;
  report.method = Method::kkt;

  SolveResult solved = solve_system(system, options);
  ComponentResult result;
  result.component = interior;
  result.stats = solved.stats;
  result.solutions.reserve(solved.solutions.size());

  int best_solution = -1;
  for (TrackedSolution& raw : solved.solutions) {
    TrackedSolution sol = classify(std::move(raw), model, interior,
                                   options.tol_real, options.tol_pos);
    if (sol.status == PathStatus::converged) ++result.n_complex;
    if (sol.is_real) ++result.n_real;
    if (sol.is_positive_feasible) {
      ++result.n_positive;
      bool dual = true;
      for (int k = kappa_base; k < system.n_vars(); ++k) {
        if (sol.point[k].real() < -options.tol_pos) {
          dual = false;
          break;
        }
      }
      if (dual) ++report.dual_feasible;
      if (std::isnan(result.best_local_objective) ||
          sol.objective > result.best_local_objective) {
        result.best_local_objective = sol.objective;
        best_solution = static_cast<int>(result.solutions.size());
      }
    }
    result.solutions.push_back(std::move(sol));
  }

  report.total_complex = result.n_complex;
  report.total_real = result.n_real;
  report.total_positive = result.n_positive;
  report.per_component.push_back(std::move(result));

  if (best_solution < 0) {
    report.failure =
        "no nonnegative real KKT point (" +
        std::to_string(report.total_complex) +
        " finite critical points found); the tracker may have lost paths, "
        "or the instance is degenerate";
    report.wall_time_seconds = timer.elapsed();
    return report;
  }

  fill_best(report, model, interior,
            report.per_component[0].solutions[best_solution]);
  report.success = true;
  report.wall_time_seconds = timer.elapsed();
  return report;
}

SolveReport solve_with_method(const Pomdp& model, Method method,
                              const TrackerOptions& options) {
  switch (method) {
    case Method::kkt: return solve_kkt(model, options);
    case Method::lagrange_all:
      return solve_boundary_sweep(model, /*relevant_only=*/false, options);
    case Method::lagrange_relevant:
      return solve_boundary_sweep(model, /*relevant_only=*/true, options);
    default:
      throw std::invalid_argument(
          std::string("solve_with_method: '") + to_string(method) +
          "' is not a critical-point method; call projected_gradient or "
          "brute_force directly");
  }
}

namespace {

// Enumerates all columns (k_0, ..., k_{n-1}) with sum k_i = resolution and
// appends prob = k / resolution to `columns`; includes the simplex boundary.
void simplex_grid(int n_actions, int resolution, int coord, int remaining,
                  VectorXd& current, std::vector<VectorXd>& columns) {
  if (coord == n_actions - 1) {
    current[coord] = static_cast<double>(remaining) / resolution;
    columns.push_back(current);
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    current[coord] = static_cast<double>(k) / resolution;
    simplex_grid(n_actions, resolution, coord + 1, remaining - k, current,
                 columns);
  }
}

void grid_product(const Pomdp& model, const std::vector<VectorXd>& columns,
                  int obs, Policy& policy, Policy& best, double& best_value) {
  if (obs == model.n_observations) {
    const double value = reward_value(model, policy);
    if (value > best_value) {
      best_value = value;
      best = policy;
    }
    return;
  }
  for (const VectorXd& column : columns) {
    policy.prob.col(obs) = column;
    grid_product(model, columns, obs + 1, policy, best, best_value);
  }
}

}  // namespace

std::pair<Policy, double> brute_force(const Pomdp& model, double grid_step) {
  const int free_dims = (model.n_actions - 1) * model.n_observations;
  if (free_dims > 4) {
    throw std::invalid_argument(
        "brute_force: refusing a grid over " + std::to_string(free_dims) +
        " free policy coordinates (limit 4); use a solver method instead");
  }
  if (!(grid_step > 0.0) || grid_step > 1.0)
    throw std::invalid_argument("brute_force: grid_step must lie in (0, 1]");
  const int resolution = std::max(1, static_cast<int>(std::lround(1.0 / grid_step)));

  std::vector<VectorXd> columns;
  VectorXd current(model.n_actions);
  simplex_grid(model.n_actions, resolution, 0, resolution, current, columns);

  Policy policy{MatrixXd::Zero(model.n_actions, model.n_observations)};
  Policy best = policy;
  double best_value = -std::numeric_limits<double>::infinity();
  grid_product(model, columns, 0, policy, best, best_value);
  return {best, best_value};
}

VectorXd simplex_project(const Eigen::Ref<const VectorXd>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (int j = 0; j < n; ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - 1.0) / (j + 1);
    if (u[j] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).max(0.0).matrix();
}

std::pair<Policy, double> projected_gradient(const Pomdp& model,
                                             const Policy& init, int steps,
                                             double learning_rate) {
  if (steps < 0 || !(learning_rate > 0.0))
    throw std::invalid_argument(
        "projected_gradient: steps must be >= 0 and learning_rate > 0");
  Policy current = init;
  double value = reward_value(model, current);
  for (int step = 0; step < steps; ++step) {
    const MatrixXd grad = reward_gradient(model, current);
    double rate = learning_rate;
    bool improved = false;
    for (int halving = 0; halving < 20; ++halving) {
      Policy candidate = current;
      candidate.prob += rate * grad;
      for (int o = 0; o < model.n_observations; ++o)
        candidate.prob.col(o) = simplex_project(candidate.prob.col(o));
      const double candidate_value = reward_value(model, candidate);
      if (candidate_value > value) {
        current = std::move(candidate);
        value = candidate_value;
        improved = true;
        break;
      }
      rate *= 0.5;
    }
    if (!improved) break;  // no ascent direction at any tried rate
  }
  return {current, value};
}

BatchResult batch_experiment(int n_states, int n_actions,
                             const std::vector<int>& fiber_sizes, int n_trials,
                             std::uint64_t seed,
                             const std::vector<Method>& methods,
                             const TrackerOptions& options) {
  if (n_trials < 0)
    throw std::invalid_argument("batch_experiment: n_trials must be >= 0");

  BatchResult batch;
  batch.n_states = n_states;
  batch.n_actions = n_actions;
  batch.fiber_sizes = fiber_sizes;
  batch.seed = seed;

  // Instance seeds are drawn up front so every method sees identical data
  // regardless of the method list.
  std::mt19937_64 gen(seed);
  std::vector<std::uint64_t> instance_seeds(n_trials);
  for (auto& s : instance_seeds) s = gen();

  batch.per_method.reserve(methods.size());
  for (Method method : methods) {
    MethodStats stats;
    stats.method = method;
    stats.n_instances = n_trials;
    batch.per_method.push_back(std::move(stats));
  }

  constexpr int kPgdSteps = 300;
  constexpr double kPgdRate = 1.0;
  constexpr double kBruteStep = 0.02;

  for (int trial = 0; trial < n_trials; ++trial) {
    const Pomdp model =
        random_pomdp(n_states, n_actions, fiber_sizes, instance_seeds[trial]);
    double instance_min = std::numeric_limits<double>::infinity();
    double instance_max = -std::numeric_limits<double>::infinity();
    bool any_value = false;

    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      MethodStats& stats = batch.per_method[mi];
      double best_value = std::numeric_limits<double>::quiet_NaN();
      int n_complex = 0, n_real = 0, n_positive = 0;
      bool failed = false;
      try {
        switch (methods[mi]) {
          case Method::pgd: {
            auto [policy, value] = projected_gradient(
                model, uniform_policy(n_actions, model.n_observations),
                kPgdSteps, kPgdRate);
            best_value = value;
            break;
          }
          case Method::brute: {
            auto [policy, value] = brute_force(model, kBruteStep);
            best_value = value;
            break;
          }
          default: {
            const SolveReport report =
                solve_with_method(model, methods[mi], options);
            n_complex = report.total_complex;
            n_real = report.total_real;
            n_positive = report.total_positive;
            if (report.success) {
              best_value = report.best_value;
            } else {
              failed = true;
            }
            break;
          }
        }
      } catch (const std::exception&) {
        failed = true;
      }
      if (failed) {
        ++stats.n_failed;
        stats.complex_counts.push_back(-1);
        stats.real_counts.push_back(-1);
        stats.positive_counts.push_back(-1);
      } else {
        stats.complex_counts.push_back(n_complex);
        stats.real_counts.push_back(n_real);
        stats.positive_counts.push_back(n_positive);
      }
      stats.best_values.push_back(best_value);
      if (std::isfinite(best_value)) {
        instance_min = std::min(instance_min, best_value);
        instance_max = std::max(instance_max, best_value);
        any_value = true;
      }
    }

    if (any_value && instance_max - instance_min >
                         batch.value_agreement_max_gap) {
      batch.value_agreement_max_gap = instance_max - instance_min;
    }
  }

  for (MethodStats& stats : batch.per_method) {
    const int n_ok = stats.n_instances - stats.n_failed;
    if (n_ok <= 0) continue;
    long long complex_sum = 0, real_sum = 0, positive_sum = 0;
    for (int c : stats.complex_counts)
      if (c >= 0) complex_sum += c;
    for (int c : stats.real_counts)
      if (c >= 0) real_sum += c;
    for (int c : stats.positive_counts)
      if (c >= 0) positive_sum += c;
    stats.complex_mean = static_cast<double>(complex_sum) / n_ok;
    stats.real_mean = static_cast<double>(real_sum) / n_ok;
    stats.positive_mean = static_cast<double>(positive_sum) / n_ok;
    stats.complex_sd = sample_sd(stats.complex_counts, stats.complex_mean, n_ok);
    stats.real_sd = sample_sd(stats.real_counts, stats.real_mean, n_ok);
    stats.positive_sd =
        sample_sd(stats.positive_counts, stats.positive_mean, n_ok);
  }

  return batch;
}

}  // namespace sarop
