#pragma once

// End-to-end solvers on top of the homotopy engine: the per-component
// boundary sweep, the global KKT route, a projected-gradient ascent baseline,
// a brute-force grid oracle, and batch experiments over random instances.

#include <cstdint>
#include <string>
#include <vector>

#include "sarop/critical_systems.hpp"
#include "sarop/geometry.hpp"
#include "sarop/homotopy.hpp"
#include "sarop/pomdp.hpp"

namespace sarop {

enum class Method { kkt, lagrange_all, lagrange_relevant, pgd, brute };

const char* to_string(Method method);
Method method_from_string(const std::string& name);  // throws on unknown names

struct ComponentResult {
  BoundaryComponent component;
  int n_complex = 0;   // converged finite solutions
  int n_real = 0;
  int n_positive = 0;  // real, nonnegative eta, feasible after embedding
  double best_local_objective = std::numeric_limits<double>::quiet_NaN();
  SolveStats stats;
  std::vector<TrackedSolution> solutions;  // classified, canonical order
};

struct SolveReport {
  Method method = Method::lagrange_relevant;
  bool success = false;
  std::string failure;  // set when no positive solution was found
  std::vector<ComponentResult> per_component;
  int total_complex = 0;
  int total_real = 0;
  int total_positive = 0;
  int dual_feasible = 0;  // KKT only: positive solutions with kappa >= -tol
  StateActionFrequency best_eta;
  Policy best_policy;
  double best_value = std::numeric_limits<double>::quiet_NaN();
  // Disagreement of the winning component's best value across the
  // confirmation re-run with a fresh gamma (sweep methods only).
  double retry_gap = 0.0;
  double wall_time_seconds = 0.0;
};

// Solves the Lagrange system of every (relevant) boundary component, embeds
// and classifies the roots, and reports the best positive solution, which is
// the global optimum when the relevant set is swept.  The winning component
// is re-solved once with a fresh gamma as a lost-path check; an improvement
// beyond 1e-8 replaces the winner and is recorded in retry_gap.
SolveReport solve_boundary_sweep(const Pomdp& model, bool relevant_only,
                                 const TrackerOptions& options = {});

// Solves the single KKT system, filters eta >= 0, and additionally counts
// the dual-feasible subset (all kappa >= -tol_pos).
SolveReport solve_kkt(const Pomdp& model, const TrackerOptions& options = {});

// Runs the method given by `method` (kkt / lagrange_all / lagrange_relevant).
SolveReport solve_with_method(const Pomdp& model, Method method,
                              const TrackerOptions& options = {});

// Exhaustive simplex-grid search over policies, including faces.  Refused
// (std::invalid_argument) when (n_actions - 1) * n_observations > 4.
std::pair<Policy, double> brute_force(const Pomdp& model, double grid_step);

// Projected gradient ascent with sort-based Euclidean simplex projection and
// halving backtracking (up to 20 halvings per step).
std::pair<Policy, double> projected_gradient(const Pomdp& model,
                                             const Policy& init, int steps,
                                             double learning_rate);

// Euclidean projection of a vector onto the probability simplex.
VectorXd simplex_project(const Eigen::Ref<const VectorXd>& v);

struct MethodStats {
  Method method = Method::kkt;
  int n_instances = 0;
  int n_failed = 0;  // per-instance solver failures (recorded, not fatal)
  double complex_mean = 0.0, complex_sd = 0.0;
  double real_mean = 0.0, real_sd = 0.0;
  double positive_mean = 0.0, positive_sd = 0.0;
  std::vector<int> complex_counts, real_counts, positive_counts;
  std::vector<double> best_values;  // NaN on failure
};

struct BatchResult {
  int n_states = 0, n_actions = 0;
  std::vector<int> fiber_sizes;
  std::uint64_t seed = 0;
  std::vector<MethodStats> per_method;
  // Max over instances of the best-value spread across methods.
  double value_agreement_max_gap = 0.0;
};

// Runs n_trials random instances (instance seeds derived from `seed` so all
// methods see identical data) through each requested solver method.
BatchResult batch_experiment(int n_states, int n_actions,
                             const std::vector<int>& fiber_sizes, int n_trials,
                             std::uint64_t seed,
                             const std::vector<Method>& methods,
                             const TrackerOptions& options = {});

}  // namespace sarop
