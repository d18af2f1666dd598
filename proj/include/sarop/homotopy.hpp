#pragma once

// Total-degree homotopy continuation for square polynomial systems: gamma-
// trick start systems, Euler-predictor/Newton-corrector path tracking with
// adaptive steps, endpoint polish, deduplication into a canonical order,
// solution classification against a POMDP boundary component, and an
// alpha-style certificate specialized to quadratic systems.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sarop/constraints.hpp"
#include "sarop/geometry.hpp"
#include "sarop/polynomial.hpp"
#include "sarop/pomdp.hpp"

namespace sarop {

struct TrackerOptions {
  double initial_step = 0.05;
  double min_step = 1e-7;
  double corrector_tol = 1e-10;
  int max_corrector_iters = 5;
  double endpoint_tol = 1e-12;
  int max_path_steps = 10000;
  std::uint64_t gamma_seed = 0;
  // Extended knobs, all surfaced on the command line.
  double divergence_threshold = 1e8;
  double dedupe_radius = 1e-6;
  double tol_real = 1e-7;        // classification: max |imag part|
  double tol_pos = 1e-8;         // classification: eta >= -tol_pos
  unsigned long long bezout_budget = 100000;
  int threads = 1;
};

enum class PathStatus { converged, diverged, truncated, singular_endpoint };

const char* to_string(PathStatus status);

struct TrackedSolution {
  CVector point;
  double residual = std::numeric_limits<double>::infinity();
  PathStatus status = PathStatus::truncated;
  bool is_real = false;
  bool is_positive_feasible = false;
  bool certified = false;
  double objective = std::numeric_limits<double>::quiet_NaN();
};

struct SolveStats {
  unsigned long long n_paths = 0;
  int n_converged = 0;   // before dedupe
  int n_diverged = 0;
  int n_truncated = 0;
  int n_singular = 0;
  int n_retried = 0;
  bool linear_direct = false;  // solved by one dense linear solve instead
};

struct SolveResult {
  // Finite endpoints (converged and singular) after polish + dedupe, in
  // canonical order; diverged/truncated paths appear only in the stats.
  std::vector<TrackedSolution> solutions;
  SolveStats stats;
};

struct BudgetExceeded : std::runtime_error {
  unsigned long long bezout;
  explicit BudgetExceeded(unsigned long long count)
      : std::runtime_error("Bezout number " + std::to_string(count) +
                           " exceeds the configured budget"),
        bezout(count) {}
};

// Tracks one path per root of the scaled start system x_i^{d_i} - 1 under
// H(x,t) = (1-t) gamma G(x) + t F(x); truncated paths are re-tracked once
// with a second gamma.  All-linear systems short-circuit to a direct dense
// solve (a singular linear system reports no isolated solutions).  Output is
// deterministic for a fixed gamma_seed, independent of thread count.
// Throws BudgetExceeded / std::invalid_argument on guard violations.
SolveResult solve_system(const PolySystem& system,
                         const TrackerOptions& options = {});

// Single-path tracker; start_point must solve start to 1e-10 (checked).
// Any gamma factor must already be folded into the start system.
TrackedSolution track_path(const PolySystem& target, const PolySystem& start,
                           const CVector& start_point,
                           const TrackerOptions& options = {});

struct RefineResult {
  CVector point;
  double residual = std::numeric_limits<double>::infinity();
  bool singular = false;
  int iters_used = 0;
};

// Damped Newton with monotone residuals; aborts on stagnation.  A singular
// Jacobian is reported and the incoming point returned unchanged.
RefineResult newton_refine(const PolySystem& system, const CVector& point,
                           int iters);

// Cluster by Euclidean distance < radius, keep the lowest-residual member,
// and return representatives sorted by the coordinates rounded to 1e-8 —
// a canonical order independent of path scheduling.
std::vector<TrackedSolution> dedupe(std::vector<TrackedSolution> solutions,
                                    double radius = 1e-6);

// Fills is_real / is_positive_feasible / objective for a converged solution
// whose leading coordinates are the component's free eta entries.
TrackedSolution classify(TrackedSolution solution, const Pomdp& model,
                         const BoundaryComponent& component,
                         double tol_real = 1e-7, double tol_pos = 1e-8);

struct CertificateResult {
  bool certified = false;
  double alpha = std::numeric_limits<double>::infinity();
  double beta = std::numeric_limits<double>::infinity();
  // Upper bound on the alpha-theory gamma: half the spectral norm of the
  // inverse Jacobian times the Frobenius aggregate of the (constant) second
  // derivative tensor.
  double gamma = std::numeric_limits<double>::infinity();
  double radius = std::numeric_limits<double>::infinity();
};

// Smale-style certificate for systems of total degree <= 2 (exact Taylor
// truncation): certified iff alpha = beta * gamma < 0.1307; the returned
// radius 2*beta isolates the certified root.  Throws std::invalid_argument
// on higher-degree systems; a singular Jacobian yields certified = false.
CertificateResult alpha_certify(const PolySystem& system, const CVector& point);

}  // namespace sarop
