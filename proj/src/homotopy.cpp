#include "sarop/homotopy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <type_traits>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "sarop/critical_systems.hpp"
#include "sarop/random.hpp"

namespace sarop {

namespace {

constexpr double kResidualPass = 1e-8;       // converged endpoints must beat this
constexpr double kSingularRelSigma = 1e-9;   // sigma_min threshold vs sigma_max
constexpr double kEndgameZone = 0.05;        // 1 - t below this caps the step
constexpr double kEndgameStep = 0.01;
constexpr double kMaxStep = 0.1;
constexpr int kPolishIters = 50;
// A path that runs out of step size this close to the finish line gets one
// direct Newton attempt on the target system before being written off:
// endpoints of large norm need steps shrinking with (1 - t), which can exhaust
// min_step just short of t = 1 even though the endpoint itself is regular.
// The window is wide relative to min_step because the final fail cascade can
// stop an order of magnitude or two short of it; the attempt is safe at any
// distance, since it either lands on a certified root of the target system or
// leaves the path truncated as before.
constexpr double kEndpointJumpZone = 1e-4;
// Paths whose corrector keeps failing are abandoned once the failures add up:
// a trackable path crosses its worst region in a few dozen halvings, while a
// path grinding towards a pole or an unbounded solution set can otherwise
// sawtooth at the minimum step until max_path_steps runs out.
constexpr int kMaxCorrectorFailures = 400;

double inf_norm(const CVector& v) { return v.lpNorm<Eigen::Infinity>(); }

// In-place partial-pivot LU sized for the small dense systems tracked here;
// avoids the blocking and temporary overhead of the library factorizations,
// which dominate the per-step cost at these dimensions.  A zero pivot leaves
// infinities/NaNs in the solution, which callers already screen for.
class TinyLU {
 public:
  void factor(CMatrix& a) {
    const int n = static_cast<int>(a.rows());
    a_ = &a;
    piv_.resize(n);
    for (int k = 0; k < n; ++k) {
      int pivot = k;
      double best = std::norm(a(k, k));
      for (int i = k + 1; i < n; ++i) {
        const double mag = std::norm(a(i, k));
        if (mag > best) {
          best = mag;
          pivot = i;
        }
      }
      piv_[k] = pivot;
      if (pivot != k) a.row(k).swap(a.row(pivot));
      const Complex inv = Complex(1.0) / a(k, k);
      const int tail = n - k - 1;
      if (tail > 0) {
        a.col(k).tail(tail) *= inv;
        for (int j = k + 1; j < n; ++j)
          a.col(j).tail(tail) -= a(k, j) * a.col(k).tail(tail);
      }
    }
  }

  // Solves using the factors of the matrix passed to factor().  The row
  // interchanges permuted the stored L rows too, so they must all be applied
  // to the right-hand side before the forward sweep.
  void solve(const CVector& b, CVector& x) const {
    const CMatrix& a = *a_;
    const int n = static_cast<int>(a.rows());
    x = b;
    for (int k = 0; k < n; ++k)
      if (piv_[k] != k) std::swap(x[k], x[piv_[k]]);
    for (int k = 0; k < n; ++k) {
      const int tail = n - k - 1;
      if (tail > 0) x.tail(tail) -= x[k] * a.col(k).tail(tail);
    }
    for (int k = n - 1; k >= 0; --k) {
      x[k] /= a(k, k);
      if (k > 0) x.head(k) -= x[k] * a.col(k).head(k);
    }
  }

 private:
  const CMatrix* a_ = nullptr;
  std::vector<int> piv_;
};

// Damped Newton against a compiled system; keeps the best iterate seen.
RefineResult polish(const CompiledSystem& system, CVector x, int iters) {
  RefineResult out;
  const int n = system.n_vars();
  CVector f(n), dx(n);
  CMatrix jac(n, n);
  system.evaluate(x, f);
  out.point = x;
  out.residual = inf_norm(f);
  Eigen::FullPivLU<CMatrix> lu;
  int stalls = 0;
  for (int it = 0; it < iters; ++it) {
    system.evaluate_with_jacobian(x, f, jac);
    lu.compute(jac);
    if (!lu.isInvertible()) {
      out.singular = true;
      break;
    }
    dx = lu.solve(-f);
    if (!dx.allFinite()) {
      out.singular = true;
      break;
    }
    // Backtrack until the residual actually drops.
    double scale = 1.0;
    double previous = inf_norm(f);
    double current = previous;
    bool accepted = false;
    CVector trial(n), ft(n);
    for (int damp = 0; damp < 10; ++damp) {
      trial = x + scale * dx;
      system.evaluate(trial, ft);
      const double res = inf_norm(ft);
      if (res < current) {
        x = trial;
        current = res;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    out.iters_used = it + 1;
    if (!accepted) break;
    if (current < out.residual) {
      out.residual = current;
      out.point = x;
    }
    if (scale * dx.norm() <= 1e-15 * std::max(1.0, x.norm())) break;
    // Linear-rate decay means the iterate is creeping along a singular set
    // rather than converging quadratically to a root; stop wasting iterations.
    stalls = current > 0.5 * previous ? stalls + 1 : 0;
    if (stalls >= 5) break;
  }
  return out;
}

bool jacobian_singular_at(const CompiledSystem& system, const CVector& x) {
  const int n = system.n_vars();
  CVector f(n);
  CMatrix jac(n, n);
  system.evaluate_with_jacobian(x, f, jac);
  Eigen::JacobiSVD<CMatrix> svd(jac);
  const auto& sv = svd.singularValues();
  return sv[sv.size() - 1] < kSingularRelSigma * std::max(1.0, sv[0]);
}

struct RawEndpoint {
  CVector point;
  double residual = std::numeric_limits<double>::infinity();
  PathStatus status = PathStatus::truncated;
  bool retried = false;
};

int status_rank(PathStatus s) {
  switch (s) {
    case PathStatus::converged: return 3;
    case PathStatus::singular_endpoint: return 2;
    case PathStatus::diverged: return 1;
    case PathStatus::truncated: return 0;
  }
  return 0;
}

// Start-system evaluators for the tracker.  The dense form handles arbitrary
// start systems; the power form exploits the diagonal Jacobian of the
// gamma * (x_i^{d_i} - 1) rows used by total-degree continuation.
struct DenseStart {
  static constexpr bool kDiagonalJacobian = false;
  const CompiledSystem* system;
  void eval(const CVector& x, CVector& g, CMatrix& jg) const {
    system->evaluate_with_jacobian(x, g, jg);
  }
};

struct PowerStart {
  static constexpr bool kDiagonalJacobian = true;
  const std::vector<int>* degrees;
  Complex gamma;
  void eval(const CVector& x, CVector& g, CVector& jg_diag) const {
    const std::vector<int>& d = *degrees;
    for (int i = 0; i < x.size(); ++i) {
      Complex pow_dm1(1.0);
      for (int k = 1; k < d[i]; ++k) pow_dm1 *= x[i];
      jg_diag[i] = gamma * static_cast<double>(d[i]) * pow_dm1;
      g[i] = gamma * (pow_dm1 * x[i] - 1.0);
    }
  }
};

// One predictor-corrector path for H(x,t) = (1-t) G(x) + t F(x), gamma
// already folded into G.  The homotopy Jacobian, residuals, and factorization
// at the current (x, t) are cached so that halving the step, or launching the
// next predictor right after a corrector accepted, does not re-evaluate or
// re-factor anything.
template <class Start>
RawEndpoint track_one(const CompiledSystem& target, const Start& start,
                      CVector x, const TrackerOptions& opt) {
  const int n = target.n_vars();
  CVector f(n), g(n), h(n), dx(n), pred(n), xc(n);
  CMatrix jf(n, n), hx(n, n);
  std::conditional_t<Start::kDiagonalJacobian, CVector, CMatrix> jg;
  if constexpr (Start::kDiagonalJacobian) jg.resize(n);
  else jg.resize(n, n);
  TinyLU lu;
  RawEndpoint out;

  const auto assemble = [&](double tau) {
    // hx = (1 - tau) * jg + tau * jf, with jg possibly diagonal.
    if constexpr (Start::kDiagonalJacobian) {
      hx = tau * jf;
      hx.diagonal() += (1.0 - tau) * jg;
    } else {
      hx = (1.0 - tau) * jg + tau * jf;
    }
  };

  double t = 0.0;
  double dt = opt.initial_step;
  int successes = 0;
  int failures = 0;
  // Whether the factorization in hx and the residuals f, g are current at
  // (x, t).
  bool state_cached = false;
  bool pred_cached = false;

  const auto finish = [&](const CVector& endpoint) {
    const RefineResult refined = polish(target, endpoint, kPolishIters);
    out.point = refined.point;
    out.residual = refined.residual;
    if (!(refined.residual < kResidualPass)) {
      out.status = out.point.lpNorm<Eigen::Infinity>() > opt.divergence_threshold
                       ? PathStatus::diverged
                       : PathStatus::truncated;
      return out;
    }
    out.status = (refined.singular || jacobian_singular_at(target, out.point))
                     ? PathStatus::singular_endpoint
                     : PathStatus::converged;
    return out;
  };
  const auto give_up = [&] {
    // Within the jump zone the endpoint may be regular even though the step
    // size collapsed.  One Euler step across the remaining parameter distance
    // followed by Newton on the target settles it: on sharply curving paths
    // the predictor direction carries the point into an endpoint basin that
    // Newton alone cannot reach from the stalled position.  The raw point is
    // the fallback when the jump lands badly.
    if (1.0 - t < kEndpointJumpZone) {
      target.evaluate_with_jacobian(x, f, jf);
      start.eval(x, g, jg);
      assemble(t);
      lu.factor(hx);
      h = g - f;
      lu.solve(h, pred);
      if (pred.allFinite()) {
        const RawEndpoint jumped = finish(x + (1.0 - t) * pred);
        if (jumped.status == PathStatus::converged ||
            jumped.status == PathStatus::singular_endpoint)
          return jumped;
      }
      return finish(x);
    }
    out.status = PathStatus::truncated;
    out.point = x;
    return out;
  };
  for (int step = 0; step < opt.max_path_steps && t < 1.0; ++step) {
    dt = std::min(dt, 1.0 - t);
    if (1.0 - t < kEndgameZone) dt = std::min(dt, kEndgameStep);
    double t_next = t + dt;
    if (1.0 - t_next < 1e-12) t_next = 1.0;

    // Euler predictor: Hx dx/dt = G - F.  The direction only depends on
    // (x, t), so step halvings reuse it verbatim.
    if (!pred_cached) {
      if (!state_cached) {
        target.evaluate_with_jacobian(x, f, jf);
        start.eval(x, g, jg);
        assemble(t);
        lu.factor(hx);
        state_cached = true;
      }
      h = g - f;
      lu.solve(h, pred);
      pred_cached = pred.allFinite();
    }
    bool ok = pred_cached;
    if (ok) {
      xc = x + dt * pred;
      // Newton corrector at t_next; it clobbers the cached (x, t) state.
      state_cached = false;
      ok = false;
      double prev_step = std::numeric_limits<double>::infinity();
      for (int it = 0; it < opt.max_corrector_iters; ++it) {
        target.evaluate_with_jacobian(xc, f, jf);
        start.eval(xc, g, jg);
        h = (1.0 - t_next) * g + t_next * f;
        h = -h;
        assemble(t_next);
        lu.factor(hx);
        lu.solve(h, dx);
        if (!dx.allFinite()) break;
        xc += dx;
        const double step_norm = dx.norm();
        if (step_norm <= opt.corrector_tol * std::max(1.0, xc.norm())) {
          ok = true;
          break;
        }
        // Newton inside its basin contracts sharply; a sequence that fails to
        // halve the update will not reach the tolerance in the remaining
        // iterations, so give up on this step size early.
        if (step_norm > 0.5 * prev_step) break;
        prev_step = step_norm;
      }
    }
    if (ok) {
      x = xc;
      t = t_next;
      // The corrector's last factorization and residuals were taken within
      // corrector_tol of the accepted point, so they seed the next predictor.
      state_cached = true;
      pred_cached = false;
      if (x.lpNorm<Eigen::Infinity>() > opt.divergence_threshold) {
        out.status = PathStatus::diverged;
        out.point = x;
        return out;
      }
      if (++successes >= 3) {
        dt = std::min(dt * 2.0, kMaxStep);
        successes = 0;
      }
    } else {
      successes = 0;
      dt *= 0.5;
      if (dt < opt.min_step || ++failures > kMaxCorrectorFailures)
        return give_up();
    }
  }
  if (t < 1.0) return give_up();
  return finish(x);
}

CVector start_root(const std::vector<int>& degrees, unsigned long long index) {
  const int n = static_cast<int>(degrees.size());
  CVector x(n);
  for (int i = 0; i < n; ++i) {
    const int k = static_cast<int>(index % degrees[i]);
    index /= degrees[i];
    const double angle = 2.0 * M_PI * k / degrees[i];
    x[i] = Complex(std::cos(angle), std::sin(angle));
  }
  return x;
}

std::vector<long long> canonical_key(const CVector& point) {
  std::vector<long long> key;
  key.reserve(2 * point.size());
  for (int i = 0; i < point.size(); ++i) {
    key.push_back(std::llround(point[i].real() / 1e-8));
    key.push_back(std::llround(point[i].imag() / 1e-8));
  }
  return key;
}

}  // namespace

const char* to_string(PathStatus status) {
  switch (status) {
    case PathStatus::converged: return "converged";
    case PathStatus::diverged: return "diverged";
    case PathStatus::truncated: return "truncated";
    case PathStatus::singular_endpoint: return "singular_endpoint";
  }
  return "unknown";
}

RefineResult newton_refine(const PolySystem& system, const CVector& point,
                           int iters) {
  if (point.size() != system.n_vars())
    throw std::invalid_argument("newton_refine: point length mismatch");
  const CompiledSystem compiled(system);
  RefineResult out = polish(compiled, point, iters);
  if (out.singular && out.iters_used <= 1) {
    // Unusable Jacobian straight away: report and hand the point back.
    out.point = point;
    CVector f;
    compiled.evaluate(point, f);
    out.residual = inf_norm(f);
  }
  return out;
}

std::vector<TrackedSolution> dedupe(std::vector<TrackedSolution> solutions,
                                    double radius) {
  // Canonical presentation first so clustering never depends on the order
  // paths finished in.
  std::vector<std::size_t> order(solutions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::vector<long long>> keys(solutions.size());
  for (std::size_t i = 0; i < solutions.size(); ++i)
    keys[i] = canonical_key(solutions[i].point);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a] != keys[b]) return keys[a] < keys[b];
    return solutions[a].residual < solutions[b].residual;
  });

  std::vector<TrackedSolution> reps;
  for (std::size_t idx : order) {
    const TrackedSolution& cand = solutions[idx];
    bool merged = false;
    for (TrackedSolution& rep : reps) {
      if (rep.point.size() == cand.point.size() &&
          (rep.point - cand.point).norm() < radius) {
        if (cand.residual < rep.residual) rep = cand;
        merged = true;
        break;
      }
    }
    if (!merged) reps.push_back(cand);
  }
  std::sort(reps.begin(), reps.end(),
            [](const TrackedSolution& a, const TrackedSolution& b) {
              return canonical_key(a.point) < canonical_key(b.point);
            });
  return reps;
}

TrackedSolution track_path(const PolySystem& target, const PolySystem& start,
                           const CVector& start_point,
                           const TrackerOptions& options) {
  if (!target.is_square() || !start.is_square() ||
      target.n_vars() != start.n_vars())
    throw std::invalid_argument("track_path: systems must be square and compatible");
  const CompiledSystem cstart(start);
  CVector g0;
  cstart.evaluate(start_point, g0);
  if (inf_norm(g0) > 1e-10)
    throw std::invalid_argument("track_path: start point does not solve the start system");
  const RawEndpoint raw = track_one(CompiledSystem(target),
                                    DenseStart{&cstart}, start_point, options);
  TrackedSolution out;
  out.point = raw.point;
  out.residual = raw.residual;
  out.status = raw.status;
  return out;
}

SolveResult solve_system(const PolySystem& system, const TrackerOptions& options) {
  if (!system.is_square())
    throw std::invalid_argument("solve_system: system is not square");
  SolveResult result;
  const int n = system.n_vars();
  if (n == 0) return result;

  unsigned long long bezout = 0;
  try {
    bezout = bezout_number(system);
  } catch (const std::overflow_error&) {
    throw BudgetExceeded(std::numeric_limits<unsigned long long>::max());
  }

  std::vector<int> degrees(n);
  bool all_linear = true;
  for (int i = 0; i < n; ++i) {
    degrees[i] = system.equations[i].degree();
    all_linear = all_linear && degrees[i] <= 1;
  }
  // A nonzero constant equation admits no roots at all.
  if (*std::min_element(degrees.begin(), degrees.end()) == 0) return result;

  const CompiledSystem target(system);

  if (all_linear) {
    // One dense solve replaces tracking; a singular matrix means no isolated
    // roots (generically an inconsistent stationarity block).
    result.stats.linear_direct = true;
    CVector f0(n), b(n);
    CMatrix a(n, n);
    target.evaluate_with_jacobian(CVector::Zero(n), f0, a);
    b = -f0;
    Eigen::FullPivLU<CMatrix> lu(a);
    if (!lu.isInvertible()) return result;
    TrackedSolution sol;
    sol.point = lu.solve(b);
    CVector check(n);
    target.evaluate(sol.point, check);
    sol.residual = inf_norm(check);
    if (!(sol.residual < kResidualPass)) return result;
    sol.status = PathStatus::converged;
    result.stats.n_paths = 1;
    result.stats.n_converged = 1;
    result.solutions.push_back(std::move(sol));
    return result;
  }

  if (bezout > options.bezout_budget) throw BudgetExceeded(bezout);

  std::mt19937_64 gen(options.gamma_seed);
  const auto unit = [&gen] {
    const double angle = 2.0 * M_PI * uniform01(gen);
    return Complex(std::cos(angle), std::sin(angle));
  };
  const Complex gamma1 = unit();
  const Complex gamma2 = unit();
  const PowerStart start1{&degrees, gamma1};
  const PowerStart start2{&degrees, gamma2};
  // The one permitted re-track uses a fresh gamma and a more cautious opening
  // step: together they give the failed path a genuinely different and more
  // conservative trajectory.
  TrackerOptions retry_options = options;
  retry_options.initial_step = 0.4 * options.initial_step;

  std::vector<RawEndpoint> endpoints(bezout);
  std::atomic<unsigned long long> next{0};
  auto worker = [&] {
    while (true) {
      const unsigned long long k = next.fetch_add(1);
      if (k >= bezout) break;
      const CVector x0 = start_root(degrees, k);
      RawEndpoint ep = track_one(target, start1, x0, options);
      if (ep.status == PathStatus::truncated) {
        RawEndpoint second = track_one(target, start2, x0, retry_options);
        second.retried = true;
        if (status_rank(second.status) > status_rank(ep.status)) ep = second;
        else ep.retried = true;
      }
      endpoints[k] = std::move(ep);
    }
  };
  const int n_threads = std::max(1, options.threads);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  result.stats.n_paths = bezout;
  std::vector<TrackedSolution> finite;
  for (const RawEndpoint& ep : endpoints) {
    if (ep.retried) ++result.stats.n_retried;
    switch (ep.status) {
      case PathStatus::converged: ++result.stats.n_converged; break;
      case PathStatus::diverged: ++result.stats.n_diverged; break;
      case PathStatus::truncated: ++result.stats.n_truncated; break;
      case PathStatus::singular_endpoint: ++result.stats.n_singular; break;
    }
    if (ep.status == PathStatus::converged ||
        ep.status == PathStatus::singular_endpoint) {
      TrackedSolution sol;
      sol.point = ep.point;
      sol.residual = ep.residual;
      sol.status = ep.status;
      finite.push_back(std::move(sol));
    }
  }
  result.solutions = dedupe(std::move(finite), options.dedupe_radius);
  return result;
}

TrackedSolution classify(TrackedSolution solution, const Pomdp& model,
                         const BoundaryComponent& component, double tol_real,
                         double tol_pos) {
  solution.is_real = false;
  solution.is_positive_feasible = false;
  solution.objective = std::numeric_limits<double>::quiet_NaN();
  if (solution.status != PathStatus::converged) return solution;
  double max_imag = 0.0;
  for (int i = 0; i < solution.point.size(); ++i)
    max_imag = std::max(max_imag, std::abs(solution.point[i].imag()));
  if (max_imag >= tol_real) return solution;
  solution.is_real = true;

  const VectorXd eta = embed_eta(model, component, solution.point);
  solution.objective = model.reward_vector().dot(eta);
  const FeasibilityResidual res = feasibility_residual(model, eta);
  const double worst =
      std::max({res.max_linear, res.max_quadratic, res.sum_gap});
  solution.is_positive_feasible = worst < 1e-6 && res.min_entry >= -tol_pos;
  return solution;
}

CertificateResult alpha_certify(const PolySystem& system, const CVector& point) {
  if (point.size() != system.n_vars())
    throw std::invalid_argument("alpha_certify: point length mismatch");
  CertificateResult cert;
  double hess_sq = 0.0;
  for (const auto& eq : system.equations) {
    if (eq.degree() > 2)
      throw std::invalid_argument(
          "alpha_certify: only quadratic systems are supported");
    for (const auto& [exps, coeff] : eq.terms()) {
      int total = 0, repeated = 0;
      for (int e : exps) {
        total += e;
        repeated = std::max(repeated, e);
      }
      if (total != 2) continue;
      // x_v^2 contributes |2c|^2 via the diagonal; x_v x_w fills two
      // symmetric off-diagonal entries of |c|^2 each.
      hess_sq += (repeated == 2 ? 4.0 : 2.0) * std::norm(coeff);
    }
  }

  const CVector f = evaluate(system, point);
  const CMatrix jac = jacobian(system, point);
  Eigen::JacobiSVD<CMatrix> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double sigma_min = sv[sv.size() - 1];
  if (sigma_min <= 1e-14 * std::max(1.0, sv[0])) return cert;  // singular

  cert.beta = svd.solve(f).norm();
  cert.gamma = 0.5 * std::sqrt(hess_sq) / sigma_min;
  cert.alpha = cert.beta * cert.gamma;
  cert.radius = 2.0 * cert.beta;
  cert.certified = cert.alpha < 0.1307;
  return cert;
}

}  // namespace sarop
