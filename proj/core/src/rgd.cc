#include "bmadmm/rgd.h"

#include <chrono>
#include <cmath>
#include <utility>

#include "bmadmm/curvature.h"
#include "bmadmm/eigen_estimate.h"
#include "bmadmm/errors.h"

namespace bmadmm {
namespace {

void validate(const RgdOptions& o) {
  if (!(o.backtrack > 0.0 && o.backtrack < 1.0)) {
    throw InvalidArgument("backtracking factor must lie in (0, 1)");
  }
  if (!(o.armijo > 0.0) || !(o.grad_tol > 0.0) || o.initial_step < 0.0) {
    throw InvalidArgument("Armijo constant, grad_tol and initial step must be positive");
  }
  if (o.max_iter < 0 || o.max_halvings < 1 || o.trace_every < 0) {
    throw InvalidArgument("invalid RGD iteration limits");
  }
}

// Step from a point whose product C sigma is already known.
RgdStep armijo_step(const SparseSymMatrix& C, const ManifoldSpec& spec,
                    const FactorMatrix& sigma, const FactorMatrix& c_sigma, double f0,
                    const FactorMatrix& grad, const RgdOptions& options, double t) {
  RgdStep out;
  const double g2 = grad.squaredNorm();
  if (g2 == 0.0) {
    out.sigma = sigma;
    out.c_sigma = c_sigma;
    out.objective = f0;
    return out;
  }
  for (Index h = 0; h < options.max_halvings; ++h, t *= options.backtrack) {
    FactorMatrix trial;
    try {
      project(sigma - t * grad, spec, trial);
    } catch (const DegenerateProjection&) {
      continue;
    }
    FactorMatrix c_trial = spmm(C, trial);
    const double f = c_trial.cwiseProduct(trial).sum();
    if (f <= f0 - options.armijo * t * g2) {
      out.sigma = std::move(trial);
      out.c_sigma = std::move(c_trial);
      out.objective = f;
      out.step = t;
      return out;
    }
  }
  out.sigma = sigma;
  out.c_sigma = c_sigma;
  out.objective = f0;
  out.stalled = true;
  return out;
}

}  // namespace

RgdStep rgd_step(const SparseSymMatrix& C, const ManifoldSpec& spec,
                 const FactorMatrix& sigma, const RgdOptions& options, double initial_step) {
  validate(options);
  if (!(initial_step > 0.0)) throw InvalidArgument("initial step must be positive");
  const FactorMatrix c_sigma = spmm(C, sigma);
  const FactorMatrix grad = riemannian_grad_from_product(sigma, c_sigma, spec);
  return armijo_step(C, spec, sigma, c_sigma, c_sigma.cwiseProduct(sigma).sum(), grad,
                     options, initial_step);
}

SolveResult rgd_solve(const Problem& problem, const RgdOptions& options) {
  return rgd_solve(problem, options, random_point(problem.manifold, options.seed));
}

SolveResult rgd_solve(const Problem& problem, const RgdOptions& options,
                      const FactorMatrix& start) {
  validate(options);
  problem.manifold.validate();
  const SparseSymMatrix& C = problem.cost;
  const ManifoldSpec& spec = problem.manifold;
  if (C.dim() != spec.n()) throw DimensionError("cost matrix and manifold disagree on n");

  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  const double c2 = two_norm_estimate(C);
  const double step0 =
      options.initial_step > 0.0 ? options.initial_step : (c2 > 0.0 ? 1.0 / c2 : 1.0);
  const double stop = options.grad_tol * (1.0 + c2);

  SolverState s;
  s.sigma_tilde = start;
  s.sigma = start;
  s.prev_sigma_tilde = start;
  s.prev_sigma = start;
  s.c_sigma_tilde = spmm(C, start);
  s.spmm_calls = 1;
  s.objective = s.c_sigma_tilde.cwiseProduct(start).sum();
  s.lagrangian = s.objective;

  SolveResult result;
  const bool tracing = options.trace_every > 0;
  auto record = [&](const SolverState& st) {
    TraceRecord r;
    r.k = st.k;
    r.objective = st.objective;
    r.lagrangian = st.objective;
    r.step_tilde = (st.sigma_tilde - st.prev_sigma_tilde).norm();
    r.step_sigma = r.step_tilde;
    r.seconds = options.record_time ? elapsed() : 0.0;
    result.trace.add(r);
  };
  if (tracing) record(s);
  Index last_recorded = 0;

  result.status = SolveStatus::kMaxIter;
  while (true) {
    const FactorMatrix grad = riemannian_grad_from_product(s.sigma_tilde, s.c_sigma_tilde, spec);
    if (grad.norm() <= stop) {
      result.status = SolveStatus::kConverged;
      break;
    }
    if (s.k >= options.max_iter) break;
    if (options.time_limit_seconds > 0.0 && elapsed() > options.time_limit_seconds) {
      result.message = "time limit reached";
      break;
    }
    RgdStep step = armijo_step(C, spec, s.sigma_tilde, s.c_sigma_tilde, s.objective, grad,
                               options, step0);
    if (step.stalled) {
      result.status = SolveStatus::kStalled;
      result.message = "line search failed after " + std::to_string(options.max_halvings) +
                       " reductions";
      break;
    }
    s.prev_sigma_tilde = std::move(s.sigma_tilde);
    s.sigma_tilde = std::move(step.sigma);
    s.prev_sigma = s.prev_sigma_tilde;
    s.sigma = s.sigma_tilde;
    s.c_sigma_tilde = std::move(step.c_sigma);
    s.objective = step.objective;
    s.lagrangian = step.objective;
    ++s.k;
    if (tracing && s.k % options.trace_every == 0) {
      record(s);
      last_recorded = s.k;
    }
  }
  if (tracing && last_recorded != s.k) record(s);
  result.seconds = elapsed();
  result.state = std::move(s);
  return result;
}

}  // namespace bmadmm
