#include "bmadmm/curvature.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "bmadmm/errors.h"

namespace bmadmm {
namespace {

constexpr double kTangentTol = 1e-8;
constexpr double kOnManifoldTol = 1e-8;
constexpr double kSettledTol = 1e-10;

void require_sphere_point(const FactorMatrix& sigma, const char* who) {
  const ManifoldSpec spec = ManifoldSpec::sphere(sigma.rows(), sigma.cols());
  if (manifold_violation(sigma, spec) > kOnManifoldTol) {
    throw InvalidArgument(std::string(who) + ": sigma is off the manifold");
  }
}

// Sphere tangent projection without the on-manifold check.
void project_rows(const FactorMatrix& sigma, FactorMatrix& u) {
  for (Index i = 0; i < u.rows(); ++i) {
    u.row(i) -= u.row(i).dot(sigma.row(i)) * sigma.row(i);
  }
}

FactorMatrix random_tangent(const FactorMatrix& sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  FactorMatrix u(sigma.rows(), sigma.cols());
  for (Index i = 0; i < u.rows(); ++i) {
    for (Index j = 0; j < u.cols(); ++j) u(i, j) = dist(rng);
  }
  project_rows(sigma, u);
  return u;
}

}  // namespace

double objective(const SparseSymMatrix& C, const FactorMatrix& sigma) {
  return spmm(C, sigma).cwiseProduct(sigma).sum();
}

FactorMatrix riemannian_grad_from_product(const FactorMatrix& sigma,
                                          const FactorMatrix& c_sigma,
                                          const ManifoldSpec& spec) {
  return 2.0 * tangent_project(sigma, c_sigma, spec);
}

FactorMatrix riemannian_grad(const SparseSymMatrix& C, const FactorMatrix& sigma,
                             const ManifoldSpec& spec) {
  return riemannian_grad_from_product(sigma, spmm(C, sigma), spec);
}

Eigen::VectorXd row_multipliers(const FactorMatrix& sigma, const FactorMatrix& c_sigma) {
  Eigen::VectorXd lambda(sigma.rows());
  for (Index i = 0; i < sigma.rows(); ++i) lambda[i] = c_sigma.row(i).dot(sigma.row(i));
  return lambda;
}

double hess_quadform(const SparseSymMatrix& C, const FactorMatrix& sigma,
                     const FactorMatrix& u) {
  if (u.rows() != sigma.rows() || u.cols() != sigma.cols()) {
    throw DimensionError("hess_quadform: shapes of sigma and u differ");
  }
  require_sphere_point(sigma, "hess_quadform");
  for (Index i = 0; i < u.rows(); ++i) {
    if (std::abs(u.row(i).dot(sigma.row(i))) > kTangentTol) {
      throw InvalidArgument("hess_quadform: u is not tangent at row " + std::to_string(i));
    }
  }
  const FactorMatrix c_sigma = spmm(C, sigma);
  const FactorMatrix c_u = spmm(C, u);
  double diag = 0.0;
  for (Index i = 0; i < u.rows(); ++i) {
    diag += c_sigma.row(i).dot(sigma.row(i)) * u.row(i).squaredNorm();
  }
  return 2.0 * c_u.cwiseProduct(u).sum() - 2.0 * diag;
}

FactorMatrix hess_apply(const SparseSymMatrix& C, const FactorMatrix& sigma,
                        const Eigen::VectorXd& lambda, const FactorMatrix& u) {
  FactorMatrix h = 2.0 * spmm(C, u);
  project_rows(sigma, h);
  for (Index i = 0; i < u.rows(); ++i) h.row(i) -= 2.0 * lambda[i] * u.row(i);
  return h;
}

const char* to_string(ProbeStatus status) {
  switch (status) {
    case ProbeStatus::kNegativeCurvature: return "NegativeCurvature";
    case ProbeStatus::kEpsConvex: return "EpsConvex";
    case ProbeStatus::kInconclusive: return "Inconclusive";
  }
  return "Unknown";
}

CurvatureReport negative_curvature_direction(const SparseSymMatrix& C,
                                             const FactorMatrix& sigma, double eps,
                                             const ProbeOptions& options) {
  return negative_curvature_direction(C, sigma, eps, CostNorms::compute(C), options);
}

CurvatureReport negative_curvature_direction(const SparseSymMatrix& C,
                                             const FactorMatrix& sigma, double eps,
                                             const CostNorms& norms,
                                             const ProbeOptions& options) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  if (!(options.delta > 0.0 && options.delta < 1.0)) {
    throw InvalidArgument("delta must lie in (0, 1)");
  }
  if (sigma.rows() != C.dim()) throw DimensionError("sigma rows do not match C");
  require_sphere_point(sigma, "negative_curvature_direction");

  const FactorMatrix c_sigma = spmm(C, sigma);
  const Eigen::VectorXd lambda = row_multipliers(sigma, c_sigma);
  FactorMatrix grad = 2.0 * c_sigma;
  project_rows(sigma, grad);

  CurvatureReport report;
  FactorMatrix v = random_tangent(sigma, options.seed);
  const double vnorm = v.norm();
  // r = 1 has a zero tangent space; a vanishing Hessian certifies trivially.
  const double c = 2.0 * norms.two * (1.0 + 1e-5) + 2.0 * norms.inf;
  if (vnorm == 0.0 || c == 0.0) {
    report.u = vnorm == 0.0 ? v : FactorMatrix(v / vnorm);
    report.certified_eps_convex = true;
    report.status = ProbeStatus::kEpsConvex;
    return report;
  }
  v /= vnorm;

  const double eps_prime = eps / (2.0 * (c + eps));
  const double dim = static_cast<double>(sigma.rows()) * static_cast<double>(sigma.cols());
  const double needed = std::ceil(std::log(dim / options.delta) / eps_prime);
  const bool capped = needed > static_cast<double>(options.max_iterations);
  const Index budget = capped ? options.max_iterations : static_cast<Index>(needed);
  report.budget = budget;

  bool settled = false;
  FactorMatrix hv = hess_apply(C, sigma, lambda, v);
  Index it = 0;
  for (; it < budget; ++it) {
    const double rq = v.cwiseProduct(hv).sum();
    if ((hv - rq * v).norm() <= kSettledTol * c) {
      settled = true;
      break;
    }
    FactorMatrix w = c * v - hv;
    project_rows(sigma, w);
    const double wn = w.norm();
    if (wn == 0.0) {
      settled = true;
      break;
    }
    v = w / wn;
    hv = hess_apply(C, sigma, lambda, v);
  }
  report.probe_iterations = it;

  if (v.cwiseProduct(grad).sum() > 0.0) {
    v = -v;
    hv = -hv;
  }
  report.lambda_h = v.cwiseProduct(hv).sum();
  report.lambda_min_estimate = report.lambda_h;
  report.u = std::move(v);

  if (capped && !settled) {
    report.status = ProbeStatus::kInconclusive;
  } else if (report.lambda_h < -0.5 * eps) {
    report.status = ProbeStatus::kNegativeCurvature;
  } else {
    report.status = ProbeStatus::kEpsConvex;
    report.certified_eps_convex = true;
  }
  return report;
}

EscapeResult escape_step(const SparseSymMatrix& C, const FactorMatrix& sigma,
                         const CurvatureReport& report, double norm1, bool check) {
  if (!(report.lambda_h < 0.0)) {
    throw InvalidArgument("escape_step needs lambda_h < 0");
  }
  if (!(norm1 > 0.0)) throw InvalidArgument("escape_step needs ||C||_1 > 0");
  const ManifoldSpec spec = ManifoldSpec::sphere(sigma.rows(), sigma.cols());

  EscapeResult out;
  out.step = -2.0 * report.lambda_h / (15.0 * norm1);
  out.guaranteed_decrease = -2.0 * std::pow(report.lambda_h, 3) / (675.0 * norm1 * norm1);
  out.sigma = geodesic_step(sigma, report.u, out.step, spec);
  out.decrease = objective(C, sigma) - objective(C, out.sigma);
  if (check) {
    if (out.decrease < out.guaranteed_decrease - 1e-9) {
      throw InvariantViolation("escape step decreased f by " + std::to_string(out.decrease) +
                               ", guaranteed " + std::to_string(out.guaranteed_decrease));
    }
  }
  return out;
}

SolveResult solve_with_curvature(const Problem& problem, const SolverOptions& options,
                                 const CurvatureSolveOptions& curvature) {
  return solve_with_curvature(problem, options, curvature,
                              random_point(problem.manifold, options.seed));
}

SolveResult solve_with_curvature(const Problem& problem, const SolverOptions& options,
                                 const CurvatureSolveOptions& curvature,
                                 const FactorMatrix& start) {
  if (!problem.manifold.is_sphere()) {
    throw InvalidArgument("the curvature solver supports d = 1 only");
  }
  if (!(curvature.eps > 0.0)) throw InvalidArgument("eps must be positive");
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  const SparseSymMatrix& C = problem.cost;
  const CostNorms norms = CostNorms::compute(C, options.norm_options);
  const double n = static_cast<double>(problem.manifold.n());

  SolveResult result;
  result.trace = Trace(true);
  if (norms.inf == 0.0) {
    // Hess f = 0: every feasible point is eps-convex.
    SolverState s;
    s.sigma_tilde = start;
    s.sigma = start;
    s.prev_sigma_tilde = start;
    s.prev_sigma = start;
    s.y = FactorMatrix::Zero(start.rows(), start.cols());
    s.c_sigma_tilde = s.y;
    result.state = std::move(s);
    result.status = SolveStatus::kEpsConvex;
    result.message = "zero cost matrix";
    return result;
  }

  SolverOptions admm_options = options;
  admm_options.proximal = false;
  if (admm_options.penalty_mode == PenaltyMode::kAbsolute) admm_options.mu = 0.0;
  const AdmmSolver solver(problem, admm_options, norms);
  result.rho = solver.rho();
  result.mu = 0.0;

  const double eps2 = curvature.eps * curvature.eps;
  double kappa_eff = std::min(std::max(decrease_kappa(options.alpha, options.beta), 0.0) * norms.two,
                              0.5 * solver.rho());
  if (!(kappa_eff > 0.0)) kappa_eff = 0.5 * solver.rho();
  const double threshold =
      curvature.decrease_threshold > 0.0 ? curvature.decrease_threshold : kappa_eff * eps2;

  SolverState state = solver.initialize(start);
  const double t1 = std::max(1.0, std::ceil((state.objective + n * norms.inf) / (kappa_eff * eps2)));
  const double t2 = std::ceil(675.0 * norms.inf * norms.inf * n / eps2);
  const double theory_budget = t1 + t2;
  const Index budget = theory_budget < static_cast<double>(options.max_iter)
                           ? static_cast<Index>(theory_budget)
                           : options.max_iter;

  const bool tracing = options.trace_every > 0;
  if (tracing) result.trace.add(solver.record(state, 0.0));
  Index last_recorded = state.k;
  result.status = SolveStatus::kMaxIter;

  while (state.k < budget) {
    if (options.time_limit_seconds > 0.0 && elapsed() > options.time_limit_seconds) {
      result.message = "time limit reached";
      break;
    }
    SolverState saved = state;
    StepReport step;
    try {
      step = solver.step(state);
    } catch (const AssumptionViolated& e) {
      result.status = SolveStatus::kAssumptionViolated;
      result.message = e.what();
      break;
    }
    result.invariant_warnings += step.invariant_warnings;
    if (step.decrease >= threshold) {
      if (tracing && state.k % options.trace_every == 0) {
        result.trace.add(solver.record(state, elapsed()));
        last_recorded = state.k;
      }
      continue;
    }

    ProbeOptions probe = curvature.probe;
    probe.seed = curvature.probe.seed + static_cast<std::uint64_t>(result.probes);
    ++result.probes;
    const CurvatureReport report =
        negative_curvature_direction(C, saved.sigma_tilde, curvature.eps, norms, probe);

    if (report.status == ProbeStatus::kEpsConvex) {
      state = std::move(saved);
      TraceRecord rec = solver.record(state, elapsed());
      rec.probe_performed = 1;
      rec.lambda_h = report.lambda_h;
      if (tracing) result.trace.add_or_replace(rec);
      last_recorded = state.k;
      result.status = SolveStatus::kEpsConvex;
      break;
    }

    if (report.status == ProbeStatus::kInconclusive) {
      spdlog::warn("curvature probe at iteration {} inconclusive after {} iterations",
                   saved.k, report.probe_iterations);
      TraceRecord rec = solver.record(state, elapsed());
      rec.probe_performed = 1;
      rec.lambda_h = report.lambda_h;
      if (tracing) result.trace.add(rec);
      last_recorded = state.k;
      continue;
    }

    const EscapeResult esc =
        escape_step(C, saved.sigma_tilde, report, norms.inf, options.check_invariants);
    ++result.escapes;
    SolverState moved;
    moved.sigma_tilde = esc.sigma;
    moved.sigma = esc.sigma;
    spmm(C, moved.sigma_tilde, moved.c_sigma_tilde);
    moved.y = moved.c_sigma_tilde;
    moved.prev_sigma_tilde = std::move(saved.sigma_tilde);
    moved.prev_sigma = std::move(saved.sigma);
    moved.k = saved.k + 1;
    moved.spmm_calls = saved.spmm_calls + 1;
    moved.min_gamma = saved.min_gamma;
    moved.objective = moved.c_sigma_tilde.cwiseProduct(moved.sigma_tilde).sum();
    moved.lagrangian = moved.objective;
    state = std::move(moved);

    TraceRecord rec = solver.record(state, elapsed());
    rec.probe_performed = 1;
    rec.lambda_h = report.lambda_h;
    rec.escaped = 1;
    if (tracing) result.trace.add(rec);
    last_recorded = state.k;
  }
  if (tracing && last_recorded != state.k) result.trace.add(solver.record(state, elapsed()));
  if (result.invariant_warnings > 0) {
    spdlog::warn("{} invariant checks failed outside the guaranteed regime",
                 result.invariant_warnings);
  }
  result.seconds = elapsed();
  result.state = std::move(state);
  return result;
}

}  // namespace bmadmm
