#include "bmadmm/admm.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "bmadmm/errors.h"

namespace bmadmm {
namespace {

constexpr double kSlack = 1e-9;
constexpr double kDualTol = 1e-10;
constexpr double kManifoldTol = 1e-12;
constexpr double kStartTol = 1e-8;
// Norm estimates carry relative error rel_tol; inflate ||C|| where it sits on
// the subtracted side of a bound.
constexpr double kNormInflate = 1.0 + 1e-5;

double frob_inner(const FactorMatrix& a, const FactorMatrix& b) {
  return a.cwiseProduct(b).sum();
}

double gamma_floor(double alpha) { return 1.0 - 4.0 / alpha - 2.0 / (alpha * alpha); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

double default_rho(const CostNorms& norms, PenaltyMode mode, double alpha, double beta) {
  double rho = 0.0;
  switch (mode) {
    case PenaltyMode::kTheory:
      rho = std::max(alpha * norms.inf, beta * norms.two);
      break;
    case PenaltyMode::kPractice:
      rho = norms.two;
      break;
    case PenaltyMode::kAbsolute:
      throw InvalidArgument("default_rho: absolute mode has no default");
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw InvalidArgument("rho must be positive; the cost matrix is zero");
  }
  return rho;
}

double decrease_kappa(double alpha, double beta) {
  return (alpha * alpha - 4.0 * alpha - 2.0) * beta / (2.0 * alpha * alpha) - 1.0 / beta;
}

Penalty resolve_penalty(const CostNorms& norms, const SolverOptions& options) {
  switch (options.penalty_mode) {
    case PenaltyMode::kAbsolute:
      if (!(options.rho > 0.0) || !std::isfinite(options.rho)) {
        throw InvalidArgument("rho must be positive (got " + fmt(options.rho) + ")");
      }
      if (!(options.mu >= 0.0) || !std::isfinite(options.mu)) {
        throw InvalidArgument("mu must be nonnegative (got " + fmt(options.mu) + ")");
      }
      return {options.rho, options.mu};
    case PenaltyMode::kTheory:
      if (options.proximal) {
        const double p = 2.0 * norms.two;
        if (!(p > 0.0)) throw InvalidArgument("rho must be positive; the cost matrix is zero");
        return {p, p};
      }
      return {default_rho(norms, PenaltyMode::kTheory, options.alpha, options.beta), 0.0};
    case PenaltyMode::kPractice: {
      const double rho = default_rho(norms, PenaltyMode::kPractice);
      return {rho, options.proximal ? rho : 0.0};
    }
  }
  throw InvalidArgument("unknown penalty mode");
}

FactorMatrix gamma(const SolverState& state, const FactorMatrix& c_sigma, double rho,
                   double mu) {
  if (mu == 0.0) return state.sigma - (state.y + c_sigma) / rho;
  const double total = rho + mu;
  return (mu / total) * state.sigma_tilde + (rho / total) * state.sigma -
         (state.y + c_sigma) / total;
}

FactorMatrix gamma(const SparseSymMatrix& C, const SolverState& state, double rho,
                   double mu) {
  return gamma(state, spmm(C, state.sigma), rho, mu);
}

double twin_value(const SparseSymMatrix& C, const ManifoldSpec& spec,
                  const FactorMatrix& sigma_tilde, const FactorMatrix& sigma, double rho) {
  if (sigma.rows() != sigma_tilde.rows() || sigma.cols() != sigma_tilde.cols()) {
    throw DimensionError("twin_value: sigma and sigma_tilde shapes differ");
  }
  if (manifold_violation(sigma_tilde, spec) > kStartTol) {
    throw InvalidArgument("twin_value: sigma_tilde is off the manifold");
  }
  return frob_inner(spmm(C, sigma_tilde), sigma_tilde) +
         0.5 * rho * (sigma_tilde - sigma).squaredNorm();
}

Residuals residuals(const SolverState& state) {
  Residuals r;
  r.primal = (state.sigma_tilde - state.sigma).norm();
  r.step_tilde = (state.sigma_tilde - state.prev_sigma_tilde).norm();
  r.step_sigma = (state.sigma - state.prev_sigma).norm();
  return r;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged: return "Converged";
    case SolveStatus::kMaxIter: return "MaxIter";
    case SolveStatus::kAssumptionViolated: return "AssumptionViolated";
    case SolveStatus::kEpsConvex: return "EpsConvex";
    case SolveStatus::kStalled: return "Stalled";
  }
  return "Unknown";
}

AdmmSolver::AdmmSolver(Problem problem, SolverOptions options)
    : problem_(std::move(problem)), options_(std::move(options)) {
  norms_ = CostNorms::compute(problem_.cost, options_.norm_options);
  setup();
}

AdmmSolver::AdmmSolver(Problem problem, SolverOptions options, CostNorms norms)
    : problem_(std::move(problem)), options_(std::move(options)), norms_(norms) {
  setup();
}

void AdmmSolver::setup() {
  problem_.manifold.validate();
  if (problem_.cost.dim() != problem_.manifold.n()) {
    throw DimensionError("cost matrix is " + std::to_string(problem_.cost.dim()) +
                         " x " + std::to_string(problem_.cost.dim()) +
                         ", manifold has n = " + std::to_string(problem_.manifold.n()));
  }
  if (!(options_.tol_primal > 0.0) || !(options_.tol_obj > 0.0)) {
    throw InvalidArgument("tolerances must be positive");
  }
  if (options_.max_iter < 0 || options_.trace_every < 0) {
    throw InvalidArgument("max_iter and trace_every must be nonnegative");
  }
  if (!(options_.alpha > 0.0) || !(options_.beta > 0.0)) {
    throw InvalidArgument("alpha and beta must be positive");
  }
  penalty_ = resolve_penalty(norms_, options_);

  const double rho = penalty_.rho;
  const double mu = penalty_.mu;
  const double c2 = norms_.two * kNormInflate;
  if (mu == 0.0) {
    const double kappa = decrease_kappa(options_.alpha, options_.beta);
    theory_regime_ = problem_.manifold.is_sphere() && kappa > 0.0 &&
                     gamma_floor(options_.alpha) > 0.0 &&
                     rho >= options_.alpha * norms_.inf &&
                     rho >= options_.beta * norms_.two;
    guaranteed_coef_ = theory_regime_ ? kappa * norms_.two : -1.0;
  } else {
    const double coef = 0.5 * mu - c2 * c2 / rho;
    theory_regime_ = coef > 0.0;
    guaranteed_coef_ = theory_regime_ ? coef : -1.0;
  }
}

SolverState AdmmSolver::initialize(const FactorMatrix& start) const {
  const ManifoldSpec& spec = problem_.manifold;
  if (start.rows() != spec.n() || start.cols() != spec.r) {
    throw DimensionError("start is " + std::to_string(start.rows()) + " x " +
                         std::to_string(start.cols()) + ", expected " +
                         std::to_string(spec.n()) + " x " + std::to_string(spec.r));
  }
  if (manifold_violation(start, spec) > kStartTol) {
    throw InvalidArgument("start point is off the manifold");
  }
  SolverState s;
  s.sigma_tilde = start;
  s.sigma = start;
  spmm(problem_.cost, start, s.c_sigma_tilde);
  s.spmm_calls = 1;
  s.y = s.c_sigma_tilde;
  s.prev_sigma_tilde = start;
  s.prev_sigma = start;
  s.objective = frob_inner(s.c_sigma_tilde, start);
  s.lagrangian = s.objective;
  return s;
}

SolverState AdmmSolver::initialize() const {
  return initialize(random_point(problem_.manifold, options_.seed));
}

StepReport AdmmSolver::step(SolverState& state) const {
  const SparseSymMatrix& C = problem_.cost;
  const double rho = penalty_.rho;

  FactorMatrix c_sigma;
  spmm(C, state.sigma, c_sigma);
  const FactorMatrix g = gamma(state, c_sigma, rho, penalty_.mu);

  SolverState next;
  double gmin = 0.0;
  try {
    gmin = project(g, problem_.manifold, next.sigma_tilde);
  } catch (const DegenerateProjection& e) {
    throw AssumptionViolated(e.block(), state.k,
                             "gamma block " + std::to_string(e.block()) +
                                 " is degenerate at iteration " +
                                 std::to_string(state.k));
  }
  spmm(C, next.sigma_tilde, next.c_sigma_tilde);
  next.sigma = next.sigma_tilde + (state.y - next.c_sigma_tilde) / rho;
  next.y = state.y + rho * (next.sigma_tilde - next.sigma);
  next.k = state.k + 1;
  next.spmm_calls = state.spmm_calls + 2;
  next.min_gamma = gmin;
  next.objective = frob_inner(next.c_sigma_tilde, next.sigma_tilde);
  next.lagrangian =
      next.objective + 0.5 * rho * (next.sigma_tilde - next.sigma).squaredNorm();

  StepReport report;
  report.min_gamma = gmin;
  report.decrease = state.lagrangian - next.lagrangian;
  if (options_.check_invariants) {
    next.prev_sigma_tilde = state.sigma_tilde;
    next.prev_sigma = state.sigma;
    check_invariants(state, next, report);
  } else {
    next.prev_sigma_tilde = std::move(state.sigma_tilde);
    next.prev_sigma = std::move(state.sigma);
  }
  state = std::move(next);
  return report;
}

void AdmmSolver::check_invariants(const SolverState& before, const SolverState& after,
                                  StepReport& report) const {
  const ManifoldSpec& spec = problem_.manifold;
  const double n = static_cast<double>(spec.n());
  const double rho = penalty_.rho;
  const double mu = penalty_.mu;
  const double c2 = norms_.two * kNormInflate;
  const double slack = kSlack * (1.0 + std::abs(before.lagrangian));

  auto fail = [&](const std::string& what) {
    const std::string msg = "iteration " + std::to_string(after.k) + ": " + what;
    if (theory_regime_) throw InvariantViolation(msg);
    if (report.violation.empty()) report.violation = msg;
    ++report.invariant_warnings;
  };

  const double dual_gap = (after.y - after.c_sigma_tilde).norm();
  if (dual_gap > kDualTol * std::max(norms_.two, 1e-300) * std::sqrt(n)) {
    fail("||y - C sigma_tilde|| = " + fmt(dual_gap) + " exceeds 1e-10 ||C|| sqrt(n)");
  }
  const double off = manifold_violation(after.sigma_tilde, spec);
  if (off > kManifoldTol) fail("sigma_tilde off the manifold by " + fmt(off));

  const double floor = -n * norms_.inf * kNormInflate;
  if (after.lagrangian < floor - slack) {
    fail("G = " + fmt(after.lagrangian) + " below the floor -n ||C||_inf = " + fmt(floor));
  }

  const double dt2 = (after.sigma_tilde - before.sigma_tilde).squaredNorm();
  const double ds2 = (after.sigma - before.sigma).squaredNorm();

  // Valid for every iteration once y = C sigma_tilde: the sigma_tilde update
  // decreases L by at least max(((rho+mu) gmin - mu)/2, mu/2) ||dsigma_tilde||^2,
  // the sigma update by rho/2 ||dsigma||^2, and the y update costs at most
  // ||C||^2/rho ||dsigma_tilde||^2.
  const double observed_coef =
      std::max(0.5 * ((rho + mu) * report.min_gamma - mu), 0.5 * mu) - c2 * c2 / rho;
  if (report.decrease < observed_coef * dt2 + 0.5 * rho * ds2 - slack) {
    fail("decrease " + fmt(report.decrease) + " below the step bound " +
         fmt(observed_coef * dt2 + 0.5 * rho * ds2));
  }

  if (before.k >= 2) {
    if (mu == 0.0 && spec.is_sphere() && norms_.inf > 0.0) {
      const double alpha_eff = rho / (norms_.inf * kNormInflate);
      const double bound = gamma_floor(alpha_eff);
      if (bound > 0.0 && report.min_gamma < bound - kSlack) {
        fail("min ||gamma_i|| = " + fmt(report.min_gamma) + " below " + fmt(bound));
      }
    }
    if (guaranteed_coef_ >= 0.0) {
      if (report.decrease < -slack) {
        fail("G increased by " + fmt(-report.decrease));
      }
      const double need = guaranteed_coef_ * dt2 + 0.5 * rho * ds2;
      if (report.decrease < need - slack) {
        fail("decrease " + fmt(report.decrease) + " below the guaranteed " + fmt(need));
      }
    }
  }
}

bool AdmmSolver::converged(const SolverState& state, double previous_lagrangian) const {
  const double n = static_cast<double>(problem_.manifold.n());
  const double primal = (state.sigma_tilde - state.sigma).norm();
  return primal <= options_.tol_primal * std::sqrt(n) &&
         std::abs(state.lagrangian - previous_lagrangian) <=
             options_.tol_obj * (1.0 + std::abs(state.lagrangian));
}

TraceRecord AdmmSolver::record(const SolverState& state, double seconds) const {
  const Residuals r = residuals(state);
  TraceRecord rec;
  rec.k = state.k;
  rec.objective = state.objective;
  rec.lagrangian = state.lagrangian;
  rec.primal_res = r.primal;
  rec.step_tilde = r.step_tilde;
  rec.step_sigma = r.step_sigma;
  rec.min_gamma = state.min_gamma;
  rec.seconds = options_.record_time ? seconds : 0.0;
  return rec;
}

SolveResult AdmmSolver::solve() const { return solve(initialize()); }

SolveResult AdmmSolver::solve(SolverState state) const {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  SolveResult result;
  result.rho = penalty_.rho;
  result.mu = penalty_.mu;
  const bool tracing = options_.trace_every > 0;
  if (tracing) result.trace.add(record(state, 0.0));
  Index last_recorded = state.k;

  result.status = SolveStatus::kMaxIter;
  while (state.k < options_.max_iter) {
    if (options_.time_limit_seconds > 0.0 && elapsed() > options_.time_limit_seconds) {
      result.message = "time limit reached";
      break;
    }
    const double previous = state.lagrangian;
    StepReport report;
    try {
      report = step(state);
    } catch (const AssumptionViolated& e) {
      result.status = SolveStatus::kAssumptionViolated;
      result.message = e.what();
      spdlog::warn("{}", e.what());
      break;
    }
    if (report.invariant_warnings > 0) {
      if (result.invariant_warnings < 3) spdlog::warn("invariant check: {}", report.violation);
      result.invariant_warnings += report.invariant_warnings;
    }
    if (tracing && state.k % options_.trace_every == 0) {
      result.trace.add(record(state, elapsed()));
      last_recorded = state.k;
    }
    if (converged(state, previous)) {
      result.status = SolveStatus::kConverged;
      break;
    }
  }
  if (tracing && last_recorded != state.k) result.trace.add(record(state, elapsed()));
  if (result.invariant_warnings > 3) {
    spdlog::warn("{} invariant checks failed outside the guaranteed regime",
                 result.invariant_warnings);
  }
  result.seconds = elapsed();
  result.state = std::move(state);
  return result;
}

}  // namespace bmadmm
