#ifndef BMADMM_ADMM_H_
#define BMADMM_ADMM_H_

#include <cstdint>
#include <string>

#include "bmadmm/eigen_estimate.h"
#include "bmadmm/manifold.h"
#include "bmadmm/sparse_sym_matrix.h"
#include "bmadmm/trace.h"

namespace bmadmm {

// min <C, sigma sigma^T> over the manifold described by `manifold`.
struct Problem {
  SparseSymMatrix cost;
  ManifoldSpec manifold;
  std::string name;
};

enum class PenaltyMode {
  kTheory,    // parameters inside the regime of the convergence guarantees
  kPractice,  // rho = ||C||_2 (and mu = ||C||_2 for the proximal variant)
  kAbsolute,  // rho and mu taken verbatim from SolverOptions
};

struct SolverOptions {
  PenaltyMode penalty_mode = PenaltyMode::kPractice;
  double rho = 0.0;       // kAbsolute only
  double mu = 0.0;        // kAbsolute only; mu > 0 selects the proximal update
  bool proximal = false;  // kTheory / kPractice: use mu > 0
  Index max_iter = 10000;
  double tol_primal = 1e-8;
  double tol_obj = 1e-10;
  std::uint64_t seed = 0;
  bool check_invariants = false;
  Index trace_every = 1;  // 0 disables the trace
  bool record_time = true;
  double time_limit_seconds = 0.0;  // 0 means no limit
  // Constants of the monotone-decrease analysis. kappa(10, 2) = 0.08.
  double alpha = 10.0;
  double beta = 2.0;
  EigenEstimateOptions norm_options;
};

// theory:   max(alpha ||C||_inf, beta ||C||_2)
// practice: ||C||_2
// Throws InvalidArgument if the result is not positive (e.g. C = 0).
double default_rho(const CostNorms& norms, PenaltyMode mode, double alpha = 10.0,
                   double beta = 2.0);

// (alpha^2 - 4 alpha - 2) beta / (2 alpha^2) - 1 / beta.
double decrease_kappa(double alpha, double beta);

struct Penalty {
  double rho = 0.0;
  double mu = 0.0;
};

// Resolves (rho, mu) from the options. The proximal variant in theory mode
// uses rho = mu = 2 ||C||_2, which gives mu/2 - ||C||^2/rho = ||C||_2 / 2 > 0.
Penalty resolve_penalty(const CostNorms& norms, const SolverOptions& options);

struct SolverState {
  FactorMatrix sigma_tilde;
  FactorMatrix sigma;
  FactorMatrix y;
  FactorMatrix c_sigma_tilde;  // C * sigma_tilde, reused by G and the checks
  FactorMatrix prev_sigma_tilde;
  FactorMatrix prev_sigma;
  Index k = 0;
  double objective = 0.0;   // <C sigma_tilde, sigma_tilde>
  double lagrangian = 0.0;  // G_rho(sigma_tilde, sigma)
  double min_gamma = 0.0;   // of the gamma that produced sigma_tilde
  Index spmm_calls = 0;
};

// gamma = mu/(rho+mu) sigma_tilde + rho/(rho+mu) sigma - (y + C sigma)/(rho+mu);
// reduces to sigma - (y + C sigma)/rho at mu = 0.
FactorMatrix gamma(const SolverState& state, const FactorMatrix& c_sigma, double rho,
                   double mu);
FactorMatrix gamma(const SparseSymMatrix& C, const SolverState& state, double rho,
                   double mu);

// <C sigma_tilde, sigma_tilde> + rho/2 ||sigma_tilde - sigma||_F^2. Equals the
// augmented Lagrangian whenever y = C sigma_tilde. Throws InvalidArgument if
// sigma_tilde is off the manifold.
double twin_value(const SparseSymMatrix& C, const ManifoldSpec& spec,
                  const FactorMatrix& sigma_tilde, const FactorMatrix& sigma,
                  double rho);

struct Residuals {
  double primal = 0.0;      // ||sigma_tilde - sigma||_F
  double step_tilde = 0.0;  // ||sigma_tilde - prev_sigma_tilde||_F
  double step_sigma = 0.0;  // ||sigma - prev_sigma||_F
};
Residuals residuals(const SolverState& state);

enum class SolveStatus { kConverged, kMaxIter, kAssumptionViolated, kEpsConvex, kStalled };
const char* to_string(SolveStatus status);

struct SolveResult {
  SolverState state;
  Trace trace;
  SolveStatus status = SolveStatus::kMaxIter;
  double seconds = 0.0;
  double rho = 0.0;
  double mu = 0.0;
  std::string message;
  Index invariant_warnings = 0;
  Index probes = 0;
  Index escapes = 0;
};

struct StepReport {
  double min_gamma = 0.0;
  double decrease = 0.0;  // G^k - G^{k+1}
  Index invariant_warnings = 0;
  std::string violation;  // first failed check of this step, if any
};

// One ADMM-BM kernel for both variants: mu = 0 is the plain bilinear ADMM on
// sphere products, mu > 0 the proximal variant (any block size). The problem
// is copied; the solver is immutable and steps mutate a caller-owned state.
class AdmmSolver {
 public:
  AdmmSolver(Problem problem, SolverOptions options);
  AdmmSolver(Problem problem, SolverOptions options, CostNorms norms);

  // sigma = sigma_tilde = start, y = C start. The start must lie on M.
  SolverState initialize(const FactorMatrix& start) const;
  // Seeded random start.
  SolverState initialize() const;

  // Advances the state by one iteration (exactly two products with C).
  // Throws AssumptionViolated on a degenerate gamma block and
  // InvariantViolation when a guaranteed invariant fails.
  StepReport step(SolverState& state) const;

  SolveResult solve() const;
  SolveResult solve(SolverState state) const;

  const Problem& problem() const { return problem_; }
  const SolverOptions& options() const { return options_; }
  const CostNorms& norms() const { return norms_; }
  double rho() const { return penalty_.rho; }
  double mu() const { return penalty_.mu; }
  // True when the parameters satisfy the hypotheses of the monotone-decrease
  // guarantee (violations then abort instead of being logged).
  bool in_theory_regime() const { return theory_regime_; }
  // Coefficient c with G^k - G^{k+1} >= c ||dsigma_tilde||^2 + rho/2
  // ||dsigma||^2 guaranteed for k >= 2, or a negative value if none applies.
  double guaranteed_decrease_coefficient() const { return guaranteed_coef_; }

  bool converged(const SolverState& state, double previous_lagrangian) const;
  TraceRecord record(const SolverState& state, double seconds) const;

 private:
  void setup();
  void check_invariants(const SolverState& before, const SolverState& after,
                        StepReport& report) const;

  Problem problem_;
  SolverOptions options_;
  CostNorms norms_;
  Penalty penalty_;
  bool theory_regime_ = false;
  double guaranteed_coef_ = -1.0;
};

}  // namespace bmadmm

#endif  // BMADMM_ADMM_H_
