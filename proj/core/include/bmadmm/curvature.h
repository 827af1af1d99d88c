#ifndef BMADMM_CURVATURE_H_
#define BMADMM_CURVATURE_H_

#include <cstdint>

#include "bmadmm/admm.h"
#include "bmadmm/eigen_estimate.h"
#include "bmadmm/manifold.h"
#include "bmadmm/sparse_sym_matrix.h"

namespace bmadmm {

// f(sigma) = <C sigma, sigma>.
double objective(const SparseSymMatrix& C, const FactorMatrix& sigma);

// Riemannian gradient 2 P_T(C sigma) under the embedded metric. For d = 1 the
// rows are g_i = 2[(C sigma)_i - <(C sigma)_i, sigma_i> sigma_i]. Throws
// InvalidArgument if sigma is off the manifold.
FactorMatrix riemannian_grad(const SparseSymMatrix& C, const FactorMatrix& sigma,
                             const ManifoldSpec& spec);
FactorMatrix riemannian_grad_from_product(const FactorMatrix& sigma,
                                          const FactorMatrix& c_sigma,
                                          const ManifoldSpec& spec);

// lambda_i = <(C sigma)_i, sigma_i>.
Eigen::VectorXd row_multipliers(const FactorMatrix& sigma, const FactorMatrix& c_sigma);

// Sphere product only:
//   <u, Hess f(sigma)[u]> = 2 <u, C u> - 2 sum_i lambda_i ||u_i||^2.
// Throws InvalidArgument if u is not tangent (|<sigma_i, u_i>| > 1e-8).
double hess_quadform(const SparseSymMatrix& C, const FactorMatrix& sigma,
                     const FactorMatrix& u);

// Hess f(sigma)[u] = P_T(2 C u) - 2 Lambda u for tangent u.
FactorMatrix hess_apply(const SparseSymMatrix& C, const FactorMatrix& sigma,
                        const Eigen::VectorXd& lambda, const FactorMatrix& u);

enum class ProbeStatus { kNegativeCurvature, kEpsConvex, kInconclusive };
const char* to_string(ProbeStatus status);

struct ProbeOptions {
  double delta = 1e-3;  // failure probability of the randomized probe
  Index max_iterations = 200000;
  std::uint64_t seed = 0;
};

struct CurvatureReport {
  double lambda_h = 0.0;  // <u, Hess[u]>
  FactorMatrix u;         // unit Frobenius norm, tangent, <u, grad> <= 0
  double lambda_min_estimate = 0.0;
  bool certified_eps_convex = false;
  ProbeStatus status = ProbeStatus::kInconclusive;
  Index probe_iterations = 0;
  Index budget = 0;
};

// Power iteration on c I - Hess over the tangent space, c = 2||C||_2 +
// 2||C||_inf. The budget ceil(log(n r / delta) / eps') with
// eps' = eps / (2 (c + eps)) makes lambda_h <= lambda_min / 2 whenever
// lambda_min < -eps, with probability >= 1 - delta. Stops early once the
// iterate is an eigenvector to ~1e-10 c. If the budget exceeds
// max_iterations and the iteration has not settled, the report is
// kInconclusive.
CurvatureReport negative_curvature_direction(const SparseSymMatrix& C,
                                             const FactorMatrix& sigma, double eps,
                                             const CostNorms& norms,
                                             const ProbeOptions& options = {});
CurvatureReport negative_curvature_direction(const SparseSymMatrix& C,
                                             const FactorMatrix& sigma, double eps,
                                             const ProbeOptions& options = {});

struct EscapeResult {
  FactorMatrix sigma;
  double step = 0.0;                 // t = -2 lambda_h / (15 ||C||_1)
  double guaranteed_decrease = 0.0;  // -2 lambda_h^3 / (675 ||C||_1^2)
  double decrease = 0.0;             // f(sigma) - f(sigma')
};

// Geodesic move along report.u. Requires report.lambda_h < 0. With check set,
// throws InvariantViolation if the realised decrease misses the guaranteed
// one by more than 1e-9.
EscapeResult escape_step(const SparseSymMatrix& C, const FactorMatrix& sigma,
                         const CurvatureReport& report, double norm1,
                         bool check = false);

struct CurvatureSolveOptions {
  double eps = 1e-2;
  // Decrease threshold below which a probe runs; 0 selects kappa_eff eps^2
  // with kappa_eff = min(kappa ||C||_2, rho / 2).
  double decrease_threshold = 0.0;
  ProbeOptions probe;
};

// ADMM steps interleaved with curvature probes (sphere products, mu = 0).
// The iteration budget is min(max_iter, T1 + T2) with
//   T1 = max(1, ceil((f(sigma0) + n ||C||_inf) / (kappa_eff eps^2)))
//   T2 = ceil(675 ||C||_1^2 n / eps^2).
// Status is EpsConvex when a probe certifies (the probed iterate is
// returned), MaxIter when the budget runs out.
SolveResult solve_with_curvature(const Problem& problem, const SolverOptions& options,
                                 const CurvatureSolveOptions& curvature);
SolveResult solve_with_curvature(const Problem& problem, const SolverOptions& options,
                                 const CurvatureSolveOptions& curvature,
                                 const FactorMatrix& start);

}  // namespace bmadmm

#endif  // BMADMM_CURVATURE_H_
