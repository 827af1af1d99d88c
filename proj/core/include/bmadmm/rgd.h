#ifndef BMADMM_RGD_H_
#define BMADMM_RGD_H_

#include <cstdint>

#include "bmadmm/admm.h"
#include "bmadmm/manifold.h"
#include "bmadmm/sparse_sym_matrix.h"

namespace bmadmm {

// Riemannian gradient descent with projection retraction and Armijo
// backtracking, the baseline solver.
struct RgdOptions {
  double initial_step = 0.0;  // 0 selects 1 / ||C||_2
  double backtrack = 0.5;
  double armijo = 1e-4;
  Index max_halvings = 60;
  Index max_iter = 10000;
  double grad_tol = 1e-8;  // stop at ||grad||_F <= grad_tol (1 + ||C||_2)
  std::uint64_t seed = 0;
  Index trace_every = 1;
  bool record_time = true;
  double time_limit_seconds = 0.0;
};

struct RgdStep {
  FactorMatrix sigma;
  FactorMatrix c_sigma;
  double objective = 0.0;
  double step = 0.0;  // accepted t, 0 if none
  bool stalled = false;
};

// One Armijo step: f(R(sigma - t grad)) <= f(sigma) - armijo t ||grad||^2,
// starting from t = initial_step and multiplying by `backtrack`. After
// max_halvings rejections sigma is returned unchanged with stalled set.
RgdStep rgd_step(const SparseSymMatrix& C, const ManifoldSpec& spec,
                 const FactorMatrix& sigma, const RgdOptions& options, double initial_step);

// The trace uses the ADMM schema with lagrangian = objective, primal_res = 0
// and step_sigma = step_tilde. Status is Converged, MaxIter or Stalled.
SolveResult rgd_solve(const Problem& problem, const RgdOptions& options);
SolveResult rgd_solve(const Problem& problem, const RgdOptions& options,
                      const FactorMatrix& start);

}  // namespace bmadmm

#endif  // BMADMM_RGD_H_
