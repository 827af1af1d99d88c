#ifndef BMADMM_EIGEN_ESTIMATE_H_
#define BMADMM_EIGEN_ESTIMATE_H_

#include <cstdint>

#include "bmadmm/sparse_sym_matrix.h"

namespace bmadmm {

struct EigenEstimateOptions {
  double rel_tol = 1e-6;
  // Budget in matrix-vector products.
  Index max_iter = 5000;
  std::uint64_t seed = 0;
};

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;
  // ||S v - value v||.
  double residual = 0.0;
  Index matvecs = 0;
};

// Spectral norm of a symmetric matrix via restarted Lanczos with full
// reorthogonalization. Both ends of the spectrum are tracked, so the result
// is max(|lambda_min|, |lambda_max|) within rel_tol. Throws NonConvergence
// carrying the last estimate if max_iter products are not enough.
double two_norm_estimate(const SparseSymMatrix& C,
                         const EigenEstimateOptions& options = {});

// Smallest eigenpair with ||S v - lambda v|| <= rel_tol * ||S||_2.
EigenPair min_eig_estimate(const SparseSymMatrix& S,
                           const EigenEstimateOptions& options = {});

// Norms every solver consumes; computed once per problem.
struct CostNorms {
  double inf = 0.0;  // ||C||_inf == ||C||_1
  double two = 0.0;  // ||C||_2

  static CostNorms compute(const SparseSymMatrix& C,
                           const EigenEstimateOptions& options = {});
};

}  // namespace bmadmm

#endif  // BMADMM_EIGEN_ESTIMATE_H_
