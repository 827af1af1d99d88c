#ifndef BMADMM_CERTIFY_H_
#define BMADMM_CERTIFY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "bmadmm/manifold.h"
#include "bmadmm/problem_io.h"
#include "bmadmm/sparse_sym_matrix.h"

namespace bmadmm {

struct CertifyOptions {
  double tol = 1e-6;
  double eig_rel_tol = 1e-8;
  Index eig_max_iter = 20000;
  std::uint64_t seed = 0;
  double cost_two_norm = 0.0;  // ||C||_2 if already known; 0 estimates it
};

// Dual certificate built from the stationarity multipliers of sigma:
//   d = 1: lambda_i = <(C sigma)_i, sigma_i>
//   d > 1: Lambda_i = sym(sigma_i (C sigma)_i^T)
// with slack S = C - blockdiag(Lambda). For any feasible X,
//   <C, X> >= sum_i tr(Lambda_i) + n min(0, lambda_min(S)),
// which is `dual_bound` (the eigenvalue estimate is lowered by its residual).
struct Certificate {
  Eigen::VectorXd lambda;               // d = 1
  std::vector<Eigen::MatrixXd> blocks;  // d > 1
  double objective = 0.0;
  double duality_gap = 0.0;  // objective - sum_i tr(Lambda_i)
  double slack_min_eig = 0.0;
  double eig_residual = 0.0;
  double dual_bound = 0.0;
  double relative_gap = 0.0;  // (objective - dual_bound) / |dual_bound|
  double stationarity = 0.0;  // ||C sigma - Lambda sigma||_F
  double skew = 0.0;          // ||skew(sigma_i (C sigma)_i^T)||_F summed over blocks
  Index block_count = 0;
  bool certified = false;
};

// certified <=> slack_min_eig >= -tol ||C||_2 and duality_gap <= tol (1 + |objective|).
// Throws InvalidArgument if sigma is off the manifold.
Certificate dual_certificate(const SparseSymMatrix& C, const FactorMatrix& sigma,
                             const ManifoldSpec& spec, const CertifyOptions& options = {});

// Keys: objective, gap, slack_min_eig, certified, block_count, dual_bound,
// relative_gap.
std::string certificate_to_json(const Certificate& cert);

// |(objective - reference) / reference|; throws InvalidArgument for a zero
// reference (use the absolute difference instead).
double relative_gap(double objective, double reference);

struct MaxCutResult {
  double value = 0.0;
  std::vector<int> assignment;  // +1 / -1 per vertex, vertex 1 on the +1 side
};

// Exhaustive search over the 2^(n-1) cuts (Gray code order). n <= 24.
MaxCutResult brute_force_maxcut(const GraphInstance& graph);

struct OracleResult {
  double value = 0.0;
  FactorMatrix sigma;
  Certificate certificate;
  std::uint64_t seed = 0;  // restart that produced the result
  Index rank = 0;
  bool certified = false;
};

// Reference SDP value: ADMM in practice mode followed by an RGD polish at rank
// min(n, ceil(sqrt(2n)) + 2) (at least d + 1), from `restarts` seeds
// seed, seed + 1, ... The best certified result wins, ties broken by the
// lowest seed; if none certifies the best value is returned uncertified.
OracleResult oracle_sdp(const SparseSymMatrix& C, Index q, Index d, int restarts = 5,
                        std::uint64_t seed = 0);

}  // namespace bmadmm

#endif  // BMADMM_CERTIFY_H_
