#ifndef BMADMM_MANIFOLD_H_
#define BMADMM_MANIFOLD_H_

#include <cstdint>

#include "bmadmm/sparse_sym_matrix.h"

namespace bmadmm {

// Product of q Stiefel blocks. The factor is n x r with n = q * d, read as q
// stacked d x r blocks whose rows are orthonormal (B * B^T = I_d). d = 1 is
// the product of unit spheres.
struct ManifoldSpec {
  Index q = 1;
  Index d = 1;
  Index r = 1;

  Index n() const { return q * d; }
  bool is_sphere() const { return d == 1; }

  static ManifoldSpec sphere(Index n, Index r) { return {n, 1, r}; }
  static ManifoldSpec stiefel(Index q, Index d, Index r) { return {q, d, r}; }

  // Throws InvalidArgument unless r >= d >= 1 and q >= 1.
  void validate() const;
};

// ceil(sqrt(2 n)), floored at d + 1 for block problems and capped at n.
Index default_rank(Index n, Index d = 1);

// Nearest d x r matrix with orthonormal rows (orthogonal polar factor).
// Computed from the eigendecomposition of the d x d Gram matrix G G^T and
// polished by one Newton-Schulz step. Throws DegenerateProjection when
// sigma_min(G) <= 1e-12 sigma_max(G). If min_singular is non-null it
// receives sigma_min(G).
FactorMatrix project_block(const FactorMatrix& block,
                           double* min_singular = nullptr);

// Divides every row by its Euclidean norm; a zero row throws
// DegenerateProjection carrying the row index.
FactorMatrix normalize_rows(const FactorMatrix& G);

// Blockwise projection onto M. Returns the smallest row norm (d = 1) or the
// smallest block singular value (d > 1) of G.
double project(const FactorMatrix& G, const ManifoldSpec& spec, FactorMatrix& out);
FactorMatrix project(const FactorMatrix& G, const ManifoldSpec& spec);

// max over blocks of |B B^T - I|_max.
double manifold_violation(const FactorMatrix& sigma, const ManifoldSpec& spec);

// Orthogonal projection of G onto the tangent space at sigma:
//   d = 1: u_i = G_i - <sigma_i, G_i> sigma_i
//   d > 1: u_i = G_i - sym(G_i sigma_i^T) sigma_i
// Throws InvalidArgument when sigma is off the manifold by more than 1e-8.
FactorMatrix tangent_project(const FactorMatrix& sigma, const FactorMatrix& G,
                             const ManifoldSpec& spec);

// Per-row great-circle move sigma_i cos(|u_i| t) + u_i / |u_i| sin(|u_i| t).
// Rows with u_i = 0 are returned unchanged. Sphere only.
FactorMatrix geodesic_step(const FactorMatrix& sigma, const FactorMatrix& u,
                           double t, const ManifoldSpec& spec);

// Entries i.i.d. uniform on [0, 1], then projected blockwise. A degenerate
// draw is retried with seed + 1, up to 8 attempts.
FactorMatrix random_point(const ManifoldSpec& spec, std::uint64_t seed);

}  // namespace bmadmm

#endif  // BMADMM_MANIFOLD_H_
