#include "bmadmm/eigen_estimate.h"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

#include "bmadmm/errors.h"

namespace bmadmm {
namespace {

constexpr Index kMaxKrylovDim = 100;

enum class Target { kBothEnds, kSmallest };

struct RitzEnds {
  EigenPair smallest;
  EigenPair largest;
  Index matvecs = 0;
  bool converged = false;
};

Eigen::VectorXd seeded_unit_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v / v.norm();
}

double explicit_residual(const SparseSymMatrix& A, const Eigen::VectorXd& v,
                         double value) {
  Eigen::VectorXd av;
  spmv(A, v, av);
  return (av - value * v).norm();
}

// Restarted Lanczos with full reorthogonalization. Each cycle builds a Krylov
// basis of at most kMaxKrylovDim vectors; the next cycle restarts from the
// Ritz vector(s) of interest.
RitzEnds lanczos(const SparseSymMatrix& A, const EigenEstimateOptions& options,
                 Target target) {
  if (!(options.rel_tol > 0.0)) throw InvalidArgument("rel_tol must be > 0");
  const Index n = A.dim();
  const Index m_max = std::min(n, kMaxKrylovDim);

  Eigen::VectorXd start = seeded_unit_vector(n, options.seed);
  Eigen::MatrixXd basis(n, m_max + 1);
  Eigen::VectorXd alpha(m_max);
  Eigen::VectorXd beta(m_max);
  Eigen::VectorXd w(n);

  RitzEnds out;
  while (true) {
    basis.col(0) = start;
    Index m = 0;
    bool breakdown = false;
    double scale = 0.0;
    for (Index j = 0; j < m_max && out.matvecs < options.max_iter; ++j) {
      spmv(A, basis.col(j), w);
      ++out.matvecs;
      alpha[j] = basis.col(j).dot(w);
      for (int pass = 0; pass < 2; ++pass) {
        const auto q = basis.leftCols(j + 1);
        w.noalias() -= q * (q.transpose() * w);
      }
      beta[j] = w.norm();
      m = j + 1;
      scale = std::max(scale, std::abs(alpha[j]) + beta[j] + (j > 0 ? beta[j - 1] : 0.0));
      if (beta[j] <= 1e-13 * scale || scale == 0.0) {
        breakdown = true;
        break;
      }
      basis.col(j + 1) = w / beta[j];
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    if (m == 1) {
      out.smallest.value = out.largest.value = alpha[0];
      out.smallest.vector = out.largest.vector = basis.col(0);
      const double res = breakdown ? 0.0 : beta[0];
      out.smallest.residual = out.largest.residual = res;
    } else {
      tri.computeFromTridiagonal(alpha.head(m), beta.head(m - 1),
                                 Eigen::ComputeEigenvectors);
      const auto& s = tri.eigenvectors();
      const double tail = breakdown ? 0.0 : beta[m - 1];
      out.smallest.value = tri.eigenvalues()[0];
      out.largest.value = tri.eigenvalues()[m - 1];
      out.smallest.vector = basis.leftCols(m) * s.col(0);
      out.largest.vector = basis.leftCols(m) * s.col(m - 1);
      out.smallest.residual = std::abs(tail * s(m - 1, 0));
      out.largest.residual = std::abs(tail * s(m - 1, m - 1));
    }

    const double spectral =
        std::max(std::abs(out.smallest.value), std::abs(out.largest.value));
    const double tol = options.rel_tol * spectral;
    const bool small_ok = out.smallest.residual <= tol;
    const bool large_ok = out.largest.residual <= tol;
    out.converged = target == Target::kSmallest ? small_ok : (small_ok && large_ok);
    if (spectral == 0.0) out.converged = true;

    if (out.converged || out.matvecs >= options.max_iter) break;

    if (target == Target::kSmallest || large_ok) {
      start = out.smallest.vector;
    } else if (small_ok) {
      start = out.largest.vector;
    } else {
      start = out.smallest.vector + out.largest.vector;
    }
    start.normalize();
  }

  out.smallest.vector.normalize();
  out.largest.vector.normalize();
  out.smallest.residual = explicit_residual(A, out.smallest.vector, out.smallest.value);
  out.largest.residual = explicit_residual(A, out.largest.vector, out.largest.value);
  out.smallest.matvecs = out.largest.matvecs = out.matvecs;
  return out;
}

}  // namespace

double two_norm_estimate(const SparseSymMatrix& C,
                         const EigenEstimateOptions& options) {
  const RitzEnds ends = lanczos(C, options, Target::kBothEnds);
  const double estimate =
      std::max(std::abs(ends.smallest.value), std::abs(ends.largest.value));
  if (!ends.converged) {
    throw NonConvergence(estimate,
                         std::max(ends.smallest.residual, ends.largest.residual),
                         "two_norm_estimate did not converge within " +
                             std::to_string(options.max_iter) + " products");
  }
  return estimate;
}

EigenPair min_eig_estimate(const SparseSymMatrix& S,
                           const EigenEstimateOptions& options) {
  RitzEnds ends = lanczos(S, options, Target::kSmallest);
  if (!ends.converged) {
    throw NonConvergence(ends.smallest.value, ends.smallest.residual,
                         "min_eig_estimate did not converge within " +
                             std::to_string(options.max_iter) + " products");
  }
  return std::move(ends.smallest);
}

CostNorms CostNorms::compute(const SparseSymMatrix& C,
                             const EigenEstimateOptions& options) {
  return CostNorms{inf_norm(C), two_norm_estimate(C, options)};
}

}  // namespace bmadmm
