#include "bmadmm/manifold.h"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "bmadmm/errors.h"

namespace bmadmm {
namespace {

constexpr double kRankTol = 1e-12;
constexpr double kOnManifoldTol = 1e-8;

}  // namespace

void ManifoldSpec::validate() const {
  if (q < 1 || d < 1 || r < d) {
    throw InvalidArgument("manifold spec needs q >= 1 and r >= d >= 1 (got q=" +
                          std::to_string(q) + ", d=" + std::to_string(d) +
                          ", r=" + std::to_string(r) + ")");
  }
}

Index default_rank(Index n, Index d) {
  Index r = static_cast<Index>(std::ceil(std::sqrt(2.0 * static_cast<double>(n))));
  if (d > 1) r = std::max(r, d + 1);
  return std::max(std::min(r, n), d);
}

FactorMatrix project_block(const FactorMatrix& block, double* min_singular) {
  if (block.rows() == 1) {
    const double norm = block.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw DegenerateProjection(0, "degenerate projection input: zero row");
    }
    if (min_singular) *min_singular = norm;
    return block / norm;
  }

  const Eigen::MatrixXd gram = block * block.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double top = lambda[lambda.size() - 1];
  if (!(top > 0.0) || !std::isfinite(top) ||
      lambda[0] <= kRankTol * kRankTol * top) {
    throw DegenerateProjection(0, "degenerate projection input: rank-deficient block");
  }
  if (min_singular) *min_singular = std::sqrt(lambda[0]);

  const Eigen::MatrixXd& q = eig.eigenvectors();
  const Eigen::MatrixXd inv_sqrt =
      q * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
  FactorMatrix polar = inv_sqrt * block;
  // Newton-Schulz polish; keeps the same polar factor, squares the error.
  const Eigen::MatrixXd pp = polar * polar.transpose();
  polar = 1.5 * polar - 0.5 * pp * polar;
  return polar;
}

FactorMatrix normalize_rows(const FactorMatrix& G) {
  FactorMatrix out(G.rows(), G.cols());
  for (Index i = 0; i < G.rows(); ++i) {
    const double norm = G.row(i).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw DegenerateProjection(i, "degenerate projection input: row " +
                                        std::to_string(i) + " has zero norm");
    }
    out.row(i) = G.row(i) / norm;
  }
  return out;
}

double project(const FactorMatrix& G, const ManifoldSpec& spec, FactorMatrix& out) {
  if (G.rows() != spec.n() || G.cols() != spec.r) {
    throw DimensionError("factor is " + std::to_string(G.rows()) + " x " +
                         std::to_string(G.cols()) + ", manifold expects " +
                         std::to_string(spec.n()) + " x " + std::to_string(spec.r));
  }
  out.resize(G.rows(), G.cols());
  double smallest = std::numeric_limits<double>::infinity();
  if (spec.is_sphere()) {
    for (Index i = 0; i < G.rows(); ++i) {
      const double norm = G.row(i).norm();
      if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw DegenerateProjection(i, "degenerate projection input: row " +
                                          std::to_string(i) + " has zero norm");
      }
      out.row(i) = G.row(i) / norm;
      smallest = std::min(smallest, norm);
    }
    return smallest;
  }

  for (Index b = 0; b < spec.q; ++b) {
    const FactorMatrix block = G.middleRows(b * spec.d, spec.d);
    double sv = 0.0;
    try {
      out.middleRows(b * spec.d, spec.d) = project_block(block, &sv);
    } catch (const DegenerateProjection&) {
      throw DegenerateProjection(b, "degenerate projection input: block " +
                                        std::to_string(b) + " is rank-deficient");
    }
    smallest = std::min(smallest, sv);
  }
  return smallest;
}

FactorMatrix project(const FactorMatrix& G, const ManifoldSpec& spec) {
  FactorMatrix out;
  project(G, spec, out);
  return out;
}

double manifold_violation(const FactorMatrix& sigma, const ManifoldSpec& spec) {
  if (sigma.rows() != spec.n() || sigma.cols() != spec.r) {
    throw DimensionError("factor shape does not match manifold spec");
  }
  double worst = 0.0;
  for (Index b = 0; b < spec.q; ++b) {
    const auto block = sigma.middleRows(b * spec.d, spec.d);
    const Eigen::MatrixXd gram = block * block.transpose();
    worst = std::max(
        worst, (gram - Eigen::MatrixXd::Identity(spec.d, spec.d)).cwiseAbs().maxCoeff());
  }
  return worst;
}

FactorMatrix tangent_project(const FactorMatrix& sigma, const FactorMatrix& G,
                             const ManifoldSpec& spec) {
  if (G.rows() != sigma.rows() || G.cols() != sigma.cols()) {
    throw DimensionError("tangent_project: shapes of sigma and G differ");
  }
  if (manifold_violation(sigma, spec) > kOnManifoldTol) {
    throw InvalidArgument("tangent_project: base point is off the manifold");
  }
  FactorMatrix u(G.rows(), G.cols());
  if (spec.is_sphere()) {
    for (Index i = 0; i < G.rows(); ++i) {
      u.row(i) = G.row(i) - G.row(i).dot(sigma.row(i)) * sigma.row(i);
    }
    return u;
  }
  for (Index b = 0; b < spec.q; ++b) {
    const auto s = sigma.middleRows(b * spec.d, spec.d);
    const auto g = G.middleRows(b * spec.d, spec.d);
    const Eigen::MatrixXd gs = g * s.transpose();
    const Eigen::MatrixXd sym = 0.5 * (gs + gs.transpose());
    u.middleRows(b * spec.d, spec.d) = g - sym * s;
  }
  return u;
}

FactorMatrix geodesic_step(const FactorMatrix& sigma, const FactorMatrix& u,
                           double t, const ManifoldSpec& spec) {
  if (!spec.is_sphere()) {
    throw InvalidArgument("geodesic_step is only supported for d = 1");
  }
  if (u.rows() != sigma.rows() || u.cols() != sigma.cols()) {
    throw DimensionError("geodesic_step: shapes of sigma and u differ");
  }
  FactorMatrix out(sigma.rows(), sigma.cols());
  for (Index i = 0; i < sigma.rows(); ++i) {
    const double speed = u.row(i).norm();
    if (speed == 0.0) {
      out.row(i) = sigma.row(i);
      continue;
    }
    const double angle = speed * t;
    out.row(i) = sigma.row(i) * std::cos(angle) + (u.row(i) / speed) * std::sin(angle);
  }
  return out;
}

FactorMatrix random_point(const ManifoldSpec& spec, std::uint64_t seed) {
  spec.validate();
  FactorMatrix raw(spec.n(), spec.r);
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (Index i = 0; i < raw.rows(); ++i) {
      for (Index j = 0; j < raw.cols(); ++j) raw(i, j) = dist(rng);
    }
    try {
      return project(raw, spec);
    } catch (const DegenerateProjection&) {
    }
  }
  throw DegenerateProjection(-1, "random_point: 8 consecutive degenerate draws");
}

}  // namespace bmadmm
