#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "bmadmm/curvature.h"
#include "bmadmm/errors.h"
#include "bmadmm/problem_io.h"
#include "test_support.h"

namespace bmadmm {
namespace {

using testing::edge_matrix;
using testing::gaussian_factor;
using testing::random_symmetric;

FactorMatrix rows2(double a, double b, double c, double d) {
  FactorMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

// Central second difference of t -> f(exp(t u)).
double second_difference(const SparseSymMatrix& C, const FactorMatrix& sigma,
                         const FactorMatrix& u, double h) {
  const ManifoldSpec spec = ManifoldSpec::sphere(sigma.rows(), sigma.cols());
  return (objective(C, geodesic_step(sigma, u, h, spec)) - 2.0 * objective(C, sigma) +
          objective(C, geodesic_step(sigma, u, -h, spec))) /
         (h * h);
}

TEST(ObjectiveTest, Examples) {
  const ManifoldSpec spec = ManifoldSpec::sphere(4, 3);
  EXPECT_EQ(objective(SparseSymMatrix::zero(4), random_point(spec, 1)), 0.0);
  const std::vector<Triplet> diag{{0, 0, 1.0}, {1, 1, -2.0}, {2, 2, 0.5}, {3, 3, 4.0}};
  const SparseSymMatrix D = SparseSymMatrix::from_entries(4, diag);
  for (std::uint64_t s = 0; s < 5; ++s) {
    EXPECT_NEAR(objective(D, random_point(spec, s)), 3.5, 1e-14);
  }
  EXPECT_EQ(objective(edge_matrix(), rows2(0.6, 0.8, -0.6, -0.8)), -2.0);
}

TEST(RiemannianGradTest, Examples) {
  const ManifoldSpec spec = ManifoldSpec::sphere(2, 2);
  EXPECT_LE(riemannian_grad(edge_matrix(), rows2(1, 0, -1, 0), spec).norm(), 1e-15);
  EXPECT_EQ(riemannian_grad(SparseSymMatrix::zero(2), rows2(1, 0, 0, 1), spec).norm(), 0.0);
  EXPECT_EQ(riemannian_grad(edge_matrix(), rows2(1, 0, 0, 1), spec), rows2(0, 2, 2, 0));
}

TEST(RiemannianGradTest, OffManifoldThrows) {
  EXPECT_THROW(riemannian_grad(edge_matrix(), rows2(1, 1, 0, 1), ManifoldSpec::sphere(2, 2)),
               InvalidArgument);
}

TEST(RiemannianGradTest, Tangent) {
  const ManifoldSpec spec = ManifoldSpec::sphere(30, 5);
  const FactorMatrix sigma = random_point(spec, 3);
  const FactorMatrix g = riemannian_grad(random_symmetric(30, 0.3, 3), sigma, spec);
  for (Index i = 0; i < 30; ++i) EXPECT_LE(std::abs(g.row(i).dot(sigma.row(i))), 1e-12);
}

TEST(RiemannianGradTest, MatchesFiniteDifferences) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 5 + trial * 2;
    const Index r = 2 + trial % 4;
    const ManifoldSpec spec = ManifoldSpec::sphere(n, r);
    const SparseSymMatrix C = random_symmetric(n, 0.4, 100 + static_cast<std::uint64_t>(trial));
    const FactorMatrix sigma = random_point(spec, static_cast<std::uint64_t>(trial));
    const FactorMatrix g = riemannian_grad(C, sigma, spec);
    FactorMatrix u = tangent_project(sigma, gaussian_factor(n, r, rng), spec);
    u /= u.norm();
    const double h = 1e-5;
    const double fd = (objective(C, geodesic_step(sigma, u, h, spec)) -
                       objective(C, geodesic_step(sigma, u, -h, spec))) /
                      (2 * h);
    const double exact = g.cwiseProduct(u).sum();
    EXPECT_LE(std::abs(fd - exact), 1e-5 * std::max(1.0, g.norm())) << "trial " << trial;
  }
}

TEST(HessQuadformTest, Examples) {
  const FactorMatrix sigma = rows2(1, 0, 0, 1);
  EXPECT_EQ(hess_quadform(edge_matrix(), sigma, FactorMatrix::Zero(2, 2)), 0.0);
  EXPECT_EQ(hess_quadform(SparseSymMatrix::zero(2), sigma, rows2(0, 1, 1, 0)), 0.0);
  EXPECT_THROW(hess_quadform(edge_matrix(), sigma, rows2(1, 0, 0, 0)), InvalidArgument);
}

TEST(HessQuadformTest, MatchesSecondDifferences) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 4 + trial * 2;
    const Index r = 2 + trial % 3;
    const ManifoldSpec spec = ManifoldSpec::sphere(n, r);
    const SparseSymMatrix C = random_symmetric(n, 0.5, 200 + static_cast<std::uint64_t>(trial));
    const FactorMatrix sigma = random_point(spec, static_cast<std::uint64_t>(trial) + 7);
    FactorMatrix u = tangent_project(sigma, gaussian_factor(n, r, rng), spec);
    u /= u.norm();
    const double exact = hess_quadform(C, sigma, u);
    const double scale = std::max(1.0, std::abs(exact));
    const double best = std::min(std::abs(second_difference(C, sigma, u, 1e-3) - exact),
                                 std::abs(second_difference(C, sigma, u, 1e-4) - exact));
    EXPECT_LE(best, 1e-4 * scale) << "trial " << trial;
  }
}

TEST(HessApplyTest, ConsistentWithQuadformAndDenseHessian) {
  const Index n = 8, r = 3;
  const ManifoldSpec spec = ManifoldSpec::sphere(n, r);
  const SparseSymMatrix C = random_symmetric(n, 0.6, 12);
  const FactorMatrix sigma = random_point(spec, 12);
  const Eigen::VectorXd lambda = row_multipliers(sigma, spmm(C, sigma));
  const Eigen::MatrixXd basis = testing::tangent_basis(sigma);
  const Eigen::MatrixXd H = testing::dense_tangent_hessian(C.to_dense(), sigma);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd coords = Eigen::VectorXd(gaussian_factor(basis.cols(), 1, rng));
    const FactorMatrix u = testing::unflatten(basis * coords, n, r);
    const FactorMatrix hu = hess_apply(C, sigma, lambda, u);
    EXPECT_NEAR(hu.cwiseProduct(u).sum(), hess_quadform(C, sigma, u), 1e-12 * (1 + coords.squaredNorm()));
    EXPECT_LE((basis.transpose() * testing::flatten(hu) - H * coords).norm(),
              1e-12 * (1 + coords.norm()));
  }
}

TEST(NegativeCurvatureTest, ZeroCostCertifies) {
  const ManifoldSpec spec = ManifoldSpec::sphere(5, 3);
  const CurvatureReport r =
      negative_curvature_direction(SparseSymMatrix::zero(5), random_point(spec, 1), 1e-3);
  EXPECT_TRUE(r.certified_eps_convex);
  EXPECT_EQ(r.status, ProbeStatus::kEpsConvex);
}

TEST(NegativeCurvatureTest, EdgeMaximizerHasNegativeCurvature) {
  const FactorMatrix sigma = rows2(1, 0, 1, 0);
  const double lmin = testing::dense_hessian_min_eig(edge_matrix().to_dense(), sigma);
  EXPECT_LT(lmin, 0.0);
  const CurvatureReport r = negative_curvature_direction(edge_matrix(), sigma, 0.1);
  EXPECT_EQ(r.status, ProbeStatus::kNegativeCurvature);
  EXPECT_FALSE(r.certified_eps_convex);
  EXPECT_LT(r.lambda_h, 0.0);
  EXPECT_LE(r.lambda_h, lmin / 2 + 1e-6);
  EXPECT_NEAR(r.u.norm(), 1.0, 1e-12);
}

TEST(NegativeCurvatureTest, EdgeMinimizerCertifies) {
  const FactorMatrix sigma = rows2(1, 0, -1, 0);
  EXPECT_GE(testing::dense_hessian_min_eig(edge_matrix().to_dense(), sigma), -1e-12);
  const CurvatureReport r = negative_curvature_direction(edge_matrix(), sigma, 0.1);
  EXPECT_TRUE(r.certified_eps_convex);
  EXPECT_GE(r.lambda_h, -0.05);
}

TEST(NegativeCurvatureTest, ReportInvariants) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Index n = 10, r = 3;
    const ManifoldSpec spec = ManifoldSpec::sphere(n, r);
    const SparseSymMatrix C = random_symmetric(n, 0.5, seed + 300);
    const FactorMatrix sigma = random_point(spec, seed);
    ProbeOptions o;
    o.seed = seed;
    const CurvatureReport rep = negative_curvature_direction(C, sigma, 1e-2, o);
    EXPECT_NEAR(rep.u.norm(), 1.0, 1e-12);
    for (Index i = 0; i < n; ++i) EXPECT_LE(std::abs(rep.u.row(i).dot(sigma.row(i))), 1e-12);
    EXPECT_LE(rep.u.cwiseProduct(riemannian_grad(C, sigma, spec)).sum(), 0.0);
    if (rep.certified_eps_convex) EXPECT_GE(rep.lambda_h, -0.5e-2);
    EXPECT_NEAR(rep.lambda_h, hess_quadform(C, sigma, rep.u), 1e-10);
  }
}

TEST(NegativeCurvatureTest, HalfOfDenseMinimumEigenvalue) {
  int hits = 0, trials = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Index n = 12 + static_cast<Index>(seed % 5), r = 3;
    const ManifoldSpec spec = ManifoldSpec::sphere(n, r);
    const SparseSymMatrix C = random_symmetric(n, 0.5, seed + 400);
    const FactorMatrix sigma = random_point(spec, seed + 1);
    const double eps = 1e-2;
    const double lmin = testing::dense_hessian_min_eig(C.to_dense(), sigma);
    if (!(lmin < -eps)) continue;
    ProbeOptions o;
    o.seed = seed;
    const CurvatureReport rep = negative_curvature_direction(C, sigma, eps, o);
    ++trials;
    if (rep.lambda_h <= lmin / 2 + 1e-6) ++hits;
  }
  ASSERT_GT(trials, 50);
  EXPECT_GE(hits, static_cast<int>(std::ceil(0.99 * trials)));
}

TEST(NegativeCurvatureTest, InconclusiveWhenCapped) {
  const Index n = 40;
  const SparseSymMatrix C = random_symmetric(n, 0.5, 17);
  ProbeOptions o;
  o.max_iterations = 2;
  const CurvatureReport rep =
      negative_curvature_direction(C, random_point(ManifoldSpec::sphere(n, 5), 2), 1e-3, o);
  EXPECT_EQ(rep.status, ProbeStatus::kInconclusive);
  EXPECT_NEAR(rep.u.norm(), 1.0, 1e-12);
}

TEST(EscapeStepTest, StepAndGuaranteedDecrease) {
  CurvatureReport rep;
  rep.lambda_h = -1.0;
  rep.u = rows2(0, 1, 0, 0);
  const FactorMatrix sigma = rows2(1, 0, 0, 1);
  const EscapeResult e = escape_step(SparseSymMatrix::identity(2), sigma, rep, 1.0);
  EXPECT_NEAR(e.step, 2.0 / 15.0, 1e-16);
  EXPECT_NEAR(e.guaranteed_decrease, 2.0 / 675.0, 1e-17);
  EXPECT_EQ(e.sigma.row(1), sigma.row(1));
}

TEST(EscapeStepTest, RequiresNegativeCurvature) {
  CurvatureReport rep;
  rep.lambda_h = 0.1;
  rep.u = FactorMatrix::Zero(2, 2);
  EXPECT_THROW(escape_step(edge_matrix(), rows2(1, 0, 0, 1), rep, 1.0), InvalidArgument);
}

TEST(EscapeStepTest, DecreasesObjectiveWhenCurvatureNegative) {
  int escapes = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Index n = 15;
    const ManifoldSpec spec = ManifoldSpec::sphere(n, 3);
    const SparseSymMatrix C = random_symmetric(n, 0.5, seed + 500);
    const FactorMatrix sigma = random_point(spec, seed);
    const double eps = 1e-2;
    ProbeOptions o;
    o.seed = seed;
    const CurvatureReport rep = negative_curvature_direction(C, sigma, eps, o);
    if (!(rep.lambda_h < -eps / 2)) continue;
    ++escapes;
    EscapeResult e;
    ASSERT_NO_THROW(e = escape_step(C, sigma, rep, inf_norm(C), true));
    EXPECT_LE(objective(C, e.sigma), objective(C, sigma) + 1e-9);
    EXPECT_GE(e.decrease, e.guaranteed_decrease - 1e-9);
    EXPECT_LE(manifold_violation(e.sigma, spec), 1e-12);
  }
  EXPECT_GT(escapes, 0);
}

TEST(CurvatureSolveTest, EscapesEdgeSaddle) {
  for (const PenaltyMode mode : {PenaltyMode::kTheory, PenaltyMode::kPractice}) {
    SolverOptions o;
    o.penalty_mode = mode;
    o.check_invariants = true;
    o.max_iter = 100000;
    // Stopping accuracy scales with the threshold kappa_eff eps^2.
    CurvatureSolveOptions co;
    co.eps = 1e-3;
    const SolveResult r = solve_with_curvature({edge_matrix(), ManifoldSpec::sphere(2, 2), "edge"},
                                               o, co, rows2(1, 0, 1, 0));
    EXPECT_EQ(r.status, SolveStatus::kEpsConvex);
    EXPECT_NEAR(r.state.objective, -2.0, 1e-6);
    EXPECT_GE(r.escapes, 1);
    EXPECT_TRUE(r.trace.has_curvature_columns());
  }
}

TEST(CurvatureSolveTest, ZeroCostReturnsEpsConvex) {
  SolverOptions o;
  const SolveResult r =
      solve_with_curvature({SparseSymMatrix::zero(3), ManifoldSpec::sphere(3, 2), "zero"}, o, {});
  EXPECT_EQ(r.status, SolveStatus::kEpsConvex);
  EXPECT_EQ(r.state.k, 0);
}

TEST(CurvatureSolveTest, RejectsBlocks) {
  SolverOptions o;
  const So3Instance inst = generate_so3(3, 1.0, 1);
  EXPECT_THROW(solve_with_curvature({inst.cost, ManifoldSpec{3, 3, 4}, "so3"}, o, {}),
               InvalidArgument);
}

TEST(CurvatureSolveTest, DualInvariantAfterEscape) {
  SolverOptions o;
  o.penalty_mode = PenaltyMode::kTheory;
  o.max_iter = 100000;
  const SolveResult r = solve_with_curvature({edge_matrix(), ManifoldSpec::sphere(2, 2), "edge"},
                                             o, {}, rows2(1, 0, 1, 0));
  EXPECT_LE((r.state.y - spmm(edge_matrix(), r.state.sigma_tilde)).norm(), 1e-10 * std::sqrt(2.0));
}

TEST(CurvatureSolveTest, RandomInstancesReachEpsConvex) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Index n = 20;
    SolverOptions o;
    o.seed = seed;
    o.max_iter = 200000;
    o.trace_every = 0;
    const SparseSymMatrix C = random_symmetric(n, 0.4, seed + 600);
    const ManifoldSpec spec = ManifoldSpec::sphere(n, 3);
    const SolveResult r = solve_with_curvature({C, spec, "r"}, o, {});
    ASSERT_EQ(r.status, SolveStatus::kEpsConvex);
    EXPECT_GE(testing::dense_hessian_min_eig(C.to_dense(), r.state.sigma_tilde), -1e-2);
  }
}

}  // namespace
}  // namespace bmadmm
