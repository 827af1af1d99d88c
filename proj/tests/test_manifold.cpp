#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "bmadmm/errors.h"
#include "bmadmm/manifold.h"
#include "test_support.h"

namespace bmadmm {
namespace {

using testing::gaussian_factor;
using testing::random_orthonormal_rows;

FactorMatrix padded_identity(Index d, Index r, double scale = 1.0) {
  FactorMatrix m = FactorMatrix::Zero(d, r);
  for (Index i = 0; i < d; ++i) m(i, i) = scale;
  return m;
}

TEST(ManifoldSpecTest, Validate) {
  EXPECT_NO_THROW((ManifoldSpec{4, 1, 2}.validate()));
  EXPECT_NO_THROW((ManifoldSpec{4, 3, 3}.validate()));
  EXPECT_THROW((ManifoldSpec{4, 3, 2}.validate()), InvalidArgument);
  EXPECT_THROW((ManifoldSpec{0, 1, 2}.validate()), InvalidArgument);
  EXPECT_THROW((ManifoldSpec{2, 0, 2}.validate()), InvalidArgument);
}

TEST(DefaultRankTest, Values) {
  EXPECT_EQ(default_rank(200), 20);
  EXPECT_EQ(default_rank(800), 40);
  EXPECT_EQ(default_rank(2), 2);
  EXPECT_EQ(default_rank(1), 1);
  EXPECT_GE(default_rank(150, 3), 4);
}

TEST(ProjectBlockTest, PaddedIdentityIsFixed) {
  const FactorMatrix g = padded_identity(3, 5);
  EXPECT_LE((project_block(g) - g).norm(), 1e-15);
}

TEST(ProjectBlockTest, PositiveScalingRemoved) {
  const FactorMatrix g = padded_identity(2, 4, 2.0);
  EXPECT_LE((project_block(g) - padded_identity(2, 4)).norm(), 1e-14);
}

TEST(ProjectBlockTest, DiagonalWithNegativeEntry) {
  FactorMatrix g(2, 2);
  g << 3, 0, 0, -2;
  FactorMatrix expect(2, 2);
  expect << 1, 0, 0, -1;
  double smin = 0.0;
  EXPECT_LE((project_block(g, &smin) - expect).norm(), 1e-14);
  EXPECT_NEAR(smin, 2.0, 1e-12);

  // Brute force over rotations and reflections parameterised by angle.
  double best = std::numeric_limits<double>::infinity();
  Eigen::Matrix2d arg;
  for (int k = 0; k < 20000; ++k) {
    const double t = 2.0 * std::numbers::pi * k / 20000.0;
    for (const double sign : {1.0, -1.0}) {
      Eigen::Matrix2d q;
      q << std::cos(t), -sign * std::sin(t), std::sin(t), sign * std::cos(t);
      const double dist = (Eigen::Matrix2d(g) - q).norm();
      if (dist < best) {
        best = dist;
        arg = q;
      }
    }
  }
  EXPECT_LE((Eigen::Matrix2d(expect) - arg).norm(), 1e-3);
}

TEST(ProjectBlockTest, MatchesSvdPolar) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = 1 + trial % 3;
    const Index r = d + trial % 4;
    const FactorMatrix g = gaussian_factor(d, r, rng);
    const Eigen::MatrixXd expect = testing::svd_polar(g);
    EXPECT_LE((Eigen::MatrixXd(project_block(g)) - expect).norm(), 1e-12);
  }
}

TEST(ProjectBlockTest, Idempotent) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const FactorMatrix p = project_block(gaussian_factor(3, 5, rng));
    EXPECT_LE((project_block(p) - p).norm(), 1e-13);
    EXPECT_LE((p * p.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ProjectBlockTest, NearestAmongRandomOrthonormal) {
  std::mt19937_64 rng(5);
  for (const Index d : {2, 3}) {
    const FactorMatrix g = gaussian_factor(d, d, rng);
    const double dist = (project_block(g) - g).norm();
    for (int s = 0; s < 100000; ++s) {
      const Eigen::MatrixXd q = random_orthonormal_rows(d, d, rng);
      ASSERT_GE((Eigen::MatrixXd(g) - q).norm() - dist, -1e-12);
    }
  }
}

TEST(ProjectBlockTest, RankDeficientThrows) {
  FactorMatrix g(2, 3);
  g << 1, 2, 3, 2, 4, 6;
  EXPECT_THROW(project_block(g), DegenerateProjection);
}

TEST(NormalizeRowsTest, Examples) {
  FactorMatrix g(3, 3);
  g << 0, 3, 4, 1, 0, 0, 2, 0, 0;
  const FactorMatrix out = normalize_rows(g);
  EXPECT_NEAR(out(0, 1), 0.6, 1e-15);
  EXPECT_NEAR(out(0, 2), 0.8, 1e-15);
  EXPECT_EQ(out.row(1), g.row(1));
  EXPECT_EQ(out(2, 0), 1.0);
}

TEST(NormalizeRowsTest, ZeroRowNamesIndex) {
  FactorMatrix g(3, 2);
  g << 1, 0, 0, 0, 0, 1;
  try {
    normalize_rows(g);
    FAIL() << "expected DegenerateProjection";
  } catch (const DegenerateProjection& e) {
    EXPECT_EQ(e.block(), 1);
  }
}

TEST(NormalizeRowsTest, ScaleInvariant) {
  std::mt19937_64 rng(6);
  const FactorMatrix g = gaussian_factor(10, 4, rng);
  for (const double c : {1e-3, 0.5, 7.0, 1e6}) {
    EXPECT_LE((normalize_rows(FactorMatrix(c * g)) - normalize_rows(g)).norm(), 1e-14);
  }
}

TEST(ProjectTest, ReturnsMinRowNorm) {
  FactorMatrix g(2, 2);
  g << 3, 4, 0, 0.5;
  FactorMatrix out;
  EXPECT_DOUBLE_EQ(project(g, ManifoldSpec::sphere(2, 2), out), 0.5);
  EXPECT_LE(manifold_violation(out, ManifoldSpec::sphere(2, 2)), 1e-15);
}

TEST(ProjectTest, BlockReturnsMinSingularValue) {
  FactorMatrix g = FactorMatrix::Zero(4, 3);
  g(0, 0) = 2.0;
  g(1, 1) = 3.0;
  g(2, 0) = 0.25;
  g(3, 2) = 1.0;
  FactorMatrix out;
  const ManifoldSpec spec{2, 2, 3};
  EXPECT_NEAR(project(g, spec, out), 0.25, 1e-14);
  EXPECT_LE(manifold_violation(out, spec), 1e-14);
}

TEST(TangentProjectTest, Examples) {
  const ManifoldSpec spec = ManifoldSpec::sphere(1, 2);
  FactorMatrix sigma(1, 2);
  sigma << 1, 0;
  EXPECT_LE(tangent_project(sigma, sigma, spec).norm(), 1e-15);

  FactorMatrix e2(1, 2);
  e2 << 0, 1;
  EXPECT_EQ(tangent_project(sigma, e2, spec), e2);

  FactorMatrix g(1, 2);
  g << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  const FactorMatrix u = tangent_project(sigma, g, spec);
  EXPECT_NEAR(u(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(u(0, 1), 1 / std::sqrt(2.0), 1e-15);
}

TEST(TangentProjectTest, OffManifoldThrows) {
  FactorMatrix sigma(1, 2);
  sigma << 1.1, 0;
  EXPECT_THROW(tangent_project(sigma, sigma, ManifoldSpec::sphere(1, 2)), InvalidArgument);
}

TEST(TangentProjectTest, IdempotentAndOrthogonal) {
  std::mt19937_64 rng(8);
  for (const ManifoldSpec spec : {ManifoldSpec{12, 1, 4}, ManifoldSpec{5, 3, 5}}) {
    for (int trial = 0; trial < 10; ++trial) {
      const FactorMatrix sigma = random_point(spec, 100 + static_cast<std::uint64_t>(trial));
      const FactorMatrix g = gaussian_factor(spec.n(), spec.r, rng);
      const FactorMatrix p = tangent_project(sigma, g, spec);
      EXPECT_LE((tangent_project(sigma, p, spec) - p).norm(), 1e-12 * g.norm());
      EXPECT_LE(std::abs((g - p).cwiseProduct(p).sum()), 1e-10 * g.squaredNorm());
    }
  }
}

TEST(TangentProjectTest, StiefelTangentCondition) {
  std::mt19937_64 rng(9);
  const ManifoldSpec spec{4, 3, 5};
  const FactorMatrix sigma = random_point(spec, 1);
  const FactorMatrix u = tangent_project(sigma, gaussian_factor(12, 5, rng), spec);
  for (Index b = 0; b < spec.q; ++b) {
    const Eigen::MatrixXd m = u.middleRows(b * 3, 3) * sigma.middleRows(b * 3, 3).transpose();
    EXPECT_LE((m + m.transpose()).norm(), 1e-12);
  }
}

TEST(GeodesicStepTest, ZeroStep) {
  const ManifoldSpec spec = ManifoldSpec::sphere(5, 3);
  const FactorMatrix sigma = random_point(spec, 2);
  std::mt19937_64 rng(1);
  const FactorMatrix u = tangent_project(sigma, gaussian_factor(5, 3, rng), spec);
  EXPECT_EQ(geodesic_step(sigma, u, 0.0, spec), sigma);
}

TEST(GeodesicStepTest, QuarterCircle) {
  FactorMatrix sigma(1, 2);
  sigma << 1, 0;
  FactorMatrix u(1, 2);
  u << 0, 1;
  const FactorMatrix out = geodesic_step(sigma, u, std::numbers::pi / 2, ManifoldSpec::sphere(1, 2));
  EXPECT_NEAR(out(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(out(0, 1), 1.0, 1e-15);
}

TEST(GeodesicStepTest, ZeroRowUnchanged) {
  FactorMatrix sigma(2, 2);
  sigma << 1, 0, 0, 1;
  FactorMatrix u(2, 2);
  u << 0, 0.5, 0, 0;
  const FactorMatrix out = geodesic_step(sigma, u, 1.0, ManifoldSpec::sphere(2, 2));
  EXPECT_EQ(out.row(1), sigma.row(1));
  EXPECT_NEAR(out(0, 0), std::cos(0.5), 1e-15);
}

TEST(GeodesicStepTest, BlocksUnsupported) {
  const ManifoldSpec spec{2, 2, 3};
  const FactorMatrix sigma = random_point(spec, 0);
  EXPECT_THROW(geodesic_step(sigma, FactorMatrix::Zero(4, 3), 1.0, spec), InvalidArgument);
}

TEST(GeodesicStepTest, StaysOnSphere) {
  std::mt19937_64 rng(12);
  const ManifoldSpec spec = ManifoldSpec::sphere(30, 6);
  for (int trial = 0; trial < 20; ++trial) {
    const FactorMatrix sigma = random_point(spec, static_cast<std::uint64_t>(trial));
    const FactorMatrix u = tangent_project(sigma, gaussian_factor(30, 6, rng), spec);
    const double t = std::uniform_real_distribution<double>(-10.0, 10.0)(rng);
    EXPECT_LE(manifold_violation(geodesic_step(sigma, u, t, spec), spec), 1e-12);
  }
}

TEST(RandomPointTest, SphereRowsUnit) {
  const ManifoldSpec spec = ManifoldSpec::sphere(50, 10);
  const FactorMatrix s = random_point(spec, 3);
  for (Index i = 0; i < 50; ++i) EXPECT_NEAR(s.row(i).norm(), 1.0, 1e-15);
}

TEST(RandomPointTest, StiefelBlocksOrthonormal) {
  const ManifoldSpec spec{6, 3, 5};
  EXPECT_LE(manifold_violation(random_point(spec, 4), spec), 1e-12);
}

TEST(RandomPointTest, Deterministic) {
  const ManifoldSpec spec{6, 3, 5};
  EXPECT_EQ(random_point(spec, 9), random_point(spec, 9));
  EXPECT_NE(random_point(spec, 9), random_point(spec, 10));
}

}  // namespace
}  // namespace bmadmm
