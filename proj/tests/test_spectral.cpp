#include <gtest/gtest.h>

#include "dnnbounds/spectral.hpp"
#include "test_util.hpp"

using namespace dnnbounds;

TEST(Spectral, Identity) { EXPECT_NEAR(spectral_norm(Matrix::Identity(3, 3)), 1.0, 1e-12); }

TEST(Spectral, Diagonal) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = -4;
  EXPECT_NEAR(spectral_norm(d), 4.0, 1e-12);
}

TEST(Spectral, ZeroAndEmpty) {
  EXPECT_EQ(spectral_norm(Matrix::Zero(3, 5)), 0.0);
  EXPECT_EQ(spectral_norm(Matrix(0, 0)), 0.0);
  EXPECT_EQ(exact_spectral_norm(Matrix(0, 3)), 0.0);
}

TEST(Spectral, NonFiniteRejected) {
  Matrix m = Matrix::Ones(2, 2);
  m(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(spectral_norm(m), std::domain_error);
}

TEST(Spectral, RandomMatricesMatchSvd) {
  auto rng = CounterRng::stream(4, 0, 0);
  for (int n = 0; n < 50; ++n) {
    const auto rows = static_cast<Eigen::Index>(testutil::uniform_int(rng, 1, 40));
    const auto cols = static_cast<Eigen::Index>(testutil::uniform_int(rng, 1, 40));
    const Matrix m = testutil::normal_matrix(rng, rows, cols, 10.0 * rng.uniform());
    const double svd = Eigen::JacobiSVD<Matrix>(m).singularValues()[0];
    const SpectralNorm est = spectral_norm_ex(m);
    EXPECT_TRUE(est.converged);
    EXPECT_NEAR(est.value, svd, 1e-9 * svd) << rows << "x" << cols;
  }
}

TEST(Spectral, SingleVectorPowerIteration) {
  auto rng = CounterRng::stream(4, 0, 1);
  PowerIterationOptions opts;
  opts.block_size = 1;
  for (int n = 0; n < 20; ++n) {
    const Matrix m = testutil::normal_matrix(rng, 12, 7);
    const double svd = Eigen::JacobiSVD<Matrix>(m).singularValues()[0];
    const SpectralNorm est = spectral_norm_ex(m, opts);
    EXPECT_TRUE(est.converged);
    EXPECT_NEAR(est.value, svd, 1e-6 * svd);
  }
}

TEST(Spectral, ClusteredSingularValues) {
  // four top singular values within 3e-6 relative: hopeless for a single
  // vector, easy for a block that spans them
  auto rng = CounterRng::stream(4, 0, 2);
  const Matrix u = Eigen::HouseholderQR<Matrix>(testutil::normal_matrix(rng, 20, 20)).householderQ();
  const Matrix v = Eigen::HouseholderQR<Matrix>(testutil::normal_matrix(rng, 15, 15)).householderQ();
  Matrix s = Matrix::Zero(20, 15);
  for (int i = 0; i < 15; ++i) s(i, i) = i < 4 ? 1.0 - 1e-6 * i : 0.5 - 0.01 * i;
  const Matrix m = u * s * v.transpose();
  EXPECT_NEAR(spectral_norm(m), 1.0, 1e-9);
}

TEST(Spectral, StartInNullSpace) {
  // a rank-one matrix whose row space is orthogonal to the all-positive start
  Matrix m = Matrix::Zero(3, 2);
  m(0, 0) = 5;
  m(0, 1) = -5;
  PowerIterationOptions opts;
  opts.block_size = 1;
  EXPECT_NEAR(spectral_norm_ex(m, opts).value, 5.0 * std::sqrt(2.0), 1e-9);
}

TEST(Spectral, ScaleInvariantAtExtremes) {
  auto rng = CounterRng::stream(4, 0, 3);
  const Matrix m = testutil::normal_matrix(rng, 6, 9);
  const double base = spectral_norm(m);
  EXPECT_NEAR(spectral_norm(m * 1e200) / 1e200, base, 1e-9 * base);
  EXPECT_NEAR(spectral_norm(m * 1e-200) / 1e-200, base, 1e-9 * base);
}

TEST(Spectral, NeverAboveExact) {
  auto rng = CounterRng::stream(4, 0, 4);
  for (int n = 0; n < 50; ++n) {
    const Matrix m = testutil::normal_matrix(rng, 8, 8);
    EXPECT_LE(spectral_norm(m), exact_spectral_norm(m) * (1 + 1e-14));
  }
}
