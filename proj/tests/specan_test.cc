#include "regsyn/specan.h"

#include <random>

#include <gtest/gtest.h>

#include "oracles.h"

namespace regsyn {
namespace {

using testing::kalman_detectable;
using testing::random_orthogonal;

Eigen::MatrixXd random_matrix(int n, std::mt19937_64& rng) { return testing::random_matrix(n, n, rng); }

GTEST_TEST(SpecanTest, TraceAndDeterminantIdentities) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const Eigen::MatrixXd m = random_matrix(n, rng);
    const Spectrum sp = eigen(m);
    ASSERT_EQ(sp.size(), n);
    Complex sum = 0.0;
    Complex prod = 1.0;
    for (const Complex& z : sp.raw) {
      sum += z;
      prod *= z;
    }
    const double tr = m.trace();
    const double det = m.determinant();
    EXPECT_NEAR(sum.real(), tr, 1e-6 * std::max(1.0, std::fabs(tr)));
    EXPECT_NEAR(sum.imag(), 0.0, 1e-6 * std::max(1.0, std::fabs(tr)));
    EXPECT_NEAR(prod.real(), det, 1e-6 * std::max(1.0, std::fabs(det)));
    EXPECT_NEAR(prod.imag(), 0.0, 1e-6 * std::max(1.0, std::fabs(det)));
  }
}

GTEST_TEST(SpecanTest, ClustersRepeatedEigenvalues) {
  Eigen::Matrix3d m;
  m << 2, 1, 0, 0, 2, 0, 0, 0, -1;
  const Spectrum sp = eigen(m);
  ASSERT_EQ(sp.values.size(), 2u);
  EXPECT_NEAR(sp.values[0].real(), -1.0, 1e-12);
  EXPECT_EQ(sp.multiplicities[0], 1);
  EXPECT_NEAR(sp.values[1].real(), 2.0, 1e-7);
  EXPECT_EQ(sp.multiplicities[1], 2);
}

GTEST_TEST(SpecanTest, AbscissaAndHurwitz) {
  Eigen::Matrix2d m;
  m << -1, 5, 0, -0.5;
  EXPECT_DOUBLE_EQ(spectral_abscissa(m), -0.5);
  EXPECT_TRUE(is_hurwitz(m));
  EXPECT_TRUE(is_hurwitz(m, 0.4));
  EXPECT_FALSE(is_hurwitz(m, 0.6));
  Eigen::Matrix2d osc;
  osc << 0, 1, -1, 0;
  EXPECT_FALSE(is_hurwitz(osc));
}

GTEST_TEST(SpecanTest, HautusSimpleCases) {
  Eigen::Matrix3d a;
  a << -0.4, 0, 0, 0, 3, 0, 0, 0, -2;
  EXPECT_TRUE(hautus_detectable(Eigen::RowVector3d(1, 1, 0), a));
  EXPECT_FALSE(hautus_detectable(Eigen::RowVector3d(1, 0, 1), a));
  Eigen::Matrix2d osc;
  osc << 0, 1, -1, 0;
  EXPECT_FALSE(hautus_detectable(Eigen::RowVector2d(0, 0), osc));
  EXPECT_TRUE(hautus_detectable(Eigen::RowVector2d(1, 0), osc));
}

GTEST_TEST(SpecanTest, HautusMatchesKalmanOracle) {
  std::mt19937_64 rng(2024);
  int detectable = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const testing::Pair pr = testing::random_staircase_pair(rng);
    const bool oracle = kalman_detectable(pr.c, pr.a);
    EXPECT_EQ(hautus_detectable(pr.c, pr.a), oracle) << "trial " << trial << "\n" << pr.a << "\n" << pr.c;
    detectable += oracle ? 1 : 0;
  }
  EXPECT_GT(detectable, 40);
  EXPECT_LT(detectable, 160);
}

GTEST_TEST(SpecanTest, TransferFunctionConjugateSymmetry) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 5);
    const Eigen::MatrixXd a = random_matrix(n, rng);
    Eigen::VectorXd b(n);
    Eigen::RowVectorXd c(n);
    for (int i = 0; i < n; ++i) {
      b(i) = nd(rng);
      c(i) = nd(rng);
    }
    const double d = nd(rng);
    const Complex z(nd(rng), 3.0 + nd(rng));
    const Complex g = transfer_function(c, a, b, d, z);
    const Complex gc = transfer_function(c, a, b, d, std::conj(z));
    EXPECT_NEAR(std::abs(gc - std::conj(g)), 0.0, 1e-10 * (1 + std::abs(g)));
    const Complex oracle = testing::resolvent(c, a, b, z) + d;
    EXPECT_NEAR(std::abs(g - oracle), 0.0, 1e-9 * (1 + std::abs(g)));
  }
}

GTEST_TEST(SpecanTest, TransferFunctionAtPoleThrows) {
  Eigen::Matrix2d a;
  a << 0, 1, -1, 0;
  EXPECT_THROW(transfer_function(Eigen::RowVector2d(1, 0), a, Eigen::Vector2d(0, 1), 0.0,
                                 Complex(0, 1)),
               SpectralError);
}

void expect_similarity(const Eigen::MatrixXd& s, const JordanData& jd) {
  const Eigen::MatrixXcd sc = s.cast<Complex>();
  EXPECT_LT((sc * jd.T - jd.T * jd.J).norm(), 1e-9 * (1 + s.norm()));
}

GTEST_TEST(SpecanTest, JordanNilpotentBlock) {
  Eigen::Matrix2d s;
  s << 0, 1, 0, 0;
  const JordanData jd = jordan_structure(s);
  ASSERT_EQ(jd.blocks.size(), 1u);
  EXPECT_EQ(jd.blocks[0].size, 2);
  EXPECT_EQ(jd.blocks[0].alpha, 0.0);
  EXPECT_NEAR(std::abs(jd.J(0, 1) - 1.0), 0.0, 1e-12);
  expect_similarity(s, jd);
}

GTEST_TEST(SpecanTest, JordanHarmonicWithBias) {
  const double alpha = 200 * 3.141592653589793;
  Eigen::Matrix3d s;
  s << 0, 0, 0, 0, 0, alpha, 0, -alpha, 0;
  const JordanData jd = jordan_structure(s);
  ASSERT_EQ(jd.blocks.size(), 3u);
  EXPECT_EQ(jd.blocks[0].alpha, 0.0);
  EXPECT_NEAR(jd.blocks[1].alpha, alpha, 1e-9 * alpha);
  EXPECT_NEAR(jd.blocks[2].alpha, -alpha, 1e-9 * alpha);
  EXPECT_EQ(jd.blocks[2].conjugate, 1);
  EXPECT_EQ(jd.blocks[1].conjugate, 2);
  expect_similarity(s, jd);
}

GTEST_TEST(SpecanTest, JordanRepeatedHarmonicPair) {
  // Two resonant pairs at +-i coupled into 2x2 Jordan blocks.
  Eigen::Matrix4d s;
  s << 0, 1, 1, 0, -1, 0, 0, 1, 0, 0, 0, 1, 0, 0, -1, 0;
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd q = random_orthogonal(4, rng);
  const Eigen::MatrixXd st = q * s * q.transpose();
  const JordanData jd = jordan_structure(st);
  ASSERT_EQ(jd.blocks.size(), 2u);
  EXPECT_EQ(jd.blocks[0].size, 2);
  EXPECT_NEAR(jd.blocks[0].alpha, 1.0, 1e-9);
  expect_similarity(st, jd);
}

GTEST_TEST(SpecanTest, JordanRejectsUnsupportedStructure) {
  EXPECT_THROW(jordan_structure(Eigen::MatrixXd::Zero(2, 2)), SpectralError);
  Eigen::Matrix2d off;
  off << -1, 0, 0, 0;
  EXPECT_THROW(jordan_structure(off), SpectralError);
}

GTEST_TEST(SpecanTest, CenterProjectorSeparatesImaginaryAxis) {
  Eigen::Matrix4d m;
  m << 0, 2, 0, 0, -2, 0, 0, 0, 0, 0, -1, 1, 0, 0, 0, -3;
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd q = random_matrix(4, rng) + 3 * Eigen::MatrixXd::Identity(4, 4);
  const Eigen::MatrixXd mt = q * m * q.inverse();
  const CenterProjector cp = center_projector(mt);
  ASSERT_EQ(cp.order(), 2);
  EXPECT_LT((cp.P * cp.P - cp.P).norm(), 1e-9);
  EXPECT_LT((cp.P * mt - mt * cp.P).norm(), 1e-8 * mt.norm());
  const Spectrum sp = eigen(cp.reduced);
  ASSERT_EQ(sp.size(), 2);
  for (const Complex& z : sp.raw) {
    EXPECT_NEAR(z.real(), 0.0, 1e-9);
    EXPECT_NEAR(std::fabs(z.imag()), 2.0, 1e-9);
  }
  // The basis spans an invariant subspace.
  const Eigen::MatrixXd mb = mt * cp.basis;
  EXPECT_LT((mb - cp.basis * cp.reduced).norm(), 1e-8 * mt.norm());
}

GTEST_TEST(SpecanTest, CenterProjectorOfCenterMatrixIsIdentity) {
  Eigen::Matrix2d m;
  m << 0, 1, -1, 0;
  const CenterProjector cp = center_projector(m);
  EXPECT_EQ(cp.order(), 2);
  EXPECT_TRUE(cp.P.isApprox(Eigen::Matrix2d::Identity(), 1e-12));
}

}  // namespace
}  // namespace regsyn
