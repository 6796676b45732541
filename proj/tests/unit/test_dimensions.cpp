#include <gtest/gtest.h>

#include <random>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "lurk/dimensions.hpp"
#include "lurk/errors.hpp"

using namespace lurk;
using namespace lurk::testing;

TEST(Rank, PipeAndTrivialMatrices) {
  EXPECT_EQ(rank(pipe_matrix()), 3);
  EXPECT_EQ(rank(mlt_matrix(RationalMatrix::Zero(3, 2), {"a", "b"})), 0);
  EXPECT_EQ(rank(mlt_matrix(rmat({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), {"m", "l", "t"})), 3);
  EXPECT_EQ(rank(DimMatrix(base_dimensions::mlt())), 0);
}

TEST(Nullspace, PipeMatrixSpansReynoldsAndRoughness) {
  const auto basis = nullspace_basis(pipe_matrix());
  ASSERT_EQ(basis.size(), 2u);
  // Reynolds number and relative roughness eps_P / d_P.
  const RationalMatrix expected = rmat({{1, 0}, {1, 0}, {1, -1}, {-1, 0}, {0, 1}});
  EXPECT_TRUE(same_span(as_columns(basis, 5), expected));
}

TEST(Nullspace, RoughnessOverVelocityIsNotDimensionless) {
  // eps_P / U_F keeps a time dimension; the roughness group is eps_P / d_P.
  const RationalVector eps_over_u = rvec({0, -1, 0, 0, 1});
  EXPECT_EQ(RationalVector(pipe_matrix().exponents() * eps_over_u), rvec({0, 0, 1}));
}

TEST(Nullspace, PipeWithoutRoughnessIsReynoldsNumber) {
  const DimMatrix d4 = pipe_matrix().select(std::vector<std::string>{"rho_F", "U_F", "d_P", "mu_F"});
  const auto basis = nullspace_basis(d4);
  ASSERT_EQ(basis.size(), 1u);
  EXPECT_TRUE(same_span(as_columns(basis, 4), rmat({{1}, {1}, {1}, {-1}})));
}

TEST(Nullspace, CanonicalChoiceIsDeterministic) {
  // Free variables in column order, set to one in turn.
  const auto basis = nullspace_basis(pipe_matrix());
  EXPECT_EQ(basis[0], rvec({-1, -1, -1, 1, 0}));
  EXPECT_EQ(basis[1], rvec({0, 0, -1, 0, 1}));
}

TEST(Nullspace, FullRankSquareIsEmpty) {
  EXPECT_TRUE(nullspace_basis(mlt_matrix(rmat({{1, 0, 0}, {0, 1, 0}, {1, 1, 1}}), {"a", "b", "c"})).empty());
}

TEST(Homogeneity, ReducedPipeMatrices) {
  const DimVector delta_p = mlt_vec({1, -1, -2});
  const auto failing = check_homogeneity(pipe_matrix().select(std::vector<std::string>{"d_P", "U_F"}), delta_p);
  EXPECT_FALSE(failing.homogeneous);
  ASSERT_EQ(failing.missing_dimensions.size(), 1u);
  EXPECT_EQ(failing.missing_dimensions[0], "M");

  const auto dynamic = check_homogeneity(pipe_matrix().select(std::vector<std::string>{"rho_F", "U_F"}), delta_p);
  EXPECT_TRUE(dynamic.homogeneous);
  EXPECT_TRUE(dynamic.missing_dimensions.empty());
}

TEST(Homogeneity, DimensionlessQoiIsAlwaysHomogeneous) {
  EXPECT_TRUE(check_homogeneity(pipe_matrix(), mlt_vec({0, 0, 0})).homogeneous);
  EXPECT_TRUE(check_homogeneity(DimMatrix(base_dimensions::mlt()), mlt_vec({0, 0, 0})).homogeneous);
}

TEST(Homogeneity, UnattributableFailureHasEmptyDiagnosis) {
  // Every row has a nonzero exposed entry, yet [1 1 1] is not reachable from a single L+T column.
  const auto d = mlt_matrix(rmat({{1}, {1}, {0}}), {"x"});
  const auto verdict = check_homogeneity(d, mlt_vec({1, 2, 0}));
  EXPECT_FALSE(verdict.homogeneous);
  EXPECT_TRUE(verdict.missing_dimensions.empty());
}

TEST(Homogeneity, BasisMismatchThrows) {
  const DimVector si(RationalVector::Zero(7), base_dimensions::si());
  EXPECT_THROW(check_homogeneity(pipe_matrix(), si), DimensionMismatch);
}

TEST(NondimVector, DynamicPressure) {
  const auto u = nondim_vector(pipe_matrix().select(std::vector<std::string>{"rho_F", "U_F"}), mlt_vec({1, -1, -2}));
  EXPECT_EQ(u, rvec({1, 2}));
}

TEST(NondimVector, DimensionlessQoiGivesZero) {
  EXPECT_EQ(nondim_vector(pipe_matrix(), mlt_vec({0, 0, 0})), RationalVector::Zero(5).eval());
}

TEST(NondimVector, FullPipeMatrixSatisfiesBothSystems) {
  const DimMatrix d = pipe_matrix();
  const DimVector dq = mlt_vec({1, -2, -2});
  const RationalVector u = nondim_vector(d, dq);
  // Frozen from an independent exact solve of the stacked system.
  EXPECT_EQ(u, rvec({Rational(2, 7), Rational(9, 7), Rational(-6, 7), Rational(5, 7), Rational(-6, 7)}));
  EXPECT_EQ((d.exponents() * u).eval(), dq.exponents);
  for (const auto& v : nullspace_basis(d)) EXPECT_TRUE(v.dot(u).is_zero());

  // Least-squares projection oracle: the minimum-norm solution is the orthogonal one.
  const Eigen::MatrixXd df = d.to_double();
  const Eigen::VectorXd ls = df.completeOrthogonalDecomposition().solve(to_double(dq.exponents));
  EXPECT_LT((ls - to_double(u)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(NondimVector, ReynoldsExposedSet) {
  const auto d4 = pipe_matrix().select(std::vector<std::string>{"rho_F", "U_F", "d_P", "mu_F"});
  EXPECT_EQ(nondim_vector(d4, mlt_vec({1, -2, -2})),
            rvec({Rational(1, 2), Rational(3, 2), Rational(-3, 2), Rational(1, 2)}));
}

TEST(NondimVector, NotHomogeneousThrows) {
  EXPECT_THROW(nondim_vector(pipe_matrix().select(std::vector<std::string>{"d_P", "U_F"}), mlt_vec({1, -1, -2})),
               NotHomogeneous);
}

TEST(NondimVector, IndependentOfNullspaceBasisChoice) {
  const DimMatrix d = pipe_matrix();
  const DimVector dq = mlt_vec({1, -2, -2});
  const RationalMatrix v = as_columns(nullspace_basis(d), 5);
  RationalMatrix mix(2, 2);
  mix << Rational(3), Rational(-1, 2), Rational(2), Rational(5);
  EXPECT_EQ(nondim_vector(d, dq, v * mix), nondim_vector(d, dq));
  EXPECT_THROW(nondim_vector(d, dq, RationalMatrix(v.col(0))), DimensionMismatch);
}

TEST(PinnedComplement, LengthPinAnnihilatesLength) {
  const auto w = pinned_complement(mlt_matrix(rmat({{0}, {1}, {0}}), {"H"}));
  ASSERT_EQ(w.rows(), 3);
  ASSERT_EQ(w.cols(), 2);
  EXPECT_LT((w.transpose() * w - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(w.row(1).cwiseAbs().maxCoeff(), 1e-12);
  // Span check against {e_M, e_T}.
  EXPECT_NEAR(std::abs((w * w.transpose())(0, 0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs((w * w.transpose())(2, 2)), 1.0, 1e-12);
}

TEST(PinnedComplement, EmptyPinIsIdentity) {
  const auto w = pinned_complement(DimMatrix(base_dimensions::mlt()));
  EXPECT_TRUE(w.isIdentity(0.0));
}

TEST(PinnedComplement, TwoColumnsLeaveTheCrossProduct) {
  const auto d = mlt_matrix(rmat({{1, 0}, {-1, 1}, {-1, 0}}), {"mu", "h"});
  const auto w = pinned_complement(d);
  ASSERT_EQ(w.cols(), 1);
  const Eigen::Vector3d a(1, -1, -1);
  const Eigen::Vector3d b(0, 1, 0);
  const Eigen::Vector3d cross = a.cross(b).normalized();
  EXPECT_NEAR(std::abs(cross.dot(w.col(0))), 1.0, 1e-12);
  EXPECT_LT((w.transpose() * d.to_double()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PinnedComplement, FullRankPinThrows) {
  EXPECT_THROW(pinned_complement(mlt_matrix(rmat({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), {"a", "b", "c"})),
               FullRankPinned);
}

TEST(PinnedComplement, DependentPinnedColumnsUseTheirRank) {
  const auto w = pinned_complement(mlt_matrix(rmat({{0, 0}, {1, 2}, {0, 0}}), {"h", "H"}));
  EXPECT_EQ(w.cols(), 2);
}

class RandomIntegerMatrices : public ::testing::Test {
protected:
  std::mt19937_64 gen{20240611};
  RationalMatrix draw(Eigen::Index rows, Eigen::Index cols) {
    std::uniform_int_distribution<int> dist(-3, 3);
    std::bernoulli_distribution sparse(0.3);
    RationalMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = sparse(gen) ? Rational(0) : Rational(dist(gen));
    return m;
  }
};

TEST_F(RandomIntegerMatrices, RankNullityAndExactNullVectors) {
  for (int trial = 0; trial < 300; ++trial) {
    const auto cols = static_cast<Eigen::Index>(1 + trial % 7);
    const DimMatrix d(draw(3, cols), base_dimensions::mlt(), std::vector<std::string>(static_cast<std::size_t>(cols), "v"));
    const auto basis = nullspace_basis(d);
    EXPECT_EQ(static_cast<Eigen::Index>(basis.size()), cols - rank(d));
    for (const auto& v : basis) EXPECT_TRUE((d.exponents() * v).isZero());
  }
}

TEST_F(RandomIntegerMatrices, HomogeneityAgreesWithFloatRankTest) {
  for (int trial = 0; trial < 300; ++trial) {
    const auto cols = static_cast<Eigen::Index>(1 + trial % 5);
    const DimMatrix d(draw(3, cols), base_dimensions::mlt(), std::vector<std::string>(static_cast<std::size_t>(cols), "v"));
    const DimVector dq(draw(3, 1).col(0), base_dimensions::mlt());
    Eigen::MatrixXd aug(3, cols + 1);
    aug << d.to_double(), to_double(dq.exponents);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu_aug(aug);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu_d(d.to_double());
    EXPECT_EQ(check_homogeneity(d, dq).homogeneous, lu_aug.rank() == lu_d.rank());
  }
}

TEST_F(RandomIntegerMatrices, NondimVectorIsOrthogonalSolution) {
  int solved = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto cols = static_cast<Eigen::Index>(2 + trial % 5);
    const DimMatrix d(draw(3, cols), base_dimensions::mlt(), std::vector<std::string>(static_cast<std::size_t>(cols), "v"));
    const DimVector dq(draw(3, 1).col(0), base_dimensions::mlt());
    if (!check_homogeneity(d, dq).homogeneous) {
      EXPECT_THROW(nondim_vector(d, dq), NotHomogeneous);
      continue;
    }
    const RationalVector u = nondim_vector(d, dq);
    EXPECT_EQ((d.exponents() * u).eval(), dq.exponents);
    for (const auto& v : nullspace_basis(d)) EXPECT_TRUE(v.dot(u).is_zero());
    ++solved;
  }
  EXPECT_GT(solved, 50);
}

TEST_F(RandomIntegerMatrices, PinnedComplementIsOrthonormalAnnihilator) {
  for (int trial = 0; trial < 200; ++trial) {
    const auto cols = static_cast<Eigen::Index>(1 + trial % 3);
    const DimMatrix d(draw(3, cols), base_dimensions::mlt(), std::vector<std::string>(static_cast<std::size_t>(cols), "v"));
    if (rank(d) == 3) continue;
    const auto w = pinned_complement(d);
    EXPECT_EQ(w.cols(), 3 - rank(d));
    EXPECT_LT((w.transpose() * w - Eigen::MatrixXd::Identity(w.cols(), w.cols())).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((w.transpose() * d.to_double()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(DimMatrix, SelectAndAppend) {
  DimMatrix d(base_dimensions::mlt());
  d.append("rho", mlt_vec({1, -3, 0}));
  d.append("U", mlt_vec({0, 1, -1}));
  EXPECT_EQ(d.vars(), 2);
  EXPECT_EQ(d.index_of("U"), 1);
  EXPECT_THROW((void)d.index_of("nope"), DimensionMismatch);
  EXPECT_EQ(d.select(std::vector<Eigen::Index>{1}).column(0).exponents, rvec({0, 1, -1}));
  EXPECT_EQ(base_dimensions::si().size(), 7u);
}
