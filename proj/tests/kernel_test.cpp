#include "kfield/kernel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kfield/errors.hpp"
#include "test_util.hpp"

namespace kfield {
namespace {

using testing::points_1d;

KernelSpec gaussian(double sigma) { return {KernelFamily::gaussian, sigma, 1.0, 1}; }

TEST(EvalKernel, GaussianSelfSimilarityIsOne) {
  EXPECT_DOUBLE_EQ(eval_kernel(gaussian(1.0), Point::Constant(1, 0.3), Point::Constant(1, 0.3)), 1.0);
}

TEST(EvalKernel, GaussianClosedForm) {
  // exp(-0.5)
  EXPECT_NEAR(eval_kernel(gaussian(1.0), Point::Constant(1, 0.0), Point::Constant(1, 1.0)), 0.6065306597126334,
              1e-15);
}

TEST(EvalKernel, AllFamiliesSymmetricAndNormalized) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (auto family : {KernelFamily::gaussian, KernelFamily::laplacian, KernelFamily::periodic,
                      KernelFamily::locally_periodic}) {
    const KernelSpec spec{family, 0.7, 1.3, 2};
    for (int i = 0; i < 100; ++i) {
      Point x(2), y(2);
      x << u(rng), u(rng);
      y << u(rng), u(rng);
      EXPECT_EQ(eval_kernel(spec, x, y), eval_kernel(spec, y, x));
      EXPECT_DOUBLE_EQ(eval_kernel(spec, x, x), 1.0);
    }
  }
}

TEST(EvalKernel, FamilyFormulas) {
  const Point x = Point::Constant(1, 0.0);
  const Point y = Point::Constant(1, 0.25);
  EXPECT_NEAR(eval_kernel({KernelFamily::laplacian, 0.5, 1.0, 1}, x, y), std::exp(-0.5), 1e-15);
  // sin(pi * 0.25 / 1) = sqrt(2)/2, so 2 sin^2 = 1.
  EXPECT_NEAR(eval_kernel({KernelFamily::periodic, 2.0, 1.0, 1}, x, y), std::exp(-0.25), 1e-15);
  EXPECT_NEAR(eval_kernel({KernelFamily::locally_periodic, 2.0, 1.0, 1}, x, y),
              std::exp(-0.25) * std::exp(-0.0625 / 8.0), 1e-15);
  // Periodic kernels repeat with the period.
  EXPECT_NEAR(eval_kernel({KernelFamily::periodic, 0.4, 0.5, 1}, x, Point::Constant(1, 1.5)), 1.0, 1e-12);
}

TEST(EvalKernel, DimensionMismatchThrows) {
  EXPECT_THROW(eval_kernel(gaussian(1.0), Point::Constant(2, 0.0), Point::Constant(1, 0.0)), InputError);
}

TEST(KernelSpec, Validation) {
  EXPECT_THROW((KernelSpec{KernelFamily::gaussian, 0.0, 1.0, 1}.validate()), InputError);
  EXPECT_THROW((KernelSpec{KernelFamily::periodic, 1.0, -1.0, 1}.validate()), InputError);
  EXPECT_NO_THROW((KernelSpec{KernelFamily::gaussian, 1.0, -1.0, 1}.validate()));
  EXPECT_THROW((KernelSpec{KernelFamily::gaussian, 1.0, 1.0, 0}.validate()), InputError);
  EXPECT_EQ(parse_kernel_family("locally_periodic"), KernelFamily::locally_periodic);
  EXPECT_THROW(parse_kernel_family("matern"), InputError);
}

TEST(KernelMatrix, SinglePoint) {
  const auto km = kernel_matrix(gaussian(1.0), points_1d({0.0}), points_1d({0.0}));
  ASSERT_EQ(km.rows(), 1);
  ASSERT_EQ(km.cols(), 1);
  EXPECT_DOUBLE_EQ(km.entries(0, 0), 1.0);
}

TEST(KernelMatrix, RowClosedForm) {
  const auto km = kernel_matrix(gaussian(1.0), points_1d({0.0, 1.0}), points_1d({0.0, 0.5, 1.0}));
  EXPECT_DOUBLE_EQ(km.entries(0, 0), 1.0);
  EXPECT_NEAR(km.entries(0, 1), 0.8824969025845955, 1e-15);
  EXPECT_NEAR(km.entries(0, 2), 0.6065306597126334, 1e-15);
  EXPECT_EQ(km.rows_from.size(), 2u);
  EXPECT_EQ(km.cols_from.size(), 3u);
}

TEST(KernelMatrix, GramIsSymmetricPositiveDefinite) {
  const auto pts = points_1d({0.0, 0.3, 0.45, 0.8, 1.0});
  const Eigen::MatrixXd g = kernel_matrix(gaussian(0.3), pts, pts).entries;
  EXPECT_EQ(g, g.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(KernelMatrix, GramPsdForEveryFamily) {
  std::mt19937_64 rng(11);
  for (auto family : {KernelFamily::gaussian, KernelFamily::laplacian, KernelFamily::periodic,
                      KernelFamily::locally_periodic}) {
    const KernelSpec spec{family, 0.4, 0.9, 1};
    const auto pts = testing::random_points_1d(12, rng);
    const Eigen::MatrixXd g = kernel_matrix(spec, pts, pts).entries;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10) << to_string(family);
  }
}

TEST(KernelMatrix, GaussianEntriesStrictlyPositiveSoEveryRowIsShaded) {
  std::mt19937_64 rng(3);
  const auto xs = testing::random_points_1d(6, rng);
  const auto cs = testing::random_points_1d(9, rng);
  const Eigen::MatrixXd k = kernel_matrix(gaussian(0.2), xs, cs).entries;
  EXPECT_TRUE((k.array() > 0.0).all());
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    const Eigen::MatrixXd row = k.row(i);
    EXPECT_TRUE(is_shaded(row, default_shade_tol(row)).shaded);
  }
}

TEST(KernelMatrix, EmptyInputThrows) {
  EXPECT_THROW(kernel_matrix(gaussian(1.0), {}, points_1d({0.0})), InputError);
  EXPECT_THROW(kernel_matrix(gaussian(1.0), points_1d({0.0}), {}), InputError);
}

TEST(IsShaded, AllNonzeroRow) {
  Eigen::MatrixXd k(1, 3);
  k << 0.2, 0.5, 0.9;
  const auto r = is_shaded(k, 1e-8);
  EXPECT_TRUE(r.shaded);
  EXPECT_TRUE(r.row_sum_nonzero);
  EXPECT_EQ(r.covered_columns, (std::vector<int>{0, 1, 2}));
}

TEST(IsShaded, ZeroColumnIsUncovered) {
  Eigen::MatrixXd k(2, 3);
  k << 1, 2, 0, 3, 0, 0;
  const auto r = is_shaded(k, 1e-8);
  EXPECT_FALSE(r.shaded);
  EXPECT_EQ(r.covered_columns, (std::vector<int>{0, 1}));
}

TEST(IsShaded, CancellingRowsAreShadedWithZeroSums) {
  Eigen::MatrixXd k(2, 3);
  k << 1, -1, 0.3, -1, 1, 0.3;
  const auto r = is_shaded(k, 1e-8);
  EXPECT_TRUE(r.shaded);
  EXPECT_FALSE(r.row_sum_nonzero);
}

TEST(IsShaded, ToleranceDecidesNearZeroEntries) {
  Eigen::MatrixXd k(1, 2);
  k << 1.0, 1e-13;
  EXPECT_FALSE(is_shaded(k, default_shade_tol(k)).shaded);
  EXPECT_TRUE(is_shaded(k, 1e-14).shaded);
  EXPECT_THROW(is_shaded(k, 0.0), InputError);
}

TEST(IsLShaded, GaussianTwoSensorsFourCenters) {
  const auto xs = points_1d({0.2, 0.7});
  const auto cs = points_1d({0.0, 0.33, 0.66, 1.0});
  const Eigen::MatrixXd k = kernel_matrix(gaussian(0.4), xs, cs).entries;
  // Oracle: every 2x2 minor is nonzero.
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      EXPECT_GT(std::abs(k(0, a) * k(1, b) - k(0, b) * k(1, a)), 1e-6);
    }
  }
  const auto r = is_l_shaded(k, 2, default_shade_tol(k));
  EXPECT_TRUE(r.l_shaded);
  EXPECT_TRUE(r.exhaustive);
  EXPECT_EQ(r.subsets_checked, 6u);
  ASSERT_EQ(r.blocks.size(), 2u);
}

TEST(IsLShaded, DuplicatedColumnsAreDependent) {
  Eigen::MatrixXd k(2, 3);
  k << 1, 1, 0.5, 2, 2, 0.1;
  EXPECT_FALSE(is_l_shaded(k, 2, 1e-12).l_shaded);
}

TEST(IsLShaded, LEqualsOneMatchesShadedWithoutZeroColumns) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd k = testing::random_matrix(3, 5, rng);
    std::bernoulli_distribution zero(0.3);
    for (Eigen::Index i = 0; i < k.size(); ++i) {
      if (zero(rng)) k.data()[i] = 0.0;
    }
    EXPECT_EQ(is_l_shaded(k, 1, 1e-12).l_shaded, is_shaded(k, 1e-12).shaded);
  }
}

TEST(IsLShaded, NeedsDisjointShadedBlocks) {
  // Rows cover {0,1}, {2}, {0,1,2}: two disjoint shaded blocks exist only as
  // {row0 + row1} and {row2}.
  Eigen::MatrixXd k(3, 3);
  k << 1, 0.5, 0, 0, 0, 1, 0.3, 0.7, 0.2;
  const auto r = is_l_shaded(k, 2, 1e-12);
  EXPECT_TRUE(r.blocks_found);
  // Two blocks of one row each cannot both cover column 2 and columns 0-1.
  Eigen::MatrixXd partial(2, 3);
  partial << 1, 0.5, 0, 0.3, 0.7, 0.2;
  EXPECT_FALSE(is_l_shaded(partial, 2, 1e-12).blocks_found);
}

TEST(IsLShaded, MonotoneUnderRepartition) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto xs = testing::random_points_1d(4, rng);
    const auto cs = testing::random_points_1d(6, rng);
    const Eigen::MatrixXd k = kernel_matrix(gaussian(0.5), xs, cs).entries;
    const double tol = default_shade_tol(k);
    for (int l = 4; l >= 2; --l) {
      const auto r = is_l_shaded(k, l, tol);
      if (!r.l_shaded) continue;
      // Merge the last two blocks: still a valid partition into l - 1 blocks.
      auto blocks = r.blocks;
      blocks[blocks.size() - 2].insert(blocks[blocks.size() - 2].end(), blocks.back().begin(), blocks.back().end());
      blocks.pop_back();
      for (const auto& b : blocks) {
        Eigen::MatrixXd sub(static_cast<Eigen::Index>(b.size()), k.cols());
        for (std::size_t i = 0; i < b.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = k.row(b[i]);
        EXPECT_TRUE(is_shaded(sub, tol).shaded);
      }
      EXPECT_TRUE(is_l_shaded(k, l - 1, tol).l_shaded);
    }
  }
}

TEST(IsLShaded, SamplesWhenSubsetsExceedCap) {
  std::mt19937_64 rng(13);
  const auto cs = testing::random_points_1d(30, rng);
  const auto xs = testing::random_points_1d(6, rng);
  const Eigen::MatrixXd k = kernel_matrix(gaussian(0.3), xs, cs).entries;
  const auto r = is_l_shaded(k, 6, default_shade_tol(k));  // C(30, 6) = 593775
  EXPECT_FALSE(r.exhaustive);
  EXPECT_LE(r.subsets_checked, kMaxColumnSubsets);
}

TEST(IsLShaded, RejectsLLargerThanRows) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Ones(1, 3);
  EXPECT_THROW(is_l_shaded(k, 2, 1e-12), InputError);
}

}  // namespace
}  // namespace kfield
