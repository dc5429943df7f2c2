#include "kfield/rkhs.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kfield/errors.hpp"
#include "test_util.hpp"

namespace kfield {
namespace {

using testing::points_1d;

const KernelSpec kUnitGaussian{KernelFamily::gaussian, 1.0, 1.0, 1};

TEST(Dictionary, RejectsDuplicatesAndEmpty) {
  EXPECT_THROW(Dictionary({}, kUnitGaussian), InputError);
  EXPECT_THROW(Dictionary(points_1d({0.1, 0.2, 0.1}), kUnitGaussian), InputError);
  EXPECT_THROW(Dictionary({Point::Zero(2)}, kUnitGaussian), InputError);
  EXPECT_EQ(Dictionary(points_1d({0.1, 0.2}), kUnitGaussian).size(), 2);
}

TEST(EvaluateField, ClosedForm) {
  const Dictionary dict(points_1d({-0.5, 0.5}), kUnitGaussian);
  const WeightVector w{{1.0, 2.0}};
  EXPECT_NEAR(evaluate_field(dict, w, Point::Zero(1)), 2.6474907077537866, 1e-15);
}

TEST(EvaluateField, LinearInWeights) {
  std::mt19937_64 rng(21);
  const Dictionary dict(testing::random_points_1d(7, rng), {KernelFamily::gaussian, 0.2, 1.0, 1});
  const auto xs = testing::random_points_1d(11, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const WeightVector a = Eigen::VectorXd::Random(7);
    const WeightVector b = Eigen::VectorXd::Random(7);
    const Eigen::VectorXd lhs = evaluate_field(dict, 2.0 * a - 0.5 * b, xs);
    const Eigen::VectorXd rhs = 2.0 * evaluate_field(dict, a, xs) - 0.5 * evaluate_field(dict, b, xs);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(InferWeights, RecoversExactWeightsWithoutRidge) {
  std::mt19937_64 rng(4);
  const Dictionary dict(points_1d({0.0, 0.25, 0.5, 0.75, 1.0}), {KernelFamily::gaussian, 0.2, 1.0, 1});
  for (int trial = 0; trial < 20; ++trial) {
    const WeightVector w = testing::random_matrix(5, 1, rng);
    SampleSet s;
    s.locations = testing::random_points_1d(30, rng);
    const Eigen::VectorXd v = evaluate_field(dict, w, s.locations);
    s.values.assign(v.data(), v.data() + v.size());
    EXPECT_LT((infer_weights(dict, s, 0.0) - w).norm(), 1e-8);
  }
}

TEST(InferWeights, UnderdeterminedGivesMinimumNorm) {
  const Dictionary dict(points_1d({0.0, 1.0}), kUnitGaussian);
  SampleSet s;
  s.locations = points_1d({0.5});
  s.values = {1.0};
  // Design row is (c, c) with c = exp(-0.125); the minimum-norm solution
  // splits the value evenly.
  const WeightVector w = infer_weights(dict, s, 0.0);
  const double c = 0.8824969025845955;
  EXPECT_NEAR(w(0), 1.0 / (2.0 * c), 1e-12);
  EXPECT_NEAR(w(1), 1.0 / (2.0 * c), 1e-12);
}

TEST(InferWeights, RidgeShrinksTowardZero) {
  const Dictionary dict(points_1d({0.0, 0.5, 1.0}), {KernelFamily::gaussian, 0.3, 1.0, 1});
  SampleSet s;
  s.locations = points_1d({0.1, 0.4, 0.6, 0.9});
  s.values = {1.0, -0.5, 0.3, 0.8};
  double previous = infer_weights(dict, s, 0.0).norm();
  for (double ridge : {1e-4, 1e-2, 1.0, 100.0}) {
    const double n = infer_weights(dict, s, ridge).norm();
    EXPECT_LE(n, previous + 1e-12);
    previous = n;
  }
}

TEST(InferWeights, DefaultRidgeIsScaleRelative) {
  Eigen::MatrixXd k(2, 2);
  k << 1, 0, 0, 1;
  EXPECT_DOUBLE_EQ(default_ridge(k), 1e-8);
  EXPECT_DOUBLE_EQ(default_ridge(10.0 * k), 1e-6);
}

TEST(InferWeights, ValidatesSamples) {
  const Dictionary dict(points_1d({0.0, 1.0}), kUnitGaussian);
  SampleSet s;
  s.locations = points_1d({0.5, 0.6});
  s.values = {1.0};
  EXPECT_THROW(infer_weights(dict, s), InputError);
  s.values = {1.0, std::nan("")};
  EXPECT_THROW(infer_weights(dict, s), InputError);
  s.locations.clear();
  s.values.clear();
  EXPECT_THROW(infer_weights(dict, s), InputError);
}

TEST(Sparsify, AldResidualClosedForm) {
  // 1 - k(0,1)^2 = 1 - exp(-1)
  EXPECT_NEAR(ald_residual(kUnitGaussian, points_1d({0.0}), Point::Constant(1, 1.0)), 0.6321205588285577, 1e-12);
  EXPECT_NEAR(ald_residual(kUnitGaussian, points_1d({0.0}), Point::Constant(1, 0.0)), 0.0, 1e-14);
  EXPECT_DOUBLE_EQ(ald_residual(kUnitGaussian, {}, Point::Constant(1, 0.3)), 1.0);
}

TEST(Sparsify, RespectsBudgetAndThreshold) {
  PointList candidates;
  for (int i = 0; i <= 200; ++i) candidates.push_back(Point::Constant(1, i / 200.0));
  const KernelSpec spec{KernelFamily::gaussian, 0.1, 1.0, 1};
  const Dictionary d = sparsify_dictionary(candidates, spec, 8, 1e-3);
  EXPECT_EQ(d.size(), 8);
  EXPECT_EQ(d.centers()[0](0), 0.0);  // first candidate is always admitted

  const Dictionary loose = sparsify_dictionary(candidates, spec, 1000, 1e-2);
  EXPECT_LT(loose.size(), 201);
  // Every center passed the test against the centers admitted before it.
  PointList prefix;
  for (const auto& c : loose.centers()) {
    EXPECT_GT(ald_residual(spec, prefix, c), 1e-2);
    prefix.push_back(c);
  }
}

TEST(Sparsify, DuplicatesAreNeverAdmitted) {
  const Dictionary d = sparsify_dictionary(points_1d({0.2, 0.2, 0.7, 0.7, 0.2}), kUnitGaussian, 10, 1e-6);
  EXPECT_EQ(d.size(), 2);
}

TEST(Sparsify, MatchesDirectResidualOnLongStream) {
  // Beyond the refactorization interval the incremental inverse must agree
  // with a fresh solve.
  std::mt19937_64 rng(8);
  const KernelSpec spec{KernelFamily::gaussian, 0.01, 1.0, 1};
  const auto candidates = testing::random_points_1d(400, rng);
  const Dictionary d = sparsify_dictionary(candidates, spec, 200, 1e-4);
  EXPECT_GT(d.size(), 64);
  PointList prefix;
  for (const auto& c : d.centers()) {
    EXPECT_GT(ald_residual(spec, prefix, c), 1e-4);
    prefix.push_back(c);
  }
}

TEST(SelectBandwidth, PicksGeneratingBandwidth) {
  const PointList centers = points_1d({0.0, 0.2, 0.4, 0.6, 0.8, 1.0});
  const KernelSpec truth{KernelFamily::gaussian, 0.15, 1.0, 1};
  const Dictionary dict(centers, truth);
  std::mt19937_64 rng(2);
  std::vector<SampleSet> snapshots;
  for (int i = 0; i < 3; ++i) {
    SampleSet s;
    s.locations = testing::random_points_1d(40, rng);
    const Eigen::VectorXd v = evaluate_field(dict, testing::random_matrix(6, 1, rng), s.locations);
    s.values.assign(v.data(), v.data() + v.size());
    snapshots.push_back(s);
  }
  const std::vector<double> grid{0.05, 0.1, 0.15, 0.3, 0.6};
  const auto choice = select_bandwidth(centers, truth, snapshots, grid);
  EXPECT_DOUBLE_EQ(choice.bandwidth, 0.15);
  EXPECT_LT(choice.max_abs_error, 1e-5);
}

}  // namespace
}  // namespace kfield
