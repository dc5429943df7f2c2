#include "kfield/observer.hpp"

#include <gtest/gtest.h>

#include <random>

#include "kfield/errors.hpp"
#include "kfield/linalg.hpp"
#include "test_util.hpp"

namespace kfield {
namespace {

ObserverConfig hand_config() {
  ObserverConfig c;
  c.model.A.resize(2, 2);
  c.model.A << 1, 0.1, 0, 0.9;
  c.model.Q = Eigen::Vector2d(0.01, 0.02).asDiagonal();
  c.measurement.resize(1, 2);
  c.measurement << 1, 0.5;
  c.measurement_noise = Eigen::MatrixXd::Constant(1, 1, 0.04);
  c.initial_estimate = Eigen::Vector2d(0.2, -0.1);
  c.initial_covariance.resize(2, 2);
  c.initial_covariance << 1, 0.1, 0.1, 0.5;
  return c;
}

TEST(ObserverStep, MatchesHandComputedKalmanStep) {
  const ObserverConfig c = hand_config();
  const ObserverState s0 = observer_init(c);
  const ObserverState s1 = observer_step(c, s0, Eigen::VectorXd::Constant(1, 0.7));
  EXPECT_EQ(s1.step, s0.step + 1);
  EXPECT_NEAR(s1.estimate(0), 0.6548717948717948, 1e-14);
  EXPECT_NEAR(s1.estimate(1), 0.05652421652421648, 1e-14);
  EXPECT_NEAR(s1.covariance(0, 0), 0.11153846153846161, 1e-14);
  EXPECT_NEAR(s1.covariance(0, 1), -0.15606837606837604, 1e-14);
  EXPECT_NEAR(s1.covariance(1, 0), -0.15606837606837604, 1e-14);
  EXPECT_NEAR(s1.covariance(1, 1), 0.33325735992402666, 1e-14);
}

TEST(ObserverStep, KnownInputShiftsPrior) {
  const ObserverConfig c = hand_config();
  const ObserverState s0 = observer_init(c);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(1, 0.7);
  const WeightVector u = Eigen::Vector2d(0.3, -0.2);
  // Shifting the prior by u is the same as starting from A^{-1} u further along.
  ObserverState shifted = s0;
  shifted.estimate += c.model.A.inverse() * u;
  const ObserverState a = observer_step(c, s0, y, u);
  const ObserverState b = observer_step(c, shifted, y);
  EXPECT_LT((a.estimate - b.estimate).norm(), 1e-14);
  EXPECT_LT((a.covariance - b.covariance).norm(), 1e-15);
  EXPECT_THROW(observer_step(c, s0, y, Eigen::VectorXd::Zero(3)), InputError);
}

TEST(ObserverUpdate, CorrectionOnlyLeavesPriorCovarianceShape) {
  const ObserverConfig c = hand_config();
  const ObserverState s = observer_update(c, observer_init(c), Eigen::VectorXd::Constant(1, 0.7));
  // Scalar measurement: P+ = P - P k k^T P / (k^T P k + r).
  const Eigen::MatrixXd p = c.initial_covariance;
  const Eigen::VectorXd kt = c.measurement.transpose();
  const double denom = kt.dot(p * kt) + 0.04;
  const Eigen::MatrixXd expected = p - (p * kt) * (p * kt).transpose() / denom;
  EXPECT_LT((s.covariance - expected).norm(), 1e-15);
  EXPECT_LE(s.covariance.trace(), p.trace());
}

TEST(ObserverStep, RejectsBadMeasurement) {
  const ObserverConfig c = hand_config();
  const ObserverState s0 = observer_init(c);
  EXPECT_THROW(observer_step(c, s0, Eigen::VectorXd::Zero(2)), InputError);
  EXPECT_THROW(observer_step(c, s0, Eigen::VectorXd::Constant(1, std::nan(""))), InputError);
}

TEST(ObserverConfig, Validation) {
  ObserverConfig c = hand_config();
  c.measurement_noise(0, 0) = 0.0;
  EXPECT_THROW(c.validate(), InputError);
  c = hand_config();
  c.initial_covariance(0, 0) = -1.0;
  EXPECT_THROW(c.validate(), InputError);
  c = hand_config();
  c.initial_estimate = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(c.validate(), InputError);
  EXPECT_THROW(make_observer_config(hand_config().model, Eigen::MatrixXd::Ones(1, 2), 0.0), InputError);
}

TEST(ObserverStep, CovarianceStaysSymmetricPsdOnRandomSystems) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 2 + trial % 6;
    LinearModel model{testing::similar_to_diagonal(testing::distinct_eigenvalues(m, rng, 0.3, 1.1), rng),
                      1e-3 * Eigen::MatrixXd::Identity(m, m)};
    const Eigen::MatrixXd k = testing::random_matrix(1 + trial % 3, m, rng);
    const ObserverConfig cfg = make_observer_config(model, k, 1e-4);
    ObserverState s = observer_init(cfg);
    for (int t = 0; t < 60; ++t) {
      s = observer_step(cfg, s, testing::random_matrix(k.rows(), 1, rng));
      EXPECT_EQ(s.covariance, s.covariance.transpose());
      EXPECT_GE(min_symmetric_eigenvalue(s.covariance), -1e-9);
    }
  }
}

TEST(ObserverStep, ConvergesOnObservableNoiseFreeSystem) {
  std::mt19937_64 rng(42);
  const int m = 6;
  const Eigen::MatrixXd a = testing::similar_to_diagonal(testing::distinct_eigenvalues(m, rng), rng);
  const Eigen::MatrixXd k = testing::random_matrix(1, m, rng);
  ASSERT_TRUE(is_observable(a, k, TimeIndexSet::consecutive(m)).full_rank);
  const ObserverConfig cfg = make_observer_config({a, Eigen::MatrixXd::Zero(m, m)}, k, 1e-10);
  ObserverState s = observer_init(cfg);
  Eigen::VectorXd w = testing::random_matrix(m, 1, rng);
  const double e0 = (w - s.estimate).norm();
  for (int t = 0; t < 40; ++t) {
    w = a * w;
    s = observer_step(cfg, s, k * w);
  }
  EXPECT_LT((w - s.estimate).norm(), 1e-6 * e0);
}

TEST(Predict, PropagatesMeanAndCovariance) {
  const ObserverConfig c = hand_config();
  const ObserverState s = observer_init(c);
  const FieldPrediction p0 = predict_field(s, c.model, 0);
  EXPECT_EQ(p0.weights, s.estimate);
  const FieldPrediction p2 = predict_field(s, c.model, 2);
  const Eigen::MatrixXd a = c.model.A;
  EXPECT_LT((p2.weights - a * a * s.estimate).norm(), 1e-15);
  const Eigen::MatrixXd p1 = a * s.covariance * a.transpose() + c.model.Q;
  EXPECT_LT((p2.covariance - (a * p1 * a.transpose() + c.model.Q)).norm(), 1e-14);
  EXPECT_THROW(predict_field(s, c.model, -1), InputError);

  const ObserverState pred = observer_predict(c.model, s);
  EXPECT_LT((pred.covariance - p1).norm(), 1e-15);
}

TEST(Predict, PointVarianceIsQuadraticForm) {
  const Dictionary dict(testing::points_1d({0.0, 1.0}), {KernelFamily::gaussian, 1.0, 1.0, 1});
  FieldPrediction fp{Eigen::Vector2d(1.0, 2.0), Eigen::Matrix2d::Identity()};
  const PointPrediction pp = predict_at(dict, fp, Point::Constant(1, 0.5));
  const double k = 0.8824969025845955;
  EXPECT_NEAR(pp.mean, 3.0 * k, 1e-15);
  EXPECT_NEAR(pp.variance, 2.0 * k * k, 1e-15);
}

}  // namespace
}  // namespace kfield
