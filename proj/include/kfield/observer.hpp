#pragma once

#include <Eigen/Dense>

#include "kfield/kernel.hpp"
#include "kfield/rkhs.hpp"
#include "kfield/sysid.hpp"

namespace kfield {

/// Kalman estimate of the weights at step k.
struct ObserverState {
  WeightVector estimate;
  Eigen::MatrixXd covariance;
  long step = 0;
};

struct ObserverConfig {
  LinearModel model;
  /// N x M measurement matrix, y_k = K w_k + zeta_k.
  Eigen::MatrixXd measurement;
  /// Covariance of zeta_k (N x N, positive definite).
  Eigen::MatrixXd measurement_noise;
  WeightVector initial_estimate;
  Eigen::MatrixXd initial_covariance;

  /// Throws InputError on inconsistent sizes, R not PD or P0 not PSD.
  void validate() const;
};

/// Defaults: R = r I, P0 = I, initial estimate 0.
ObserverConfig make_observer_config(const LinearModel& model, const Eigen::MatrixXd& measurement,
                                    double measurement_variance);

ObserverState observer_init(const ObserverConfig& config);

/// Predict with (A, Q), then correct with y. The covariance update is
/// (I - G K) P^- followed by symmetrization. Throws FilterError when the
/// innovation covariance is numerically singular.
ObserverState observer_step(const ObserverConfig& config, const ObserverState& state,
                            const Eigen::VectorXd& y);
/// Same, with a known input increment added to the prediction
/// (w^- = A w + input).
ObserverState observer_step(const ObserverConfig& config, const ObserverState& state,
                            const Eigen::VectorXd& y, const WeightVector& input);

/// Measurement correction only, without a time update.
ObserverState observer_update(const ObserverConfig& config, const ObserverState& prior,
                              const Eigen::VectorXd& y);

/// Predict-only step, for instants without measurements.
ObserverState observer_predict(const LinearModel& model, const ObserverState& state);

struct FieldPrediction {
  WeightVector weights;
  Eigen::MatrixXd covariance;
};

/// h-step propagation: A^h w and A^h P A^h^T + sum_{j<h} A^j Q A^j^T.
FieldPrediction predict_field(const ObserverState& state, const LinearModel& model, int horizon);

/// Mean and variance of the predicted field at x.
struct PointPrediction {
  double mean = 0.0;
  double variance = 0.0;
};
PointPrediction predict_at(const Dictionary& dict, const FieldPrediction& prediction, const Point& x);

}  // namespace kfield
