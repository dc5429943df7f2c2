#include "kfield/observer.hpp"

#include <cmath>
#include <limits>

#include "kfield/errors.hpp"
#include "kfield/linalg.hpp"

namespace kfield {

void ObserverConfig::validate() const {
  model.validate();
  const Eigen::Index m = model.dim();
  const Eigen::Index n = measurement.rows();
  if (measurement.cols() != m) throw InputError("observer: measurement matrix must have M columns");
  if (measurement_noise.rows() != n || measurement_noise.cols() != n) {
    throw InputError("observer: measurement noise must be N x N");
  }
  if (initial_estimate.size() != m) throw InputError("observer: initial estimate has wrong length");
  if (initial_covariance.rows() != m || initial_covariance.cols() != m) {
    throw InputError("observer: initial covariance must be M x M");
  }
  if (!measurement.allFinite() || !measurement_noise.allFinite() || !initial_estimate.allFinite() ||
      !initial_covariance.allFinite()) {
    throw InputError("observer: non-finite configuration entries");
  }
  if (n > 0) {
    if ((measurement_noise - measurement_noise.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * measurement_noise.cwiseAbs().maxCoeff()) {
      throw InputError("observer: measurement noise covariance is not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(measurement_noise);
    if (llt.info() != Eigen::Success) throw InputError("observer: measurement noise covariance is not PD");
  }
  if (min_symmetric_eigenvalue(initial_covariance) < -1e-9) {
    throw InputError("observer: initial covariance is not PSD");
  }
}

ObserverConfig make_observer_config(const LinearModel& model, const Eigen::MatrixXd& measurement,
                                    double measurement_variance) {
  const Eigen::Index m = model.dim();
  const Eigen::Index n = measurement.rows();
  if (!(measurement_variance > 0.0)) throw InputError("observer: measurement variance must be positive");
  return {model, measurement, measurement_variance * Eigen::MatrixXd::Identity(n, n),
          WeightVector::Zero(m), Eigen::MatrixXd::Identity(m, m)};
}

ObserverState observer_init(const ObserverConfig& config) {
  config.validate();
  return {config.initial_estimate, config.initial_covariance, 0};
}

ObserverState observer_predict(const LinearModel& model, const ObserverState& state) {
  const auto& a = model.A;
  return {a * state.estimate, symmetrized(a * state.covariance * a.transpose() + model.Q), state.step + 1};
}

ObserverState observer_step(const ObserverConfig& config, const ObserverState& state,
                            const Eigen::VectorXd& y) {
  return observer_update(config, observer_predict(config.model, state), y);
}

ObserverState observer_step(const ObserverConfig& config, const ObserverState& state,
                            const Eigen::VectorXd& y, const WeightVector& input) {
  if (input.size() != config.model.dim()) throw InputError("observer_step: input increment has wrong length");
  ObserverState prior = observer_predict(config.model, state);
  prior.estimate += input;
  return observer_update(config, prior, y);
}

ObserverState observer_update(const ObserverConfig& config, const ObserverState& prior,
                              const Eigen::VectorXd& y) {
  const auto& k = config.measurement;
  if (y.size() != k.rows()) {
    throw InputError("observer_step: measurement length " + std::to_string(y.size()) + " != N = " +
                     std::to_string(k.rows()));
  }
  if (!y.allFinite()) throw InputError("observer_step: non-finite measurement");
  if (prior.estimate.size() != config.model.dim()) throw InputError("observer_step: state has wrong size");
  if (k.rows() == 0) return prior;

  const Eigen::MatrixXd pkt = prior.covariance * k.transpose();
  const Eigen::MatrixXd innovation_cov = symmetrized(k * pkt + config.measurement_noise);
  Eigen::LLT<Eigen::MatrixXd> llt(innovation_cov);
  const double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
  if (llt.info() != Eigen::Success || rcond < std::numeric_limits<double>::epsilon()) {
    throw FilterError("observer_step: innovation covariance is numerically singular (rcond " +
                          std::to_string(rcond) + ")",
                      rcond);
  }
  // G = P^- K^T S^{-1}
  const Eigen::MatrixXd gain = llt.solve(pkt.transpose()).transpose();
  const Eigen::Index m = config.model.dim();
  ObserverState post;
  post.estimate = prior.estimate + gain * (y - k * prior.estimate);
  post.covariance = symmetrized((Eigen::MatrixXd::Identity(m, m) - gain * k) * prior.covariance);
  post.step = prior.step;
  return post;
}

FieldPrediction predict_field(const ObserverState& state, const LinearModel& model, int horizon) {
  if (horizon < 0) throw InputError("predict_field: horizon must be nonnegative");
  if (state.estimate.size() != model.dim()) throw InputError("predict_field: state/model size mismatch");
  FieldPrediction out{state.estimate, state.covariance};
  for (int h = 0; h < horizon; ++h) {
    out.weights = model.A * out.weights;
    out.covariance = symmetrized(model.A * out.covariance * model.A.transpose() + model.Q);
  }
  return out;
}

PointPrediction predict_at(const Dictionary& dict, const FieldPrediction& prediction, const Point& x) {
  const Eigen::VectorXd kx = dict.design({x}).row(0).transpose();
  return {kx.dot(prediction.weights), kx.dot(prediction.covariance * kx)};
}

}  // namespace kfield
