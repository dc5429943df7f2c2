#pragma once

#include <functional>

#include <Eigen/Dense>

#include "kfield/kernel.hpp"
#include "kfield/rkhs.hpp"
#include "kfield/sysid.hpp"

namespace kfield {

/// Actuation locations d_1..d_l; pairwise distinct, at least one.
class ActuatorSet {
 public:
  ActuatorSet(PointList locations, int input_dim);
  const PointList& locations() const { return locations_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(locations_.size()); }

 private:
  PointList locations_;
};

/// B = K_CD with B(i, j) = k(d_j, c_i).
struct ControlOperator {
  Eigen::MatrixXd B;
};

ControlOperator control_operator(const Dictionary& dict, const ActuatorSet& actuators);

struct LqrOptions {
  int max_iter = 100000;
  double tol = 1e-12;
  /// Empty means {0, ..., M - 1} for the controllability precondition.
  std::vector<int> times;
};

struct LqrSolution {
  Eigen::MatrixXd gain;      // l x M
  Eigen::MatrixXd riccati;   // M x M
  int iterations = 0;
};

/// Discrete Riccati value iteration started from P_0 = Q. Stops when
/// ||P_{j+1} - P_j||_F <= tol ||P_j||_F. Throws SynthesisError if (A, B)
/// is not controllable or the iteration does not converge in max_iter.
LqrSolution solve_lqr(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q_cost,
                      const Eigen::MatrixXd& r_cost, const LqrOptions& options = {});

/// One application of the Riccati map; exposed so callers can check the
/// fixed point.
Eigen::MatrixXd riccati_map(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q_cost,
                            const Eigen::MatrixXd& r_cost, const Eigen::MatrixXd& p);

struct ControllerGains {
  Eigen::MatrixXd gain;
  Eigen::VectorXd feedforward;
  Eigen::MatrixXd riccati;
  WeightVector reference;
  /// ||(I - A) w_ref - B u_ss||.
  double feedforward_residual = 0.0;
  bool use_feedforward = true;
};

/// LQR gains plus the steady-state input u_ss = pinv(B) (I - A) w_ref. With
/// use_feedforward false, u_ss is zero and the residual is ||(I - A) w_ref||.
ControllerGains synthesize_tracking(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                    const Eigen::MatrixXd& q_cost, const Eigen::MatrixXd& r_cost,
                                    const WeightVector& reference, bool use_feedforward = true,
                                    const LqrOptions& options = {});

/// u = -G (w_hat - w_ref) + u_ss.
Eigen::VectorXd tracking_command(const ControllerGains& gains, const WeightVector& estimate);

/// delta(x) = sum_j u_j k(d_j, x).
std::function<double(const Point&)> apply_control_field(const Dictionary& dict, const ActuatorSet& actuators,
                                                        const Eigen::VectorXd& u);

}  // namespace kfield
