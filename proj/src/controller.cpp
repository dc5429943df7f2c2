#include "kfield/controller.hpp"

#include "kfield/errors.hpp"
#include "kfield/linalg.hpp"

namespace kfield {

ActuatorSet::ActuatorSet(PointList locations, int input_dim) : locations_(std::move(locations)) {
  if (locations_.empty()) throw InputError("actuator set needs at least one location");
  for (std::size_t i = 0; i < locations_.size(); ++i) {
    if (locations_[i].size() != input_dim) throw InputError("actuator location has wrong dimension");
    for (std::size_t j = 0; j < i; ++j) {
      if ((locations_[i] - locations_[j]).norm() == 0.0) {
        throw InputError("actuator locations " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
      }
    }
  }
}

ControlOperator control_operator(const Dictionary& dict, const ActuatorSet& actuators) {
  return {kernel_matrix(dict.spec(), dict.centers(), actuators.locations()).entries};
}

Eigen::MatrixXd riccati_map(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q_cost,
                            const Eigen::MatrixXd& r_cost, const Eigen::MatrixXd& p) {
  const Eigen::MatrixXd bt_p = b.transpose() * p;
  const Eigen::MatrixXd s = r_cost + bt_p * b;
  const Eigen::MatrixXd at_p_b = a.transpose() * bt_p.transpose();
  return symmetrized(q_cost + a.transpose() * p * a - at_p_b * s.ldlt().solve(at_p_b.transpose()));
}

LqrSolution solve_lqr(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q_cost,
                      const Eigen::MatrixXd& r_cost, const LqrOptions& options) {
  const Eigen::Index m = a.rows();
  if (a.cols() != m || m == 0) throw InputError("solve_lqr: A must be square");
  if (b.rows() != m || b.cols() == 0) throw InputError("solve_lqr: B must be M x l with l >= 1");
  if (q_cost.rows() != m || q_cost.cols() != m) throw InputError("solve_lqr: Q cost must be M x M");
  if (r_cost.rows() != b.cols() || r_cost.cols() != b.cols()) throw InputError("solve_lqr: R cost must be l x l");
  if (min_symmetric_eigenvalue(q_cost) < -1e-10) throw InputError("solve_lqr: Q cost is not PSD");
  if (Eigen::LLT<Eigen::MatrixXd>(symmetrized(r_cost)).info() != Eigen::Success) {
    throw InputError("solve_lqr: R cost is not PD");
  }
  if (options.max_iter < 1 || !(options.tol > 0.0)) throw InputError("solve_lqr: bad iteration options");

  const TimeIndexSet times = options.times.empty() ? TimeIndexSet::consecutive(static_cast<int>(m))
                                                   : TimeIndexSet(options.times);
  const RankReport ctrb = is_controllable(a, b, times);
  if (!ctrb.full_rank) {
    throw SynthesisError("solve_lqr: (A, B) is not controllable, rank " + std::to_string(ctrb.rank) + " of " +
                             std::to_string(m) + " (deficit " + std::to_string(m - ctrb.rank) + ")",
                         static_cast<int>(m) - ctrb.rank);
  }

  LqrSolution sol;
  Eigen::MatrixXd p = symmetrized(q_cost);
  for (int it = 1; it <= options.max_iter; ++it) {
    Eigen::MatrixXd next = riccati_map(a, b, q_cost, r_cost, p);
    if (!next.allFinite()) throw SynthesisError("solve_lqr: Riccati iteration diverged");
    const double step = (next - p).norm();
    const bool done = step <= options.tol * p.norm();
    p = std::move(next);
    if (done) {
      sol.iterations = it;
      sol.riccati = p;
      const Eigen::MatrixXd bt_p = b.transpose() * p;
      sol.gain = (r_cost + bt_p * b).ldlt().solve(bt_p * a);
      return sol;
    }
  }
  throw SynthesisError("solve_lqr: Riccati iteration did not converge in " + std::to_string(options.max_iter) +
                       " iterations");
}

ControllerGains synthesize_tracking(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                    const Eigen::MatrixXd& q_cost, const Eigen::MatrixXd& r_cost,
                                    const WeightVector& reference, bool use_feedforward,
                                    const LqrOptions& options) {
  if (reference.size() != a.rows()) throw InputError("synthesize_tracking: reference has wrong length");
  LqrSolution lqr = solve_lqr(a, b, q_cost, r_cost, options);
  ControllerGains g;
  g.gain = std::move(lqr.gain);
  g.riccati = std::move(lqr.riccati);
  g.reference = reference;
  g.use_feedforward = use_feedforward;
  const Eigen::VectorXd drift = reference - a * reference;
  g.feedforward = use_feedforward ? Eigen::VectorXd(pinv(b) * drift) : Eigen::VectorXd::Zero(b.cols());
  g.feedforward_residual = (drift - b * g.feedforward).norm();
  return g;
}

Eigen::VectorXd tracking_command(const ControllerGains& gains, const WeightVector& estimate) {
  if (estimate.size() != gains.gain.cols()) throw InputError("tracking_command: estimate has wrong length");
  return -gains.gain * (estimate - gains.reference) + gains.feedforward;
}

std::function<double(const Point&)> apply_control_field(const Dictionary& dict, const ActuatorSet& actuators,
                                                        const Eigen::VectorXd& u) {
  if (u.size() != actuators.size()) {
    throw InputError("apply_control_field: command length " + std::to_string(u.size()) + " != l = " +
                     std::to_string(actuators.size()));
  }
  return [spec = dict.spec(), locations = actuators.locations(), u](const Point& x) {
    double v = 0.0;
    for (std::size_t j = 0; j < locations.size(); ++j) v += u(static_cast<Eigen::Index>(j)) * eval_kernel(spec, locations[j], x);
    return v;
  };
}

}  // namespace kfield
