#pragma once

#include <Eigen/Dense>

namespace kfield {

/// Result of an SVD-based rank computation.
struct RankInfo {
  int rank = 0;
  double sigma_max = 0.0;
  double threshold = 0.0;  // singular values >= threshold are counted
};

/// Default relative rank tolerance: n * machine epsilon * 64.
double default_rank_tol(Eigen::Index n);

/// Numerical rank: number of singular values >= rel_tol * sigma_max.
/// A zero matrix has rank 0.
RankInfo numerical_rank(const Eigen::MatrixXd& m, double rel_tol);
RankInfo numerical_rank(const Eigen::MatrixXcd& m, double rel_tol);

/// Moore-Penrose pseudoinverse, singular values below
/// default_rank_tol(max dim) * sigma_max are dropped.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& m);

double spectral_radius(const Eigen::MatrixXd& a);

/// Smallest eigenvalue of the symmetric part of `m`.
double min_symmetric_eigenvalue(const Eigen::MatrixXd& m);

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace kfield
