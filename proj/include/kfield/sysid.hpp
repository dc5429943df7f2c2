#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kfield/kernel.hpp"
#include "kfield/rkhs.hpp"

namespace kfield {

/// Weight-space transition w_{k+1} = A w_k + eta_k with Cov(eta_k) = Q.
struct LinearModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd Q;

  Eigen::Index dim() const { return A.rows(); }
  /// Throws InputError unless A is square and finite and Q is symmetric PSD
  /// of the same size.
  void validate() const;
};

/// Least-squares transition fit from a weight trajectory (one column per
/// time step): A = W_next * pinv(W_prev). Q is the unbiased sample
/// covariance of the one-step residuals (zero when only one residual).
LinearModel learn_transition(const Eigen::MatrixXd& trajectory);

/// Pools the one-step pairs of several trajectories into a single fit.
LinearModel learn_transition(std::span<const Eigen::MatrixXd> episodes);

/// Strictly increasing set of nonnegative time instants.
class TimeIndexSet {
 public:
  explicit TimeIndexSet(std::vector<int> times);
  /// {0, 1, ..., count - 1}
  static TimeIndexSet consecutive(int count);

  const std::vector<int>& values() const { return times_; }
  std::size_t size() const { return times_.size(); }

 private:
  std::vector<int> times_;
};

struct EigenCluster {
  std::complex<double> centroid;
  int algebraic_multiplicity = 0;
  int geometric_multiplicity = 0;
};

struct SpectralSummary {
  std::vector<std::complex<double>> eigenvalues;
  std::vector<EigenCluster> clusters;
  int cyclic_index = 0;
  bool full_rank_distinct = false;
};

/// 1e-6 * ||A||_2, floored at a tiny positive value for A == 0.
double default_cluster_tol(const Eigen::MatrixXd& a);

/// Eigenvalues grouped by single-linkage within cluster_tol. The geometric
/// multiplicity of a cluster is M - rank(A - centroid * I), counting
/// singular values above max(cluster_tol, rank_tol * sigma_max) as nonzero.
SpectralSummary spectral_summary(const Eigen::MatrixXd& a, double cluster_tol);
SpectralSummary spectral_summary(const Eigen::MatrixXd& a);

/// Rank certificate for an observability or controllability test.
struct RankReport {
  bool full_rank = false;
  int rank = 0;
  int required = 0;
  double sigma_max = 0.0;
};

/// Vertical stack of K_{t_i} A^{t_i}.
Eigen::MatrixXd observability_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& k,
                                     const TimeIndexSet& times);
/// Per-instant measurement matrices, one per entry of `times`.
Eigen::MatrixXd observability_matrix(const Eigen::MatrixXd& a, std::span<const Eigen::MatrixXd> ks,
                                     const TimeIndexSet& times);

RankReport is_observable(const Eigen::MatrixXd& a, const Eigen::MatrixXd& k,
                         const TimeIndexSet& times, double rank_tol);
RankReport is_observable(const Eigen::MatrixXd& a, const Eigen::MatrixXd& k,
                         const TimeIndexSet& times);

/// Horizontal stack of A^{t_i} K_D.
Eigen::MatrixXd controllability_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& kd,
                                       const TimeIndexSet& times);

RankReport is_controllable(const Eigen::MatrixXd& a, const Eigen::MatrixXd& kd,
                           const TimeIndexSet& times, double rank_tol);
RankReport is_controllable(const Eigen::MatrixXd& a, const Eigen::MatrixXd& kd,
                           const TimeIndexSet& times);

enum class PlacementMode { sensing, actuation };

struct PlacementResult {
  PointList locations;
  int count = 0;
  int cyclic_index = 0;
  int draws = 0;
  RankReport certificate;
};

struct PlacementOptions {
  PlacementMode mode = PlacementMode::sensing;
  int max_tries = 200;
  std::uint64_t seed = 0;
  /// Empty means {0, ..., M - 1}.
  std::vector<int> times;
};

/// Randomized search for sensing or actuation locations. Draw sizes start at
/// the cyclic index l of A and grow by one after max_tries failed draws. A
/// draw is accepted when its kernel matrix is l-shaded and the observability
/// (sensing) or controllability (actuation) rank is full. Throws
/// PlacementError carrying the best rank seen when every size fails.
PlacementResult propose_placement(const Dictionary& dict, const Eigen::MatrixXd& a,
                                  const PointList& candidates, const PlacementOptions& options);

}  // namespace kfield
