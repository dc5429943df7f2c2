#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kfield/kernel.hpp"

namespace kfield {

/// Coordinates of a function in the span of a dictionary's kernel sections.
using WeightVector = Eigen::VectorXd;

/// Centers c_1..c_M and the kernel whose sections k(c_i, .) span the model
/// space. Immutable once built.
class Dictionary {
 public:
  /// Throws InputError on an empty center list, mismatched dimensions, or
  /// repeated centers.
  Dictionary(PointList centers, KernelSpec spec);

  const PointList& centers() const { return centers_; }
  const KernelSpec& spec() const { return spec_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(centers_.size()); }

  /// K_CC.
  Eigen::MatrixXd gram() const;
  /// N x M matrix k(x_i, c_j).
  Eigen::MatrixXd design(const PointList& locations) const;

 private:
  PointList centers_;
  KernelSpec spec_;
};

/// Pointwise samples of a field, optionally tagged with a time index.
struct SampleSet {
  PointList locations;
  std::vector<double> values;
  std::optional<long> time;

  std::size_t size() const { return values.size(); }
  Eigen::VectorXd value_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  }
  /// Throws InputError on size or dimension mismatch or non-finite values.
  void validate(int input_dim) const;
};

/// f(x) = sum_i w_i k(c_i, x).
double evaluate_field(const Dictionary& dict, const WeightVector& w, const Point& x);
Eigen::VectorXd evaluate_field(const Dictionary& dict, const WeightVector& w, const PointList& xs);

/// 1e-8 * trace(K^T K) / M for the design matrix K.
double default_ridge(const Eigen::MatrixXd& design);

/// Ridge-regularized least squares fit of the weights. With ridge == 0 the
/// minimum-norm least squares solution is returned.
WeightVector infer_weights(const Dictionary& dict, const SampleSet& samples, double ridge);
/// Same, with default_ridge() of the design matrix.
WeightVector infer_weights(const Dictionary& dict, const SampleSet& samples);

/// Streaming approximate-linear-dependence sparsification. A candidate is
/// admitted when its residual k(x,x) - k_Cx^T K_CC^{-1} k_Cx exceeds `nu`
/// and the dictionary holds fewer than `budget` centers. Admission order is
/// input order.
Dictionary sparsify_dictionary(const PointList& candidates, const KernelSpec& spec,
                               std::size_t budget, double nu);

/// Residual of x against the current centers; exposed for tests.
double ald_residual(const KernelSpec& spec, const PointList& centers, const Point& x);

struct BandwidthChoice {
  double bandwidth = 0.0;
  double max_abs_error = 0.0;
};

/// Grid search over `bandwidths`: fits every snapshot with the default ridge
/// and keeps the bandwidth with the smallest worst-case absolute residual.
BandwidthChoice select_bandwidth(const PointList& centers, const KernelSpec& base,
                                 std::span<const SampleSet> snapshots,
                                 std::span<const double> bandwidths);

}  // namespace kfield
