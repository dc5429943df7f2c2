#include "kfield/rkhs.hpp"

#include <cmath>
#include <limits>

#include "kfield/errors.hpp"

namespace kfield {

Dictionary::Dictionary(PointList centers, KernelSpec spec)
    : centers_(std::move(centers)), spec_(spec) {
  spec_.validate();
  if (centers_.empty()) throw InputError("dictionary needs at least one center");
  for (const auto& c : centers_) {
    if (c.size() != spec_.input_dim) throw InputError("dictionary center has wrong dimension");
    if (!c.allFinite()) throw InputError("dictionary center is not finite");
  }
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    for (std::size_t j = i + 1; j < centers_.size(); ++j) {
      if ((centers_[i] - centers_[j]).norm() == 0.0) {
        throw InputError("dictionary centers " + std::to_string(i) + " and " + std::to_string(j) +
                         " coincide");
      }
    }
  }
}

Eigen::MatrixXd Dictionary::gram() const { return kernel_matrix(spec_, centers_, centers_).entries; }

Eigen::MatrixXd Dictionary::design(const PointList& locations) const {
  return kernel_matrix(spec_, locations, centers_).entries;
}

void SampleSet::validate(int input_dim) const {
  if (locations.size() != values.size()) throw InputError("sample set: locations/values size mismatch");
  for (const auto& x : locations) {
    if (x.size() != input_dim) throw InputError("sample set: location has wrong dimension");
    if (!x.allFinite()) throw InputError("sample set: non-finite location");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw InputError("sample set: non-finite value");
  }
}

double evaluate_field(const Dictionary& dict, const WeightVector& w, const Point& x) {
  if (w.size() != dict.size()) {
    throw InputError("evaluate_field: weight length " + std::to_string(w.size()) +
                     " does not match dictionary size " + std::to_string(dict.size()));
  }
  double f = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    f += w(i) * eval_kernel(dict.spec(), dict.centers()[static_cast<std::size_t>(i)], x);
  }
  return f;
}

Eigen::VectorXd evaluate_field(const Dictionary& dict, const WeightVector& w, const PointList& xs) {
  if (w.size() != dict.size()) throw InputError("evaluate_field: weight length mismatch");
  if (xs.empty()) return {};
  return dict.design(xs) * w;
}

double default_ridge(const Eigen::MatrixXd& design) {
  if (design.cols() == 0) return 0.0;
  return 1e-8 * design.squaredNorm() / static_cast<double>(design.cols());
}

WeightVector infer_weights(const Dictionary& dict, const SampleSet& samples, double ridge) {
  if (samples.size() == 0) throw InputError("infer_weights: no samples");
  if (!(ridge >= 0.0)) throw InputError("infer_weights: ridge must be nonnegative");
  samples.validate(dict.spec().input_dim);
  const Eigen::MatrixXd k = dict.design(samples.locations);
  const Eigen::VectorXd y = samples.value_vector();
  if (ridge == 0.0) return k.completeOrthogonalDecomposition().solve(y);
  Eigen::MatrixXd normal = k.transpose() * k;
  normal.diagonal().array() += ridge;
  return normal.ldlt().solve(k.transpose() * y);
}

WeightVector infer_weights(const Dictionary& dict, const SampleSet& samples) {
  if (samples.size() == 0) throw InputError("infer_weights: no samples");
  return infer_weights(dict, samples, default_ridge(dict.design(samples.locations)));
}

double ald_residual(const KernelSpec& spec, const PointList& centers, const Point& x) {
  const double kxx = eval_kernel(spec, x, x);
  if (centers.empty()) return kxx;
  const Eigen::MatrixXd gram = kernel_matrix(spec, centers, centers).entries;
  const Eigen::VectorXd kcx = kernel_matrix(spec, centers, {x}).entries.col(0);
  return kxx - kcx.dot(gram.ldlt().solve(kcx));
}

Dictionary sparsify_dictionary(const PointList& candidates, const KernelSpec& spec,
                               std::size_t budget, double nu) {
  spec.validate();
  if (budget == 0) throw InputError("sparsify_dictionary: budget must be positive");
  if (candidates.empty()) throw InputError("sparsify_dictionary: no candidates");
  if (!(nu > 0.0)) throw InputError("sparsify_dictionary: nu must be positive");
  constexpr std::size_t kRefactorEvery = 64;

  PointList admitted;
  Eigen::MatrixXd gram_inv;
  for (const auto& x : candidates) {
    if (admitted.size() >= budget) break;
    if (x.size() != spec.input_dim) throw InputError("sparsify_dictionary: candidate dimension mismatch");
    const double kxx = eval_kernel(spec, x, x);
    if (admitted.empty()) {
      if (kxx > nu) {
        admitted.push_back(x);
        gram_inv = Eigen::MatrixXd::Constant(1, 1, 1.0 / kxx);
      }
      continue;
    }
    const auto n = static_cast<Eigen::Index>(admitted.size());
    Eigen::VectorXd kcx(n);
    for (Eigen::Index i = 0; i < n; ++i) kcx(i) = eval_kernel(spec, admitted[static_cast<std::size_t>(i)], x);
    const Eigen::VectorXd a = gram_inv * kcx;
    const double delta = kxx - kcx.dot(a);
    if (!(delta > nu)) continue;

    admitted.push_back(x);
    if (admitted.size() % kRefactorEvery == 0) {
      const Eigen::MatrixXd gram = kernel_matrix(spec, admitted, admitted).entries;
      gram_inv = gram.ldlt().solve(Eigen::MatrixXd::Identity(n + 1, n + 1));
      continue;
    }
    // Block inverse via the Schur complement delta.
    Eigen::MatrixXd next(n + 1, n + 1);
    next.topLeftCorner(n, n) = gram_inv + a * a.transpose() / delta;
    next.topRightCorner(n, 1) = -a / delta;
    next.bottomLeftCorner(1, n) = -a.transpose() / delta;
    next(n, n) = 1.0 / delta;
    gram_inv = std::move(next);
  }
  if (admitted.empty()) throw InputError("sparsify_dictionary: nu rejects every candidate");
  return Dictionary(std::move(admitted), spec);
}

BandwidthChoice select_bandwidth(const PointList& centers, const KernelSpec& base,
                                 std::span<const SampleSet> snapshots,
                                 std::span<const double> bandwidths) {
  if (bandwidths.empty()) throw InputError("select_bandwidth: empty bandwidth grid");
  if (snapshots.empty()) throw InputError("select_bandwidth: no snapshots");
  BandwidthChoice best{0.0, std::numeric_limits<double>::infinity()};
  for (double sigma : bandwidths) {
    KernelSpec spec = base;
    spec.bandwidth = sigma;
    const Dictionary dict(centers, spec);
    double worst = 0.0;
    for (const auto& snap : snapshots) {
      const WeightVector w = infer_weights(dict, snap);
      const Eigen::VectorXd fit = evaluate_field(dict, w, snap.locations);
      worst = std::max(worst, (fit - snap.value_vector()).cwiseAbs().maxCoeff());
    }
    if (worst < best.max_abs_error) best = {sigma, worst};
  }
  return best;
}

}  // namespace kfield
