#include "kfield/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "kfield/errors.hpp"
#include "kfield/linalg.hpp"

namespace kfield {

void LinearModel::validate() const {
  if (A.rows() != A.cols() || A.rows() == 0) throw InputError("linear model: A must be square and nonempty");
  if (Q.rows() != A.rows() || Q.cols() != A.cols()) throw InputError("linear model: Q size must match A");
  if (!A.allFinite() || !Q.allFinite()) throw InputError("linear model: non-finite entries");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff())) {
    throw InputError("linear model: Q is not symmetric");
  }
  if (min_symmetric_eigenvalue(Q) < -1e-10) throw InputError("linear model: Q is not PSD");
}

namespace {

LinearModel fit_pairs(const Eigen::MatrixXd& prev, const Eigen::MatrixXd& next) {
  LinearModel model;
  model.A = next * pinv(prev);
  const Eigen::MatrixXd resid = next - model.A * prev;
  const Eigen::Index n = resid.cols();
  const Eigen::Index m = resid.rows();
  if (n < 2) {
    model.Q = Eigen::MatrixXd::Zero(m, m);
    return model;
  }
  const Eigen::MatrixXd centered = resid.colwise() - resid.rowwise().mean();
  model.Q = symmetrized(centered * centered.transpose() / static_cast<double>(n - 1));
  return model;
}

}  // namespace

LinearModel learn_transition(const Eigen::MatrixXd& trajectory) {
  const Eigen::Index t = trajectory.cols();
  if (t < 2) throw InputError("learn_transition: need at least 2 time steps, got " + std::to_string(t));
  if (!trajectory.allFinite()) throw InputError("learn_transition: non-finite weights");
  return fit_pairs(trajectory.leftCols(t - 1), trajectory.rightCols(t - 1));
}

LinearModel learn_transition(std::span<const Eigen::MatrixXd> episodes) {
  if (episodes.empty()) throw InputError("learn_transition: no episodes");
  const Eigen::Index m = episodes.front().rows();
  Eigen::Index pairs = 0;
  for (const auto& e : episodes) {
    if (e.rows() != m) throw InputError("learn_transition: episodes differ in weight dimension");
    if (!e.allFinite()) throw InputError("learn_transition: non-finite weights");
    pairs += std::max<Eigen::Index>(e.cols() - 1, 0);
  }
  if (pairs < 1) throw InputError("learn_transition: need at least 2 time steps in some episode");
  Eigen::MatrixXd prev(m, pairs), next(m, pairs);
  Eigen::Index at = 0;
  for (const auto& e : episodes) {
    const Eigen::Index n = e.cols() - 1;
    if (n < 1) continue;
    prev.middleCols(at, n) = e.leftCols(n);
    next.middleCols(at, n) = e.rightCols(n);
    at += n;
  }
  return fit_pairs(prev, next);
}

TimeIndexSet::TimeIndexSet(std::vector<int> times) : times_(std::move(times)) {
  if (times_.empty()) throw InputError("time index set must be nonempty");
  if (times_.front() < 0) throw InputError("time index set: negative instant");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (times_[i] <= times_[i - 1]) throw InputError("time index set must be strictly increasing");
  }
}

TimeIndexSet TimeIndexSet::consecutive(int count) {
  if (count < 1) throw InputError("time index set must be nonempty");
  std::vector<int> t(static_cast<std::size_t>(count));
  std::iota(t.begin(), t.end(), 0);
  return TimeIndexSet(std::move(t));
}

double default_cluster_tol(const Eigen::MatrixXd& a) {
  const double norm = a.size() > 0 ? Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0) : 0.0;
  return std::max(1e-6 * norm, 1e3 * std::numeric_limits<double>::min());
}

SpectralSummary spectral_summary(const Eigen::MatrixXd& a, double cluster_tol) {
  if (a.rows() != a.cols() || a.rows() == 0) throw InputError("spectral_summary: matrix must be square");
  if (!(cluster_tol > 0.0)) throw InputError("spectral_summary: cluster_tol must be positive");
  const Eigen::Index m = a.rows();
  SpectralSummary out;
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(a, false).eigenvalues();
  out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), [](auto x, auto y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });

  // Single-linkage grouping via union-find.
  const std::size_t n = out.eigenvalues.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(out.eigenvalues[i] - out.eigenvalues[j]) <= cluster_tol) parent[find(j)] = find(i);
    }
  }
  std::vector<std::size_t> cluster_of(n);
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    auto it = std::find(roots.begin(), roots.end(), r);
    cluster_of[i] = static_cast<std::size_t>(it - roots.begin());
    if (it == roots.end()) {
      roots.push_back(r);
      out.clusters.push_back({});
    }
    auto& c = out.clusters[cluster_of[i]];
    c.centroid += out.eigenvalues[i];
    ++c.algebraic_multiplicity;
  }

  const double rank_tol = default_rank_tol(m);
  out.full_rank_distinct = true;
  for (auto& c : out.clusters) {
    c.centroid /= static_cast<double>(c.algebraic_multiplicity);
    Eigen::MatrixXcd shifted = a.cast<std::complex<double>>();
    shifted.diagonal().array() -= c.centroid;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(shifted);
    const auto& s = svd.singularValues();
    const double cut = std::max(cluster_tol, rank_tol * s(0));
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > cut) ++rank;
    }
    c.geometric_multiplicity = std::max(1, static_cast<int>(m) - rank);
    out.cyclic_index = std::max(out.cyclic_index, c.geometric_multiplicity);
    if (c.algebraic_multiplicity != 1 || std::abs(c.centroid) <= cluster_tol) out.full_rank_distinct = false;
  }
  return out;
}

SpectralSummary spectral_summary(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw InputError("spectral_summary: matrix must be square");
  return spectral_summary(a, default_cluster_tol(a));
}

namespace {

void check_square(const Eigen::MatrixXd& a, const char* who) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw InputError(std::string(who) + ": A must be square and nonempty");
  }
}

// Calls visit(i, A^{t_i}) for each instant in increasing order.
template <typename Visit>
void for_each_power(const Eigen::MatrixXd& a, const TimeIndexSet& times, Visit visit) {
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  int at = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (; at < times.values()[i]; ++at) power = power * a;
    visit(i, power);
  }
}

RankReport full_rank_report(const Eigen::MatrixXd& m, int required, double rank_tol) {
  const RankInfo info = numerical_rank(m, rank_tol);
  return {info.rank == required, info.rank, required, info.sigma_max};
}

}  // namespace

Eigen::MatrixXd observability_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& k,
                                     const TimeIndexSet& times) {
  check_square(a, "observability_matrix");
  if (k.cols() != a.rows()) throw InputError("observability_matrix: K has wrong column count");
  const Eigen::Index n = k.rows();
  Eigen::MatrixXd out(n * static_cast<Eigen::Index>(times.size()), a.cols());
  for_each_power(a, times, [&](std::size_t i, const Eigen::MatrixXd& p) {
    out.middleRows(static_cast<Eigen::Index>(i) * n, n) = k * p;
  });
  return out;
}

Eigen::MatrixXd observability_matrix(const Eigen::MatrixXd& a, std::span<const Eigen::MatrixXd> ks,
                                     const TimeIndexSet& times) {
  check_square(a, "observability_matrix");
  if (ks.size() != times.size()) throw InputError("observability_matrix: one K per instant required");
  Eigen::Index rows = 0;
  for (const auto& k : ks) {
    if (k.cols() != a.rows()) throw InputError("observability_matrix: K has wrong column count");
    rows += k.rows();
  }
  Eigen::MatrixXd out(rows, a.cols());
  Eigen::Index at = 0;
  for_each_power(a, times, [&](std::size_t i, const Eigen::MatrixXd& p) {
    out.middleRows(at, ks[i].rows()) = ks[i] * p;
    at += ks[i].rows();
  });
  return out;
}

RankReport is_observable(const Eigen::MatrixXd& a, const Eigen::MatrixXd& k, const TimeIndexSet& times,
                         double rank_tol) {
  const Eigen::MatrixXd o = observability_matrix(a, k, times);
  return full_rank_report(o, static_cast<int>(a.rows()), rank_tol);
}

RankReport is_observable(const Eigen::MatrixXd& a, const Eigen::MatrixXd& k, const TimeIndexSet& times) {
  return is_observable(a, k, times, default_rank_tol(a.rows()));
}

Eigen::MatrixXd controllability_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& kd,
                                       const TimeIndexSet& times) {
  check_square(a, "controllability_matrix");
  if (kd.rows() != a.rows()) throw InputError("controllability_matrix: K_D has wrong row count");
  const Eigen::Index l = kd.cols();
  Eigen::MatrixXd out(a.rows(), l * static_cast<Eigen::Index>(times.size()));
  for_each_power(a, times, [&](std::size_t i, const Eigen::MatrixXd& p) {
    out.middleCols(static_cast<Eigen::Index>(i) * l, l) = p * kd;
  });
  return out;
}

RankReport is_controllable(const Eigen::MatrixXd& a, const Eigen::MatrixXd& kd, const TimeIndexSet& times,
                           double rank_tol) {
  const Eigen::MatrixXd c = controllability_matrix(a, kd, times);
  return full_rank_report(c, static_cast<int>(a.rows()), rank_tol);
}

RankReport is_controllable(const Eigen::MatrixXd& a, const Eigen::MatrixXd& kd, const TimeIndexSet& times) {
  return is_controllable(a, kd, times, default_rank_tol(a.rows()));
}

PlacementResult propose_placement(const Dictionary& dict, const Eigen::MatrixXd& a,
                                  const PointList& candidates, const PlacementOptions& options) {
  check_square(a, "propose_placement");
  if (a.rows() != dict.size()) throw InputError("propose_placement: A does not match dictionary size");
  if (candidates.empty()) throw InputError("propose_placement: no candidate locations");
  if (options.max_tries < 1) throw InputError("propose_placement: max_tries must be positive");

  const int m = static_cast<int>(a.rows());
  const TimeIndexSet times =
      options.times.empty() ? TimeIndexSet::consecutive(m) : TimeIndexSet(options.times);
  const int l = spectral_summary(a).cyclic_index;
  const int max_size = std::min(m, static_cast<int>(candidates.size()));

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);

  PlacementResult result;
  result.cyclic_index = l;
  int best_rank = 0;
  for (int size = l; size <= max_size; ++size) {
    for (int attempt = 0; attempt < options.max_tries; ++attempt) {
      ++result.draws;
      for (int q = 0; q < size; ++q) {
        std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(q), order.size() - 1);
        std::swap(order[static_cast<std::size_t>(q)], order[pick(rng)]);
      }
      PointList draw;
      for (int q = 0; q < size; ++q) draw.push_back(candidates[order[static_cast<std::size_t>(q)]]);
      const Eigen::MatrixXd k = dict.design(draw);
      const RankReport rank = options.mode == PlacementMode::sensing
                                  ? is_observable(a, k, times)
                                  : is_controllable(a, k.transpose(), times);
      best_rank = std::max(best_rank, rank.rank);
      if (!rank.full_rank) continue;
      if (!is_l_shaded(k, l, default_shade_tol(k)).l_shaded) continue;
      result.locations = std::move(draw);
      result.count = size;
      result.certificate = rank;
      return result;
    }
  }
  throw PlacementError("propose_placement: no draw of size " + std::to_string(l) + ".." +
                           std::to_string(max_size) + " reached full rank " + std::to_string(m) +
                           " (best rank " + std::to_string(best_rank) + ")",
                       best_rank);
}

}  // namespace kfield
