#include "kfield/linalg.hpp"

#include <algorithm>
#include <limits>

#include "kfield/errors.hpp"

namespace kfield {

double default_rank_tol(Eigen::Index n) {
  return static_cast<double>(std::max<Eigen::Index>(n, 1)) *
         std::numeric_limits<double>::epsilon() * 64.0;
}

namespace {

template <typename Matrix>
RankInfo rank_of(const Matrix& m, double rel_tol) {
  RankInfo info;
  if (m.size() == 0) return info;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  info.sigma_max = s.size() > 0 ? s(0) : 0.0;
  info.threshold = rel_tol * info.sigma_max;
  if (info.sigma_max == 0.0) return info;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) >= info.threshold) ++info.rank;
  }
  return info;
}

}  // namespace

RankInfo numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  return rank_of(m, rel_tol);
}

RankInfo numerical_rank(const Eigen::MatrixXcd& m, double rel_tol) {
  return rank_of(m, rel_tol);
}

Eigen::MatrixXd pinv(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return Eigen::MatrixXd::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cut = default_rank_tol(std::max(m.rows(), m.cols())) * s(0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut && s(i) > 0.0) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double spectral_radius(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw InputError("spectral_radius: matrix not square");
  if (a.size() == 0) return 0.0;
  return Eigen::EigenSolver<Eigen::MatrixXd>(a, false).eigenvalues().cwiseAbs().maxCoeff();
}

double min_symmetric_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace kfield
