#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace kfield {

/// A location in the input domain.
using Point = Eigen::VectorXd;
using PointList = std::vector<Point>;

enum class KernelFamily { gaussian, laplacian, periodic, locally_periodic };

std::string_view to_string(KernelFamily family);
/// Throws InputError on an unknown name.
KernelFamily parse_kernel_family(std::string_view name);

/// Kernel family and hyperparameters. `period` is only read by the
/// periodic families.
struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  double bandwidth = 1.0;
  double period = 1.0;
  int input_dim = 1;

  bool needs_period() const {
    return family == KernelFamily::periodic || family == KernelFamily::locally_periodic;
  }
  /// Throws InputError if a field is out of range.
  void validate() const;
};

/// k(x, y). Every family is normalized so that k(x, x) == 1.
double eval_kernel(const KernelSpec& spec, const Point& x, const Point& y);

/// Entries k(rows_from[i], cols_from[j]) together with the points that
/// generated them.
struct KernelMatrix {
  Eigen::MatrixXd entries;
  PointList rows_from;
  PointList cols_from;

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
};

KernelMatrix kernel_matrix(const KernelSpec& spec, const PointList& rows, const PointList& cols);

struct ShadeReport {
  bool shaded = false;
  std::vector<int> covered_columns;
  bool row_sum_nonzero = false;
};

/// Shadedness: every column has at least one entry with |K_ij| > tol.
/// `row_sum_nonzero` checks the column-wise sum of all rows against tol.
ShadeReport is_shaded(const Eigen::MatrixXd& k, double tol);

/// 1e-12 times the largest absolute entry.
double default_shade_tol(const Eigen::MatrixXd& k);

struct LShadeReport {
  bool l_shaded = false;
  bool blocks_found = false;
  bool columns_independent = false;
  /// False when the column-subset check sampled instead of enumerating.
  bool exhaustive = true;
  std::size_t subsets_checked = 0;
  /// Row indices of the l shaded blocks when blocks_found.
  std::vector<std::vector<int>> blocks;
};

inline constexpr std::size_t kMaxColumnSubsets = 10000;

/// l-shadedness: the rows split into l disjoint blocks that are each shaded
/// at `tol`, and every l-column subset has rank l. When C(M, l) exceeds
/// kMaxColumnSubsets, a fixed-seed random sample of that many subsets is
/// checked and `exhaustive` is false.
LShadeReport is_l_shaded(const Eigen::MatrixXd& k, int l, double tol);

}  // namespace kfield
