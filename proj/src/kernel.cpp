#include "kfield/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "kfield/errors.hpp"
#include "kfield/linalg.hpp"

namespace kfield {

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::gaussian:
      return "gaussian";
    case KernelFamily::laplacian:
      return "laplacian";
    case KernelFamily::periodic:
      return "periodic";
    case KernelFamily::locally_periodic:
      return "locally_periodic";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  for (auto f : {KernelFamily::gaussian, KernelFamily::laplacian, KernelFamily::periodic,
                 KernelFamily::locally_periodic}) {
    if (to_string(f) == name) return f;
  }
  throw InputError("unknown kernel family '" + std::string(name) + "'");
}

void KernelSpec::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw InputError("kernel bandwidth must be positive and finite");
  }
  if (needs_period() && (!(period > 0.0) || !std::isfinite(period))) {
    throw InputError("kernel period must be positive for periodic families");
  }
  if (input_dim < 1) throw InputError("kernel input_dim must be >= 1");
}

double eval_kernel(const KernelSpec& spec, const Point& x, const Point& y) {
  if (x.size() != spec.input_dim || y.size() != spec.input_dim) {
    throw InputError("eval_kernel: point dimension does not match input_dim " +
                     std::to_string(spec.input_dim));
  }
  const double sq = (x - y).squaredNorm();
  const double s2 = spec.bandwidth * spec.bandwidth;
  auto periodic = [&] {
    const double sn = std::sin(std::numbers::pi * std::sqrt(sq) / spec.period);
    return std::exp(-2.0 * sn * sn / s2);
  };
  switch (spec.family) {
    case KernelFamily::gaussian:
      return std::exp(-sq / (2.0 * s2));
    case KernelFamily::laplacian:
      return std::exp(-std::sqrt(sq) / spec.bandwidth);
    case KernelFamily::periodic:
      return periodic();
    case KernelFamily::locally_periodic:
      return periodic() * std::exp(-sq / (2.0 * s2));
  }
  return 0.0;
}

KernelMatrix kernel_matrix(const KernelSpec& spec, const PointList& rows, const PointList& cols) {
  if (rows.empty() || cols.empty()) throw InputError("kernel_matrix: empty point list");
  KernelMatrix km;
  km.entries.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      km.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          eval_kernel(spec, rows[i], cols[j]);
    }
  }
  km.rows_from = rows;
  km.cols_from = cols;
  return km;
}

ShadeReport is_shaded(const Eigen::MatrixXd& k, double tol) {
  if (!(tol > 0.0)) throw InputError("is_shaded: tol must be positive");
  ShadeReport report;
  for (Eigen::Index j = 0; j < k.cols(); ++j) {
    if ((k.col(j).array().abs() > tol).any()) report.covered_columns.push_back(static_cast<int>(j));
  }
  report.shaded = k.cols() > 0 && static_cast<Eigen::Index>(report.covered_columns.size()) == k.cols();
  report.row_sum_nonzero =
      k.rows() > 0 && k.cols() > 0 && (k.colwise().sum().array().abs() > tol).all();
  return report;
}

double default_shade_tol(const Eigen::MatrixXd& k) {
  const double m = k.size() > 0 ? k.cwiseAbs().maxCoeff() : 0.0;
  return m > 0.0 ? 1e-12 * m : std::numeric_limits<double>::min();
}

namespace {

using ColumnMask = std::vector<bool>;

bool covers_all(const ColumnMask& mask) {
  return std::all_of(mask.begin(), mask.end(), [](bool b) { return b; });
}

// Depth-first assignment of rows to l blocks. Rows may be left unassigned;
// they can always be appended to any block without breaking shadedness.
class BlockSearch {
 public:
  BlockSearch(const std::vector<ColumnMask>& rows, int l) : rows_(rows), l_(l) {
    const std::size_t m = rows.empty() ? 0 : rows.front().size();
    cover_.assign(static_cast<std::size_t>(l), ColumnMask(m, false));
    members_.assign(static_cast<std::size_t>(l), {});
  }

  bool run() { return visit(0); }
  const std::vector<std::vector<int>>& blocks() const { return members_; }

 private:
  static constexpr std::size_t kNodeBudget = 2'000'000;

  bool done() const {
    return std::all_of(cover_.begin(), cover_.end(), covers_all);
  }

  bool visit(std::size_t row) {
    if (done()) return true;
    if (row == rows_.size() || ++nodes_ > kNodeBudget) return false;
    // Blocks that are still empty are interchangeable; only try the first.
    bool tried_empty = false;
    for (int b = 0; b < l_; ++b) {
      auto& members = members_[static_cast<std::size_t>(b)];
      if (members.empty()) {
        if (tried_empty) continue;
        tried_empty = true;
      }
      if (covers_all(cover_[static_cast<std::size_t>(b)])) continue;
      const ColumnMask saved = cover_[static_cast<std::size_t>(b)];
      bool gains = false;
      for (std::size_t j = 0; j < saved.size(); ++j) {
        if (rows_[row][j] && !saved[j]) {
          cover_[static_cast<std::size_t>(b)][j] = true;
          gains = true;
        }
      }
      if (!gains) continue;
      members.push_back(static_cast<int>(row));
      if (visit(row + 1)) return true;
      members.pop_back();
      cover_[static_cast<std::size_t>(b)] = saved;
    }
    return visit(row + 1);
  }

  const std::vector<ColumnMask>& rows_;
  int l_;
  std::vector<ColumnMask> cover_;
  std::vector<std::vector<int>> members_;
  std::size_t nodes_ = 0;
};

// C(n, k), saturating at `cap` + 1.
std::size_t binomial_capped(int n, int k, std::size_t cap) {
  k = std::min(k, n - k);
  if (k < 0) return 0;
  long double acc = 1.0L;
  for (int i = 1; i <= k; ++i) {
    acc = acc * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (acc > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<std::size_t>(std::llround(acc));
}

bool subset_independent(const Eigen::MatrixXd& k, const std::vector<int>& cols, double rel_tol) {
  Eigen::MatrixXd sub(k.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = k.col(cols[c]);
  return numerical_rank(sub, rel_tol).rank == static_cast<int>(cols.size());
}

}  // namespace

LShadeReport is_l_shaded(const Eigen::MatrixXd& k, int l, double tol) {
  if (l < 1) throw InputError("is_l_shaded: l must be >= 1");
  if (!(tol > 0.0)) throw InputError("is_l_shaded: tol must be positive");
  if (l > k.rows()) {
    throw InputError("is_l_shaded: l = " + std::to_string(l) + " exceeds row count " +
                     std::to_string(k.rows()));
  }
  if (l > k.cols()) {
    throw InputError("is_l_shaded: l = " + std::to_string(l) + " exceeds column count " +
                     std::to_string(k.cols()));
  }
  LShadeReport report;

  const auto m = static_cast<std::size_t>(k.cols());
  std::vector<ColumnMask> rows(static_cast<std::size_t>(k.rows()), ColumnMask(m, false));
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::abs(k(i, j)) > tol;
    }
  }
  BlockSearch search(rows, l);
  report.blocks_found = search.run();
  if (report.blocks_found) report.blocks = search.blocks();

  const double rel_tol = static_cast<double>(m) * std::numeric_limits<double>::epsilon();
  const int cols = static_cast<int>(m);
  const std::size_t total = binomial_capped(cols, l, kMaxColumnSubsets);
  report.columns_independent = true;
  if (total <= kMaxColumnSubsets) {
    // Enumerate l-subsets in lexicographic order.
    std::vector<int> idx(static_cast<std::size_t>(l));
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      ++report.subsets_checked;
      if (!subset_independent(k, idx, rel_tol)) {
        report.columns_independent = false;
        break;
      }
      int pos = l - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == cols - l + pos) --pos;
      if (pos < 0) break;
      ++idx[static_cast<std::size_t>(pos)];
      for (int q = pos + 1; q < l; ++q) {
        idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
      }
    }
  } else {
    report.exhaustive = false;
    std::mt19937_64 rng(0x6b6669656c64ULL);
    std::vector<int> all(m);
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t s = 0; s < kMaxColumnSubsets; ++s) {
      // Partial Fisher-Yates draws l distinct columns.
      for (int q = 0; q < l; ++q) {
        std::uniform_int_distribution<int> pick(q, cols - 1);
        std::swap(all[static_cast<std::size_t>(q)], all[static_cast<std::size_t>(pick(rng))]);
      }
      ++report.subsets_checked;
      if (!subset_independent(k, {all.begin(), all.begin() + l}, rel_tol)) {
        report.columns_independent = false;
        break;
      }
    }
  }
  report.l_shaded = report.blocks_found && report.columns_independent;
  return report;
}

}  // namespace kfield
