#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/LU>
#include <Eigen/QR>

#include "cirlaw/core.hpp"
#include "cirlaw/sampler.hpp"

namespace cirlaw {

/// Euclidean distance from v to the column span of `basis` (n x m, m may be 0).
/// Uses a rank-revealing Householder QR; columns below the relative threshold
/// 1e-10 are treated as dependent.
template <typename VecDerived, typename BasisDerived>
double distance_to_span(const Eigen::MatrixBase<VecDerived>& v, const Eigen::MatrixBase<BasisDerived>& basis) {
  using Scalar = typename BasisDerived::Scalar;
  using Plain = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (basis.cols() == 0) return v.norm();
  if (basis.rows() != v.rows()) throw InvalidInput("distance_to_span: dimension mismatch");
  Eigen::ColPivHouseholderQR<Plain> qr(basis.eval());
  qr.setThreshold(1e-10);
  const Vec coords = qr.householderQ().adjoint() * v.template cast<Scalar>().eval();
  const Eigen::Index r = qr.rank();
  return coords.tail(coords.size() - r).norm();
}

/// log|det| split along rows: distances(i) = dist(row_i, span(rows before i)).
struct LogDetDecomposition {
  std::vector<double> distances;
  int m = 0;           // rows 1..m go into log_s1
  double log_s1 = 0.0;
  double log_s2 = 0.0;
  double total = 0.0;  // log_s1 + log_s2
  Complex z{0.0, 0.0};
  bool degenerate = false;  // some distance <= 1e-12; logs are NaN

  int n() const { return static_cast<int>(distances.size()); }
};

inline constexpr double kDegenerateDistance = 1e-12;

/// Row-by-row base-times-height distances from one unpivoted Householder QR of
/// the transposed matrix: |R_ii| is the height of row i over the previous rows.
/// Heights after a numerically dependent row are unreliable.
template <typename Derived>
std::vector<double> row_heights(const Eigen::MatrixBase<Derived>& rows) {
  using Scalar = typename Derived::Scalar;
  using Plain = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (rows.rows() > rows.cols()) throw InvalidInput("row_heights: more rows than columns");
  Eigen::HouseholderQR<Plain> qr(rows.transpose().eval());
  const Plain& packed = qr.matrixQR();
  std::vector<double> heights(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) heights[i] = std::abs(packed(i, i));
  return heights;
}

/// Same distances, each prefix orthogonalised from scratch (reference route).
template <typename Derived>
std::vector<double> row_heights_by_prefix(const Eigen::MatrixBase<Derived>& rows) {
  using Scalar = typename Derived::Scalar;
  using Plain = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  std::vector<double> heights(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const Plain basis = rows.topRows(i).transpose();
    heights[i] = distance_to_span(rows.row(i).transpose(), basis);
  }
  return heights;
}

LogDetDecomposition decomposition_from_heights(std::vector<double> heights, Complex z = {});

template <typename Derived>
LogDetDecomposition logdet_via_distances(const Eigen::MatrixBase<Derived>& rows, Complex z = {}) {
  if (rows.rows() != rows.cols()) throw InvalidInput("logdet_via_distances: matrix must be square");
  return decomposition_from_heights(row_heights(rows), z);
}

/// log|det| from a partial-pivot LU; -inf for an exactly singular factor.
template <typename Derived>
double log_abs_det_lu(const Eigen::MatrixBase<Derived>& a) {
  using Plain = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::PartialPivLU<Plain> lu(a.eval());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) acc += std::log(std::abs(lu.matrixLU()(i, i)));
  return acc;
}

/// Recomputes log_s1 (rows <= m) and log_s2 (rows > m); total = log_s1 + log_s2.
LogDetDecomposition split_logdet(const LogDetDecomposition& decomp, int m);

/// n - ceil(log(n)^2) clamped to [1, n-1]; log^8 n exceeds n at any desk size.
int default_split(int n);

/// (X + F) - z sqrt(n) I.
MatrixXcd shifted_matrix(const MatrixXd& x, const MatrixXd& f, Complex z);

struct ReplacementOutcome {
  double statistic = std::numeric_limits<double>::quiet_NaN();
  bool singular = false;
  LogDetDecomposition constrained;  // rows from the union set S
  LogDetDecomposition iid;          // i.i.d. skewed Bernoulli rows
};

/// (1/n)[log|det((X+F) - z sqrt(n) I)| - log|det((X'+F) - z sqrt(n) I)|] for
/// given X and X'.
ReplacementOutcome replacement_statistic(const MatrixXd& x, const MatrixXd& x_iid, const MatrixXd& f, Complex z,
                                         int m);

/// One paired draw: X with union-S rows, X' with i.i.d. rows, both n x n.
ReplacementOutcome replacement_statistic(int n, int s, const MatrixXd& f, Complex z, Rng& rng);

struct TailWindow {
  double min_tail_distance = std::numeric_limits<double>::infinity();
  bool upper_ok = true;  // dist_i <= 2 sqrt(n) + |f_i| for all i > m
};

/// Checks the distances of rows m+1..n against the row-norm bound, where
/// f_rows are the deterministic parts of the rows (shift included).
TailWindow tail_window(const LogDetDecomposition& decomp, const MatrixXcd& f_rows);

}  // namespace cirlaw
