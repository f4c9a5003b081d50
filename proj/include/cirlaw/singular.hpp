#pragma once

#include <optional>
#include <vector>

#include <Eigen/SVD>

#include "cirlaw/core.hpp"
#include "cirlaw/exact.hpp"
#include "cirlaw/sampler.hpp"

namespace cirlaw {

/// sigma_1 >= ... >= sigma_min(rows, cols) >= 0.
struct SingularSpectrum {
  VectorXd values;

  double largest() const { return values.size() ? values(0) : 0.0; }
  double smallest() const { return values.size() ? values(values.size() - 1) : 0.0; }
};

template <typename Derived>
SingularSpectrum singular_values(const Eigen::MatrixBase<Derived>& matrix) {
  using Plain = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (!matrix.allFinite()) throw InvalidInput("singular_values: non-finite entry");
  if (matrix.size() == 0) return {};
  Eigen::BDCSVD<Plain> svd(matrix.eval());
  if (svd.info() != Eigen::Success) throw NumericalFailure("SVD did not converge");
  return {svd.singularValues()};
}

/// Hit counts for sigma_n(X + F) < n^{-A} across a ladder of exponents A.
struct TailExperimentReport {
  int n = 0;
  int s = 0;
  RowModel model = RowModel::UnionS;
  std::vector<double> a_exponents;
  std::vector<long> hits;
  long trials = 0;
  long excluded = 0;  // draws whose SVD failed
  double min_sigma = 0.0;
  double max_f_entry = 0.0;

  /// hits non-increasing along an increasing ladder
  bool monotone() const;
  double frequency(std::size_t i) const { return trials > excluded ? double(hits[i]) / double(trials - excluded) : 0.0; }
};

TailExperimentReport least_singular_tail(int n, int s, const MatrixXd& f, std::vector<double> a_exponents,
                                         long trials, RowModel model, Rng& rng);

struct InterlacingReport {
  bool holds = true;
  int first_violation = -1;  // 1-based i of the first failing index
  double worst_excess = 0.0;
};

/// sigma_i(A) >= sigma_i(A') >= sigma_{i+k}(A) for A' = first n-k rows of A.
InterlacingReport interlacing_check(const MatrixXd& a, int k);

struct MomentIdentity {
  double lhs = 0.0;  // sum sigma_i^{-2}
  double rhs = 0.0;  // sum dist^{-2}(r_i, W_i)
  double relative_gap = 0.0;
};

/// Both sides of the negative second moment identity for a full-rank n' x n matrix.
MomentIdentity negative_second_moment_check(const MatrixXd& a);

/// Transposed cofactor matrix with exact integer entries, or nullopt for
/// non-integral input.
std::optional<IntegerMatrix> exact_adjugate(const MatrixXd& x);

/// |adj(X) b - det(X) a| / |det(X)| with b = X a. Integer-valued X uses exact
/// cofactors; other X fall back to LU minors. n <= 10.
double cofactor_identity_check(const MatrixXd& x, const VectorXd& a);

}  // namespace cirlaw
