#pragma once

#include <vector>

#include <Eigen/SVD>

#include "cirlaw/core.hpp"
#include "cirlaw/sampler.hpp"

namespace cirlaw {

/// Orthogonal projection onto the complement of V in C^n (or R^n).
template <typename Scalar>
struct ProjectionOperator {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix p;         // n x n, projects onto V-perp
  Matrix basis_v;   // n x k orthonormal basis of V
  int k = 0;        // numerical dimension of V

  int n() const { return static_cast<int>(p.rows()); }

  double hermitian_error() const { return (p - p.adjoint()).cwiseAbs().maxCoeff(); }
  double idempotent_error() const { return (p * p - p).cwiseAbs().maxCoeff(); }
  double trace_error() const { return std::abs(std::real(p.trace()) - double(n() - k)) + std::abs(std::imag(Complex(p.trace()))); }

  /// |P v| via the orthonormal basis: sqrt(|v|^2 - |Q* v|^2), clamped at 0.
  template <typename Derived>
  double distance(const Eigen::MatrixBase<Derived>& v) const {
    const double full = v.squaredNorm();
    if (k == 0) return std::sqrt(full);
    const double inside = (basis_v.adjoint() * v.template cast<Scalar>()).squaredNorm();
    return std::sqrt(std::max(0.0, full - inside));
  }
};

/// Projection onto span(columns of basis)-perp. Dependent columns are dropped
/// with singular values below 1e-10 times the largest.
template <typename Derived>
ProjectionOperator<typename Derived::Scalar> projection_complement(const Eigen::MatrixBase<Derived>& basis, int n) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (basis.cols() > 0 && basis.rows() != n) throw InvalidInput("projection_complement: basis vectors must have length n");
  ProjectionOperator<Scalar> op;
  op.basis_v = Matrix(n, 0);
  if (basis.cols() > 0) {
    Eigen::JacobiSVD<Matrix> svd(basis.eval(), Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    int rank = 0;
    if (sv.size() > 0 && sv(0) > 0.0)
      while (rank < sv.size() && sv(rank) > 1e-10 * sv(0)) ++rank;
    op.basis_v = svd.matrixU().leftCols(rank);
    op.k = rank;
  }
  op.p = Matrix::Identity(n, n) - op.basis_v * op.basis_v.adjoint();
  return op;
}

/// d'^2 = (n - k) + d_{f'}^2 + Y with f' = f + (s/n) 1.
struct DistanceDecomposition {
  double d_prime_sq = 0.0;
  double base = 0.0;
  double d_f_prime_sq = 0.0;
  double y = 0.0;
};

template <typename Scalar, typename VecDerived>
DistanceDecomposition decompose_distance(const ProjectionOperator<Scalar>& op, const SignVector& x,
                                         const Eigen::MatrixBase<VecDerived>& f, int s) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const int n = op.n();
  if (x.size() != n || f.size() != n) throw InvalidInput("decompose_distance: dimension mismatch");
  const double shift = static_cast<double>(s) / n;
  const Vec fv = f.template cast<Scalar>();
  const Vec v = fv + x.as<double>().template cast<Scalar>();
  const Vec f_prime = fv + Vec::Constant(n, Scalar(shift));
  DistanceDecomposition d;
  d.d_prime_sq = (op.p * v).squaredNorm();
  d.base = n - op.k;
  d.d_f_prime_sq = (op.p * f_prime).squaredNorm();
  d.y = d.d_prime_sq - d.base - d.d_f_prime_sq;
  return d;
}

/// Exact mean of Y under i.i.d. skewed signs: -(s/n)^2 (n - k).
inline double expected_residual(int n, int k, int s) {
  const double r = static_cast<double>(s) / n;
  return -r * r * (n - k);
}

struct MomentReport {
  long samples = 0;
  double mean_y = 0.0;
  double stderr_y = 0.0;
  double expected_y = 0.0;  // exact mean, 0 when s = 0
  double second_moment = 0.0;
  double stderr_second_moment = 0.0;
  double bound = 0.0;  // min(k, n - k) + 4 d_{f'}^2
  /// The off-diagonal pairs (i, j) and (j, i) both contribute, so the sharp
  /// bound is 2 sum_{i != j} |p_ij|^2 + 4 d_{f'}^2 <= 2k(n - k)/n + 4 d_{f'}^2,
  /// which exceeds `bound` unless k = n/2.
  double pair_sum = 0.0;  // sum_{i != j} |p_ij|^2
  double corrected_bound = 0.0;  // 2k(n - k)/n + 4 d_{f'}^2
  bool mean_ok = false;    // |mean - expected| <= 4 stderr
  bool second_ok = false;  // E Y^2 <= bound + 4 stderr
  bool corrected_ok = false;  // E Y^2 <= corrected_bound + 4 stderr
};

MomentReport moment_bound_check(const ProjectionOperator<double>& op, const VectorXd& f, int s, long samples,
                                Rng& rng);
MomentReport moment_bound_check(const ProjectionOperator<Complex>& op, const VectorXcd& f, int s, long samples,
                                Rng& rng);

struct TailRow {
  double t = 0.0;
  long exceed = 0;
  double frequency = 0.0;
  double lemma_bound = 0.0;      // exp(-t^2/4)
  double median_bound = 0.0;     // 4 exp(-t^2/16), around the median
  double union_bound = 0.0;      // C sqrt(n) exp(-t^2/4) with the declared C
  bool asserted_ok = false;      // frequency <= the bound asserted for the model
};

struct TailTable {
  int n = 0;
  int k = 0;
  int s = 0;
  RowModel model = RowModel::IID;
  long samples = 0;
  double center = 0.0;         // sqrt(n - k + d_{f'}^2)
  double median = 0.0;         // empirical median of d'
  double declared_constant = 10.0;
  double fitted_constant = 0.0;  // smallest C with frequency <= C sqrt(n) exp(-t^2/4) on the ladder
  std::vector<TailRow> rows;
  bool monotone = false;

  bool all_ok() const;
};

/// Empirical P(|d' - sqrt(n - k + d_{f'}^2)| >= t + 3) for each t, with d'
/// the distance from x + f to V and x drawn from `model` (IID or UnionS).
TailTable talagrand_tail_experiment(const ProjectionOperator<double>& op, const VectorXd& f, int s,
                                    const std::vector<double>& t_ladder, long samples, RowModel model, Rng& rng,
                                    double declared_constant = 10.0);

}  // namespace cirlaw
