#pragma once

#include <cmath>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cirlaw/core.hpp"

namespace cirlaw {

/// Eigenvalues of a dense real or complex square matrix, as complex numbers
/// of the input's precision.
template <typename Derived>
Eigen::Matrix<std::complex<typename Eigen::NumTraits<typename Derived::Scalar>::Real>, Eigen::Dynamic, 1>
eigenvalues_dense(const Eigen::MatrixBase<Derived>& matrix) {
  using Scalar = typename Derived::Scalar;
  if (matrix.rows() != matrix.cols()) throw InvalidInput("eigenvalues_dense: matrix must be square");
  if (!matrix.allFinite()) throw InvalidInput("eigenvalues_dense: non-finite entry");
  if (matrix.rows() == 0) return {};
  using Plain = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if constexpr (Eigen::NumTraits<Scalar>::IsComplex) {
    Eigen::ComplexEigenSolver<Plain> solver(matrix.eval(), false);
    if (solver.info() != Eigen::Success) throw NumericalFailure("complex eigensolver did not converge");
    return solver.eigenvalues();
  } else {
    Eigen::EigenSolver<Plain> solver(matrix.eval(), false);
    if (solver.info() != Eigen::Success) throw NumericalFailure("real Schur eigensolver did not converge");
    return solver.eigenvalues();
  }
}

/// Eigenvalues of one draw with the normalisation sigma = sqrt(1 - (s/n)^2).
struct SpectrumSample {
  VectorXcd eigenvalues;
  int n = 0;
  int s = 0;
  double sigma = 1.0;
};

double spectral_sigma(int n, int s);

SpectrumSample spectrum_sample(const MatrixXd& matrix, int s);

/// Empirical CDF mu(x, y) = #{Re z <= x, Im z <= y} / #points.
class EsdFunction {
 public:
  EsdFunction() = default;
  explicit EsdFunction(std::vector<Complex> points) : points_(std::move(points)) {}

  double operator()(double x, double y) const;
  const std::vector<Complex>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<Complex> points_;
};

/// ESD of matrix / (sigma sqrt(n)). Throws when sigma = 0 (|s| = n).
EsdFunction normalized_esd(const MatrixXd& matrix, int s);
EsdFunction normalized_esd(const SpectrumSample& sample);

/// Location of the deterministic eigenvalue s after normalisation.
inline double normalized_outlier(int n, int s) { return s / (spectral_sigma(n, s) * std::sqrt(double(n))); }

/// Drops the point nearest to the normalised outlier when it lies outside
/// radius `radius` (default 1.1). Returns the index that was dropped, if any.
std::optional<std::size_t> exclude_outlier(std::vector<Complex>& points, int n, int s, double radius = 1.1);

/// Uniform measure on the unit disk: area{|z| <= 1, Re z <= x, Im z <= y} / pi.
double circular_cdf(double x, double y);

/// sup over a grid x grid lattice on [-1.5, 1.5]^2 of |esd - circular_cdf|.
double ks_distance_to_circular(const EsdFunction& esd, int grid);

/// Same metric between two arbitrary CDFs.
double grid_sup_distance(const std::function<double(double, double)>& lhs,
                         const std::function<double(double, double)>& rhs, int grid);

/// Grid coordinate i of `grid` points on [-1.5, 1.5].
inline double grid_coordinate(int i, int grid) { return -1.5 + 3.0 * i / (grid - 1); }

struct ReducedSpectrum {
  double deterministic = 0.0;  // s, eigenvalue with the all-ones eigenvector
  VectorXcd rest;              // spectrum of X_{n-1} - F_{n-1}
};

/// Splits a constant-row-sum matrix into its row sum and the (n-1)x(n-1)
/// perturbed block X - F, where every row of F is the first n-1 entries of the
/// last row of M.
ReducedSpectrum spectrum_via_reduction(const MatrixXd& m);

/// The perturbed block itself.
MatrixXd reduced_block(const MatrixXd& m);

/// Pairs two multisets greedily by increasing distance; returns the largest
/// paired distance (infinity on size mismatch).
double multiset_match_error(const VectorXcd& a, const VectorXcd& b);

/// Multiset comparison that tolerates ill-conditioned multiple eigenvalues.
/// The union of both sets is split into single-linkage clusters of the given
/// radius; each cluster must hold equally many points from a and b, and the
/// error is the largest distance between the two cluster means (the paired
/// distance for singleton pairs). Infinity on a count mismatch.
double cluster_match_error(const VectorXcd& a, const VectorXcd& b, double radius = 1e-3);

/// cluster_match_error between {s} + spec(X - F) and spec(M), both spectra
/// computed in extended precision, clustered at radius 1e-2.
double reduction_match_error(const MatrixXd& m);

/// CSV with header "re,im", one row per point.
void write_eigenvalue_csv(std::ostream& out, const std::vector<Complex>& points);

}  // namespace cirlaw
