#pragma once

#include <optional>
#include <vector>

#include <gmpxx.h>

#include <Eigen/Dense>

namespace cirlaw {

using Integer = mpz_class;
using Rational = mpq_class;

/// Row-major dense matrix over an exact ring. Eigen is kept out of exact
/// arithmetic; these matrices are small.
template <typename T>
class ExactMatrix {
 public:
  ExactMatrix() = default;
  ExactMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  T& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  const T& operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

  bool operator==(const ExactMatrix&) const = default;

  static ExactMatrix identity(int n) {
    ExactMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using IntegerMatrix = ExactMatrix<Integer>;
using RationalMatrix = ExactMatrix<Rational>;

/// a / b in canonical form.
inline Rational ratio(const Integer& a, const Integer& b) {
  Rational q(a, b);
  q.canonicalize();
  return q;
}

/// C(n, k); zero outside 0 <= k <= n.
Integer binomial(long n, long k);

inline double to_double(const Rational& q) { return q.get_d(); }

/// Exact value of a finite double.
Rational exact_rational(double x);

/// Integer-valued double matrix to exact integers; nullopt if any entry is non-integral.
std::optional<IntegerMatrix> integer_matrix(const Eigen::MatrixXd& m);

/// Fraction-free (Bareiss) determinant.
Integer determinant(IntegerMatrix m);

RationalMatrix to_rational(const IntegerMatrix& m);
RationalMatrix multiply(const RationalMatrix& a, const RationalMatrix& b);
RationalMatrix transpose(const RationalMatrix& a);

/// Inverse by Gauss-Jordan elimination; nullopt when singular.
std::optional<RationalMatrix> inverse(RationalMatrix a);

/// Rank of a rational matrix.
int rank(RationalMatrix a);

/// Solves a x = b for a (possibly non-square) consistent system. Returns one
/// solution (free variables zero) or nullopt when inconsistent.
std::optional<std::vector<Rational>> solve(const RationalMatrix& a, const std::vector<Rational>& b);

}  // namespace cirlaw
