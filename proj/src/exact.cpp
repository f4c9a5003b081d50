#include "cirlaw/exact.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "cirlaw/core.hpp"

namespace cirlaw {

Integer binomial(long n, long k) {
  if (n < 0 || k < 0 || k > n) return 0;
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return r;
}

Rational exact_rational(double x) {
  if (!std::isfinite(x)) throw InvalidInput("exact_rational: non-finite value");
  Rational q;
  mpq_set_d(q.get_mpq_t(), x);
  return q;
}

std::optional<IntegerMatrix> integer_matrix(const Eigen::MatrixXd& m) {
  IntegerMatrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v) || std::trunc(v) != v) return std::nullopt;
      out(i, j) = exact_rational(v).get_num();
    }
  }
  return out;
}

Integer determinant(IntegerMatrix m) {
  const int n = m.rows();
  if (n != m.cols()) throw InvalidInput("determinant: matrix must be square");
  if (n == 0) return 1;
  Integer prev = 1;
  int sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (m(k, k) == 0) {
      int swap_row = -1;
      for (int i = k + 1; i < n; ++i) {
        if (m(i, k) != 0) {
          swap_row = i;
          break;
        }
      }
      if (swap_row < 0) return 0;
      for (int j = 0; j < n; ++j) std::swap(m(k, j), m(swap_row, j));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) {
        m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j)) / prev;
      }
    }
    prev = m(k, k);
  }
  return sign * m(n - 1, n - 1);
}

RationalMatrix to_rational(const IntegerMatrix& m) {
  RationalMatrix out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

RationalMatrix multiply(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.cols() != b.rows()) throw InvalidInput("multiply: dimension mismatch");
  RationalMatrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      if (a(i, k) == 0) continue;
      for (int j = 0; j < b.cols(); ++j) out(i, j) += a(i, k) * b(k, j);
    }
  return out;
}

RationalMatrix transpose(const RationalMatrix& a) {
  RationalMatrix out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

namespace {

// Reduced row echelon form in place; returns pivot columns.
std::vector<int> row_reduce(RationalMatrix& a, int pivot_cols) {
  std::vector<int> pivots;
  int row = 0;
  for (int col = 0; col < pivot_cols && row < a.rows(); ++col) {
    int p = -1;
    for (int i = row; i < a.rows(); ++i) {
      if (a(i, col) != 0) {
        p = i;
        break;
      }
    }
    if (p < 0) continue;
    for (int j = 0; j < a.cols(); ++j) std::swap(a(row, j), a(p, j));
    const Rational inv = 1 / a(row, col);
    for (int j = 0; j < a.cols(); ++j) a(row, j) *= inv;
    for (int i = 0; i < a.rows(); ++i) {
      if (i == row || a(i, col) == 0) continue;
      const Rational factor = a(i, col);
      for (int j = 0; j < a.cols(); ++j) a(i, j) -= factor * a(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

}  // namespace

std::optional<RationalMatrix> inverse(RationalMatrix a) {
  const int n = a.rows();
  if (n != a.cols()) throw InvalidInput("inverse: matrix must be square");
  RationalMatrix aug(n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n + i) = 1;
  }
  if (static_cast<int>(row_reduce(aug, n).size()) < n) return std::nullopt;
  RationalMatrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = aug(i, n + j);
  return out;
}

int rank(RationalMatrix a) { return static_cast<int>(row_reduce(a, a.cols()).size()); }

std::optional<std::vector<Rational>> solve(const RationalMatrix& a, const std::vector<Rational>& b) {
  if (static_cast<int>(b.size()) != a.rows()) throw InvalidInput("solve: dimension mismatch");
  RationalMatrix aug(a.rows(), a.cols() + 1);
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) aug(i, j) = a(i, j);
    aug(i, a.cols()) = b[i];
  }
  const auto pivots = row_reduce(aug, a.cols());
  for (int i = static_cast<int>(pivots.size()); i < a.rows(); ++i)
    if (aug(i, a.cols()) != 0) return std::nullopt;
  std::vector<Rational> x(a.cols());
  for (size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug(static_cast<int>(r), a.cols());
  return x;
}

}  // namespace cirlaw
