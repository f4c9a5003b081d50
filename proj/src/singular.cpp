#include "cirlaw/singular.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "cirlaw/logdet.hpp"

namespace cirlaw {

bool TailExperimentReport::monotone() const {
  for (std::size_t i = 1; i < hits.size(); ++i) {
    if (a_exponents[i] >= a_exponents[i - 1] && hits[i] > hits[i - 1]) return false;
    if (a_exponents[i] <= a_exponents[i - 1] && hits[i] < hits[i - 1]) return false;
  }
  return true;
}

TailExperimentReport least_singular_tail(int n, int s, const MatrixXd& f, std::vector<double> a_exponents,
                                         long trials, RowModel model, Rng& rng) {
  if (trials < 1) throw InvalidInput("least_singular_tail: trials must be >= 1");
  if (f.rows() != n || f.cols() != n) throw InvalidInput("least_singular_tail: F must be n x n");
  TailExperimentReport r;
  r.n = n;
  r.s = s;
  r.model = model;
  r.a_exponents = std::move(a_exponents);
  r.hits.assign(r.a_exponents.size(), 0);
  r.trials = trials;
  r.min_sigma = std::numeric_limits<double>::infinity();
  r.max_f_entry = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
  std::vector<double> thresholds;
  for (double a : r.a_exponents) thresholds.push_back(std::pow(static_cast<double>(n), -a));
  for (long t = 0; t < trials; ++t) {
    const MatrixXd x = sample_row_sum_matrix(n, s, model, rng) + f;
    double sigma_min = 0.0;
    try {
      sigma_min = singular_values(x).smallest();
    } catch (const NumericalFailure&) {
      ++r.excluded;
      continue;
    }
    r.min_sigma = std::min(r.min_sigma, sigma_min);
    for (std::size_t i = 0; i < thresholds.size(); ++i)
      if (sigma_min < thresholds[i]) ++r.hits[i];
  }
  return r;
}

InterlacingReport interlacing_check(const MatrixXd& a, int k) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n) throw InvalidInput("interlacing_check: A must be square");
  if (k < 1 || k > n - 1) throw InvalidInput("interlacing_check: need 1 <= k <= n-1");
  const VectorXd full = singular_values(a).values;
  const VectorXd part = singular_values(a.topRows(n - k)).values;
  const double tol = 1e-9 * std::max(full(0), 1e-300);
  InterlacingReport r;
  for (int i = 0; i < n - k; ++i) {
    const double upper = part(i) - full(i);
    const double lower = full(i + k) - part(i);
    const double excess = std::max(upper, lower);
    r.worst_excess = std::max(r.worst_excess, excess);
    if (excess > tol && r.holds) {
      r.holds = false;
      r.first_violation = i + 1;
    }
  }
  return r;
}

MomentIdentity negative_second_moment_check(const MatrixXd& a) {
  const Eigen::Index rows = a.rows();
  if (rows < 1 || rows > a.cols()) throw InvalidInput("negative_second_moment_check: need 1 <= n' <= n");
  const VectorXd sv = singular_values(a).values;
  if (!(sv(rows - 1) > 1e-10)) throw InvalidInput("negative_second_moment_check: matrix is not full rank");
  MomentIdentity m;
  m.lhs = sv.head(rows).array().inverse().square().sum();
  for (Eigen::Index i = 0; i < rows; ++i) {
    MatrixXd others(a.cols(), rows - 1);
    for (Eigen::Index j = 0, c = 0; j < rows; ++j)
      if (j != i) others.col(c++) = a.row(j).transpose();
    const double d = distance_to_span(a.row(i).transpose(), others);
    m.rhs += 1.0 / (d * d);
  }
  m.relative_gap = std::abs(m.lhs - m.rhs) / std::max(std::abs(m.lhs), std::abs(m.rhs));
  return m;
}

namespace {

template <typename T>
T minor_of(const ExactMatrix<T>& m, int row, int col) {
  const int n = m.rows();
  ExactMatrix<T> sub(n - 1, n - 1);
  for (int i = 0, r = 0; i < n; ++i) {
    if (i == row) continue;
    for (int j = 0, c = 0; j < n; ++j) {
      if (j == col) continue;
      sub(r, c++) = m(i, j);
    }
    ++r;
  }
  return determinant(sub);
}

}  // namespace

std::optional<IntegerMatrix> exact_adjugate(const MatrixXd& x) {
  auto exact = integer_matrix(x);
  if (!exact) return std::nullopt;
  const int n = exact->rows();
  IntegerMatrix adj(n, n);
  if (n == 1) {
    adj(0, 0) = 1;
    return adj;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Integer c = minor_of(*exact, i, j);
      adj(j, i) = (i + j) % 2 == 0 ? c : Integer(-c);
    }
  return adj;
}

double cofactor_identity_check(const MatrixXd& x, const VectorXd& a) {
  const int n = static_cast<int>(x.rows());
  if (x.cols() != n || a.size() != n) throw InvalidInput("cofactor_identity_check: dimension mismatch");
  if (n > 10) throw InvalidInput("cofactor_identity_check: n must be at most 10");
  const VectorXd b = x * a;

  MatrixXd adj(n, n);
  double det = 0.0;
  if (auto exact = exact_adjugate(x)) {
    const Integer d = determinant(*integer_matrix(x));
    if (d == 0) throw InvalidInput("cofactor_identity_check: X is singular");
    det = d.get_d();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) adj(i, j) = (*exact)(i, j).get_d();
  } else {
    det = x.partialPivLu().determinant();
    if (det == 0.0) throw InvalidInput("cofactor_identity_check: X is singular");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        MatrixXd sub(n - 1, n - 1);
        for (int r = 0, rr = 0; r < n; ++r) {
          if (r == i) continue;
          for (int c = 0, cc = 0; c < n; ++c)
            if (c != j) sub(rr, cc++) = x(r, c);
          ++rr;
        }
        const double c = n == 1 ? 1.0 : sub.partialPivLu().determinant();
        adj(j, i) = (i + j) % 2 == 0 ? c : -c;
      }
  }
  return (adj * b - det * a).norm() / std::abs(det);
}

}  // namespace cirlaw
