#include "cirlaw/logdet.hpp"

#include <algorithm>

namespace cirlaw {

LogDetDecomposition decomposition_from_heights(std::vector<double> heights, Complex z) {
  LogDetDecomposition d;
  d.distances = std::move(heights);
  d.z = z;
  d.degenerate = std::any_of(d.distances.begin(), d.distances.end(),
                             [](double h) { return !(h > kDegenerateDistance); });
  return split_logdet(d, d.n());
}

LogDetDecomposition split_logdet(const LogDetDecomposition& decomp, int m) {
  if (m < 0 || m > decomp.n()) throw InvalidInput("split_logdet: need 0 <= m <= n");
  LogDetDecomposition out = decomp;
  out.m = m;
  if (out.degenerate) {
    out.log_s1 = out.log_s2 = out.total = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.log_s1 = 0.0;
  out.log_s2 = 0.0;
  for (int i = 0; i < out.n(); ++i) (i < m ? out.log_s1 : out.log_s2) += std::log(out.distances[i]);
  out.total = out.log_s1 + out.log_s2;
  return out;
}

int default_split(int n) {
  if (n < 1) throw InvalidInput("default_split: n must be positive");
  if (n <= 2) return 1;
  const double l = std::log(static_cast<double>(n));
  const int m = n - static_cast<int>(std::ceil(l * l));
  return std::clamp(m, 1, n - 1);
}

MatrixXcd shifted_matrix(const MatrixXd& x, const MatrixXd& f, Complex z) {
  if (x.rows() != x.cols() || f.rows() != x.rows() || f.cols() != x.cols())
    throw InvalidInput("shifted_matrix: dimension mismatch");
  const double root_n = std::sqrt(static_cast<double>(x.rows()));
  MatrixXcd out = (x + f).cast<Complex>();
  out.diagonal().array() -= z * root_n;
  return out;
}

ReplacementOutcome replacement_statistic(const MatrixXd& x, const MatrixXd& x_iid, const MatrixXd& f, Complex z,
                                         int m) {
  ReplacementOutcome out;
  const int n = static_cast<int>(x.rows());
  out.constrained = split_logdet(logdet_via_distances(shifted_matrix(x, f, z), z), m);
  out.iid = split_logdet(logdet_via_distances(shifted_matrix(x_iid, f, z), z), m);
  out.singular = out.constrained.degenerate || out.iid.degenerate;
  if (!out.singular) out.statistic = (out.constrained.total - out.iid.total) / n;
  return out;
}

ReplacementOutcome replacement_statistic(int n, int s, const MatrixXd& f, Complex z, Rng& rng) {
  const MatrixXd x = sample_row_sum_matrix(n, s, RowModel::UnionS, rng);
  const MatrixXd x_iid = sample_row_sum_matrix(n, s, RowModel::IID, rng);
  return replacement_statistic(x, x_iid, f, z, default_split(n));
}

TailWindow tail_window(const LogDetDecomposition& decomp, const MatrixXcd& f_rows) {
  TailWindow w;
  const double bound_base = 2.0 * std::sqrt(static_cast<double>(decomp.n()));
  for (int i = decomp.m; i < decomp.n(); ++i) {
    w.min_tail_distance = std::min(w.min_tail_distance, decomp.distances[i]);
    if (decomp.distances[i] > bound_base + f_rows.row(i).norm()) w.upper_ok = false;
  }
  return w;
}

}  // namespace cirlaw
