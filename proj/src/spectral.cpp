#include "cirlaw/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>

namespace cirlaw {

double spectral_sigma(int n, int s) {
  if (n < 1) throw InvalidInput("spectral_sigma: n must be positive");
  const double ratio = static_cast<double>(s) / n;
  return std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
}

SpectrumSample spectrum_sample(const MatrixXd& matrix, int s) {
  const int n = static_cast<int>(matrix.rows());
  return {eigenvalues_dense(matrix), n, s, spectral_sigma(n, s)};
}

double EsdFunction::operator()(double x, double y) const {
  if (points_.empty()) return 0.0;
  std::size_t count = 0;
  for (const Complex& z : points_)
    if (z.real() <= x && z.imag() <= y) ++count;
  return static_cast<double>(count) / static_cast<double>(points_.size());
}

EsdFunction normalized_esd(const SpectrumSample& sample) {
  if (!(sample.sigma > 0.0)) throw InvalidInput("normalized_esd: sigma = 0, need |s| < n");
  const double scale = 1.0 / (sample.sigma * std::sqrt(static_cast<double>(sample.n)));
  std::vector<Complex> points(static_cast<std::size_t>(sample.eigenvalues.size()));
  for (Eigen::Index i = 0; i < sample.eigenvalues.size(); ++i) points[i] = sample.eigenvalues(i) * scale;
  return EsdFunction(std::move(points));
}

EsdFunction normalized_esd(const MatrixXd& matrix, int s) {
  const int n = static_cast<int>(matrix.rows());
  if (spectral_sigma(n, s) == 0.0) throw InvalidInput("normalized_esd: sigma = 0, need |s| < n");
  return normalized_esd(spectrum_sample(matrix, s));
}

std::optional<std::size_t> exclude_outlier(std::vector<Complex>& points, int n, int s, double radius) {
  const double outlier = normalized_outlier(n, s);
  if (std::abs(outlier) <= radius || points.empty()) return std::nullopt;
  const auto nearest = std::min_element(points.begin(), points.end(), [&](const Complex& a, const Complex& b) {
    return std::abs(a - outlier) < std::abs(b - outlier);
  });
  const auto index = static_cast<std::size_t>(nearest - points.begin());
  points.erase(nearest);
  return index;
}

namespace {

// Antiderivative of sqrt(1 - u^2) on [-1, 1].
double half_chord_integral(double u) {
  u = std::clamp(u, -1.0, 1.0);
  return 0.5 * (u * std::sqrt(1.0 - u * u) + std::asin(u));
}

}  // namespace

double circular_cdf(double x, double y) {
  if (x <= -1.0 || y <= -1.0) return 0.0;
  const double right = std::min(x, 1.0);
  const auto full = [](double lo, double hi) {  // integral of 2h
    return 2.0 * (half_chord_integral(hi) - half_chord_integral(lo));
  };
  const auto capped = [y](double lo, double hi) {  // integral of y + h
    return y * (hi - lo) + half_chord_integral(hi) - half_chord_integral(lo);
  };
  const auto clip = [right](double lo, double hi) { return std::pair{lo, std::min(hi, right)}; };

  double area = 0.0;
  if (y >= 1.0) {
    area = full(-1.0, right);
  } else {
    const double a = std::sqrt(1.0 - y * y);
    if (y >= 0.0) {
      // chord fully below y for |u| > a, capped at y for |u| <= a
      for (auto [lo, hi] : {clip(-1.0, -a), clip(a, 1.0)})
        if (hi > lo) area += full(lo, hi);
      if (auto [lo, hi] = clip(-a, a); hi > lo) area += capped(lo, hi);
    } else {
      if (auto [lo, hi] = clip(-a, a); hi > lo) area += capped(lo, hi);
    }
  }
  return std::clamp(area / std::numbers::pi, 0.0, 1.0);
}

double ks_distance_to_circular(const EsdFunction& esd, int grid) {
  if (grid < 2) throw InvalidInput("ks_distance_to_circular: grid must be >= 2");
  if (esd.size() == 0) throw InvalidInput("ks_distance_to_circular: empty ESD");
  const int g = grid;
  const auto bucket = [g](double v) {
    // smallest i with v <= grid_coordinate(i); g when none
    int i = static_cast<int>(std::ceil((v + 1.5) * (g - 1) / 3.0));
    i = std::clamp(i, 0, g);
    while (i > 0 && v <= grid_coordinate(i - 1, g)) --i;
    while (i < g && v > grid_coordinate(i, g)) ++i;
    return i;
  };
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(g + 1, g + 1);
  for (const Complex& z : esd.points()) counts(bucket(z.real()), bucket(z.imag())) += 1.0;
  for (int i = 0; i <= g; ++i)
    for (int j = 1; j <= g; ++j) counts(i, j) += counts(i, j - 1);
  for (int i = 1; i <= g; ++i) counts.row(i) += counts.row(i - 1);

  const double total = static_cast<double>(esd.size());
  double worst = 0.0;
  for (int i = 0; i < g; ++i) {
    const double x = grid_coordinate(i, g);
    for (int j = 0; j < g; ++j) {
      const double y = grid_coordinate(j, g);
      worst = std::max(worst, std::abs(counts(i, j) / total - circular_cdf(x, y)));
    }
  }
  return worst;
}

double grid_sup_distance(const std::function<double(double, double)>& lhs,
                         const std::function<double(double, double)>& rhs, int grid) {
  if (grid < 2) throw InvalidInput("grid_sup_distance: grid must be >= 2");
  double worst = 0.0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double x = grid_coordinate(i, grid), y = grid_coordinate(j, grid);
      worst = std::max(worst, std::abs(lhs(x, y) - rhs(x, y)));
    }
  return worst;
}

MatrixXd reduced_block(const MatrixXd& m) {
  const Eigen::Index n = m.rows();
  if (n != m.cols() || n == 0) throw InvalidInput("reduction: matrix must be square and non-empty");
  const double s = m.row(0).sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double tol = 1e-12 * (1.0 + m.row(i).cwiseAbs().sum());
    if (std::abs(m.row(i).sum() - s) > tol)
      throw InvalidInput("reduction: row " + std::to_string(i) + " does not sum to the common row sum");
  }
  const Eigen::Index k = n - 1;
  MatrixXd block = m.topLeftCorner(k, k);
  block.rowwise() -= m.row(k).head(k);
  return block;
}

ReducedSpectrum spectrum_via_reduction(const MatrixXd& m) {
  MatrixXd block = reduced_block(m);
  return {m.row(0).sum(), eigenvalues_dense(block)};
}

double reduction_match_error(const MatrixXd& m) {
  using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const MatrixXd block = reduced_block(m);
  const auto rest = eigenvalues_dense(block.cast<long double>().eval());
  const auto direct = eigenvalues_dense(MatrixXld(m.cast<long double>()));
  VectorXcd joined(rest.size() + 1);
  joined(0) = m.row(0).sum();
  for (Eigen::Index i = 0; i < rest.size(); ++i) joined(i + 1) = Complex(rest(i));
  const VectorXcd direct_d = direct.unaryExpr([](const std::complex<long double>& z) { return Complex(z); });
  return cluster_match_error(joined, direct_d, 1e-2);
}

double multiset_match_error(const VectorXcd& a, const VectorXcd& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  const Eigen::Index n = a.size();
  struct Pair {
    double d;
    Eigen::Index i, j;
  };
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) pairs.push_back({std::abs(a(i) - b(j)), i, j});
  std::sort(pairs.begin(), pairs.end(), [](const Pair& l, const Pair& r) { return l.d < r.d; });
  std::vector<bool> used_a(static_cast<std::size_t>(n)), used_b(static_cast<std::size_t>(n));
  double worst = 0.0;
  Eigen::Index matched = 0;
  for (const Pair& p : pairs) {
    if (used_a[p.i] || used_b[p.j]) continue;
    used_a[p.i] = used_b[p.j] = true;
    worst = std::max(worst, p.d);
    if (++matched == n) break;
  }
  return worst;
}

double cluster_match_error(const VectorXcd& a, const VectorXcd& b, double radius) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  const Eigen::Index n = a.size();
  std::vector<Complex> all(a.data(), a.data() + n);
  all.insert(all.end(), b.data(), b.data() + n);
  // Single-linkage clusters of the union via union-find.
  std::vector<std::size_t> parent(all.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  const auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      if (std::abs(all[i] - all[j]) <= radius) parent[find(i)] = find(j);

  std::map<std::size_t, std::pair<std::vector<Complex>, std::vector<Complex>>> clusters;
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto& c = clusters[find(i)];
    (i < static_cast<std::size_t>(n) ? c.first : c.second).push_back(all[i]);
  }
  double worst = 0.0;
  for (const auto& [root, c] : clusters) {
    if (c.first.size() != c.second.size()) return std::numeric_limits<double>::infinity();
    if (c.first.size() == 1) {
      worst = std::max(worst, std::abs(c.first[0] - c.second[0]));
      continue;
    }
    Complex ma = 0.0, mb = 0.0;
    for (const Complex& z : c.first) ma += z;
    for (const Complex& z : c.second) mb += z;
    worst = std::max(worst, std::abs(ma - mb) / double(c.first.size()));
  }
  return worst;
}

void write_eigenvalue_csv(std::ostream& out, const std::vector<Complex>& points) {
  out << "re,im\n";
  out.precision(17);
  for (const Complex& z : points) out << z.real() << ',' << z.imag() << '\n';
}

}  // namespace cirlaw
