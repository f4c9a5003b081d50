#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cirlaw/sampler.hpp"
#include "cirlaw/spectral.hpp"

using namespace cirlaw;

namespace {

// Area of {|z| <= 1, Re z <= x, Im z <= y} / pi by adaptive quadrature over x.
double quadrature_cdf(double x, double y) {
  const double right = std::min(x, 1.0);
  if (right <= -1.0) return 0.0;
  const auto slice = [y](double u) {
    const double h = std::sqrt(std::max(0.0, 1.0 - u * u));
    return std::clamp(std::min(y, h) + h, 0.0, 2.0 * h);
  };
  std::vector<double> cuts{-1.0};
  if (std::abs(y) < 1.0) {
    const double k = std::sqrt(1.0 - y * y);
    for (double c : {-k, k})
      if (c > -1.0 && c < right) cuts.push_back(c);
  }
  cuts.push_back(right);
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    area += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(slice, cuts[i], cuts[i + 1], 15, 1e-15);
  return area / std::numbers::pi;
}

VectorXcd sorted(VectorXcd v) {
  std::sort(v.data(), v.data() + v.size(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return v;
}

}  // namespace

TEST_CASE("eigenvalues of small fixed matrices") {
  const VectorXcd id = eigenvalues_dense(MatrixXd::Identity(3, 3));
  for (int i = 0; i < 3; ++i) CHECK(std::abs(id(i) - 1.0) < 1e-14);

  MatrixXd rot(2, 2);
  rot << 0, -1, 1, 0;
  const VectorXcd r = sorted(eigenvalues_dense(rot));
  CHECK(std::abs(r(0) - Complex(0, -1)) < 1e-14);
  CHECK(std::abs(r(1) - Complex(0, 1)) < 1e-14);

  CHECK_THROWS_AS(eigenvalues_dense(MatrixXd(2, 3)), InvalidInput);
  MatrixXd bad = MatrixXd::Zero(2, 2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(eigenvalues_dense(bad), InvalidInput);
}

TEST_CASE("trace and determinant consistency on random sign matrices") {
  Rng rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 20;
    const MatrixXd m = sample_row_sum_matrix(n, 0, RowModel::IID, rng);
    const VectorXcd ev = eigenvalues_dense(m);
    REQUIRE(ev.size() == n);
    CHECK(std::abs(ev.sum() - m.trace()) <= 1e-8 * n);
    const double det = m.partialPivLu().determinant();
    if (std::abs(det) > 0.5) CHECK(std::abs(ev.prod() - det) <= 1e-6 * std::abs(det));
  }
}

TEST_CASE("normalized ESD") {
  const int n = 16;
  const double sigma = spectral_sigma(n, 4);
  CHECK(sigma == doctest::Approx(std::sqrt(1.0 - 1.0 / 16)));
  const MatrixXd d = sigma * std::sqrt(double(n)) * MatrixXd::Identity(n, n);
  const EsdFunction esd = normalized_esd(d, 4);
  for (const Complex& z : esd.points()) CHECK(std::abs(z - 1.0) < 1e-12);
  CHECK_THROWS_AS(normalized_esd(MatrixXd::Ones(3, 3), 3), InvalidInput);
}

TEST_CASE("ESD function is a CDF") {
  Rng rng(11);
  const EsdFunction esd = normalized_esd(sample_row_sum_matrix(40, 0, RowModel::FixedSum, rng), 0);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(esd(inf, inf) == 1.0);
  CHECK(esd(-inf, 0.0) == 0.0);
  for (int i = 0; i + 1 < 30; ++i) {
    const double a = grid_coordinate(i, 30), b = grid_coordinate(i + 1, 30);
    for (int j = 0; j < 30; ++j) {
      const double y = grid_coordinate(j, 30);
      CHECK(esd(a, y) <= esd(b, y));
      CHECK(esd(y, a) <= esd(y, b));
    }
  }
}

TEST_CASE("circular CDF: closed form") {
  CHECK(circular_cdf(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(circular_cdf(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(circular_cdf(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(circular_cdf(-1, 0.3) == 0.0);
  CHECK(circular_cdf(5, 5) == 1.0);
}

TEST_CASE("circular CDF agrees with quadrature on a 21 x 21 grid") {
  double worst = 0.0;
  for (int i = 0; i < 21; ++i)
    for (int j = 0; j < 21; ++j) {
      const double x = grid_coordinate(i, 21), y = grid_coordinate(j, 21);
      worst = std::max(worst, std::abs(circular_cdf(x, y) - quadrature_cdf(x, y)));
    }
  CHECK(worst <= 1e-9);
}

TEST_CASE("grid-sup distance to the circular law") {
  const EsdFunction mass_at_zero(std::vector<Complex>{0.0});
  CHECK(ks_distance_to_circular(mass_at_zero, 101) >= 0.75);
  CHECK(grid_sup_distance(circular_cdf, circular_cdf, 51) == 0.0);

  Rng rng(12);
  std::uniform_real_distribution<double> unit;
  std::vector<Complex> disk;
  for (int i = 0; i < 1000000; ++i) disk.push_back(std::polar(std::sqrt(unit(rng)), 2 * std::numbers::pi * unit(rng)));
  const EsdFunction esd(disk);
  const double d = ks_distance_to_circular(esd, 101);
  CHECK(d >= 0.0);
  CHECK(d <= 0.005);
  // The bucketed sweep agrees with direct evaluation.
  const EsdFunction small(std::vector<Complex>(disk.begin(), disk.begin() + 500));
  CHECK(ks_distance_to_circular(small, 31) ==
        doctest::Approx(grid_sup_distance([&](double x, double y) { return small(x, y); }, circular_cdf, 31))
            .epsilon(1e-12));
}

TEST_CASE("outlier exclusion") {
  std::vector<Complex> pts{0.1, Complex(0.2, 0.3), normalized_outlier(100, 50)};
  CHECK(normalized_outlier(100, 50) > 1.1);
  const auto dropped = exclude_outlier(pts, 100, 50);
  REQUIRE(dropped.has_value());
  CHECK(*dropped == 2);
  CHECK(pts.size() == 2);
  std::vector<Complex> inside{0.1, 0.0};
  CHECK_FALSE(exclude_outlier(inside, 100, 0).has_value());
  CHECK(inside.size() == 2);
}

TEST_CASE("reduction: trivial cases") {
  MatrixXd one(1, 1);
  one << 1;
  const ReducedSpectrum r1 = spectrum_via_reduction(one);
  CHECK(r1.deterministic == 1.0);
  CHECK(r1.rest.size() == 0);

  const ReducedSpectrum ones = spectrum_via_reduction(MatrixXd::Ones(5, 5));
  CHECK(ones.deterministic == 5.0);
  CHECK(reduced_block(MatrixXd::Ones(5, 5)).isZero(0.0));
  for (int i = 0; i < 4; ++i) CHECK(std::abs(ones.rest(i)) < 1e-14);

  MatrixXd bad = MatrixXd::Ones(3, 3);
  bad(1, 2) = -1;
  CHECK_THROWS_AS(spectrum_via_reduction(bad), InvalidInput);
}

TEST_CASE("reduction: random n=12, s=2") {
  Rng rng(13);
  const MatrixXd m = sample_row_sum_matrix(12, 2, RowModel::FixedSum, rng);
  CHECK(reduction_match_error(m) <= 1e-7);
}

TEST_CASE("reduction identity over n = 3..30") {
  Rng rng(14);
  for (int n = 3; n <= 30; ++n)
    for (int s : {0, 1, 2, 3}) {
      if ((n + s) % 2) continue;
      for (int t = 0; t < 10; ++t) {
        const MatrixXd m = sample_row_sum_matrix(n, s, RowModel::FixedSum, rng);
        CHECK((m * VectorXd::Ones(n) - s * VectorXd::Ones(n)).isZero(0.0));
        CHECK(reduction_match_error(m) <= 1e-6);
      }
    }
}

TEST_CASE("the row sum is an eigenvalue") {
  Rng rng(15);
  for (int n = 10; n <= 30; n += 2) {
    const MatrixXd m = sample_row_sum_matrix(n, 2, RowModel::FixedSum, rng);
    const VectorXcd ev = eigenvalues_dense(m);
    CHECK((ev.array() - 2.0).abs().minCoeff() <= 1e-8);
  }
}

TEST_CASE("multiset matching") {
  VectorXcd a(3), b(3);
  a << 1.0, Complex(0, 1), 2.0;
  b << 2.0, 1.0 + 1e-9, Complex(0, 1);
  CHECK(multiset_match_error(a, b) == doctest::Approx(1e-9));
  CHECK(std::isinf(multiset_match_error(a, VectorXcd(2))));

  // A split double root: pairs differ by 1e-8, the cluster means agree.
  VectorXcd split(3), root(3);
  split << 1e-8, -1e-8, 3.0;
  root << 0.0, 0.0, 3.0;
  CHECK(multiset_match_error(split, root) == doctest::Approx(1e-8));
  CHECK(cluster_match_error(split, root) == 0.0);
  VectorXcd off(3);
  off << 0.0, 0.5, 3.0;
  CHECK(std::isinf(cluster_match_error(off, root)));
}

TEST_CASE("eigenvalue CSV") {
  std::ostringstream out;
  write_eigenvalue_csv(out, {Complex(0.5, -0.25)});
  CHECK(out.str() == "re,im\n0.5,-0.25\n");
  std::ostringstream empty;
  write_eigenvalue_csv(empty, {});
  CHECK(empty.str() == "re,im\n");
}
