#include <doctest.h>

#include <cmath>

#include "cirlaw/exact.hpp"
#include "cirlaw/logdet.hpp"
#include "cirlaw/singular.hpp"

using namespace cirlaw;

TEST_CASE("singular values: fixed cases") {
  const SingularSpectrum id = singular_values(MatrixXd::Identity(3, 3));
  for (int i = 0; i < 3; ++i) CHECK(id.values(i) == doctest::Approx(1.0));

  const SingularSpectrum d = singular_values(Eigen::Vector3d(3, 1, 5).asDiagonal().toDenseMatrix());
  CHECK(d.values(0) == doctest::Approx(5.0));
  CHECK(d.values(1) == doctest::Approx(3.0));
  CHECK(d.values(2) == doctest::Approx(1.0));

  MatrixXd twin(3, 3);
  twin << 1, -1, 1, 1, -1, 1, -1, -1, 1;
  CHECK(singular_values(twin).smallest() <= 1e-10);
}

TEST_CASE("singular spectrum invariants") {
  Rng rng(30);
  for (int t = 0; t < 50; ++t) {
    const MatrixXcd a = sample_rows(6 + t % 5, 12, 0, RowModel::IID, rng).cast<Complex>() * Complex(0.3, 0.7);
    const SingularSpectrum sv = singular_values(a);
    for (Eigen::Index i = 1; i < sv.values.size(); ++i) CHECK(sv.values(i) <= sv.values(i - 1));
    CHECK(std::abs(sv.values.squaredNorm() - a.squaredNorm()) <= 1e-8 * a.squaredNorm());
  }
}

TEST_CASE("least singular tail at n=2, s=1 counts exactly singular draws") {
  const long trials = 10000;
  Rng rng(31), replay(31);
  const TailExperimentReport r =
      least_singular_tail(2, 1, MatrixXd::Zero(2, 2), {0.0, 10.0}, trials, RowModel::UnionS, rng);
  long singular = 0;
  for (long t = 0; t < trials; ++t) {
    const MatrixXd x = sample_row_sum_matrix(2, 1, RowModel::UnionS, replay);
    singular += determinant(*integer_matrix(x)) == 0;
  }
  CHECK(r.hits[1] == singular);
  CHECK(r.hits[0] >= r.hits[1]);
  CHECK(r.monotone());
  // 5 of the 9 matrices with rows in S = {(1,-1), (-1,1), (1,1)} are singular.
  const double p = 5.0 / 9.0;
  CHECK(std::abs(r.frequency(1) - p) <= 4.0 * std::sqrt(p * (1 - p) / trials));
}

TEST_CASE("least singular tail is monotone in A") {
  Rng rng(32);
  const TailExperimentReport r =
      least_singular_tail(9, 0, MatrixXd::Zero(9, 9), {0.0, 0.5, 1.0, 2.0, 10.0}, 300, RowModel::UnionS, rng);
  CHECK(r.monotone());
  for (std::size_t i = 0; i < r.hits.size(); ++i) CHECK(r.hits[i] <= r.trials);
  CHECK_THROWS_AS(least_singular_tail(3, 0, MatrixXd::Zero(2, 2), {1.0}, 1, RowModel::IID, rng), InvalidInput);
}

TEST_CASE("interlacing") {
  const MatrixXd diag = Eigen::Vector4d(4, 3, 2, 1).asDiagonal();
  const InterlacingReport d = interlacing_check(diag, 1);
  CHECK(d.holds);
  CHECK(interlacing_check(MatrixXd::Zero(5, 5), 2).holds);

  Rng rng(33);
  for (int t = 0; t < 1000; ++t) {
    const MatrixXd a = sample_row_sum_matrix(10, 0, RowModel::IID, rng);
    CHECK(interlacing_check(a, 3).holds);
  }
}

TEST_CASE("negative second moment identity") {
  MatrixXd row(1, 3);
  row << 1, 2, 2;
  const MomentIdentity one = negative_second_moment_check(row);
  CHECK(one.lhs == doctest::Approx(1.0 / 9.0));
  CHECK(one.rhs == doctest::Approx(1.0 / 9.0));

  MatrixXd orth(2, 3);
  orth << 2, 0, 0, 0, 0, 3;
  const MomentIdentity o = negative_second_moment_check(orth);
  CHECK(o.lhs == doctest::Approx(1.0 / 4 + 1.0 / 9));
  CHECK(o.rhs == doctest::Approx(1.0 / 4 + 1.0 / 9));

  Rng rng(34);
  int checked = 0;
  while (checked < 100) {
    const MatrixXd a = sample_rows(5, 8, 0, RowModel::IID, rng);
    if (singular_values(a).smallest() <= 1e-10) continue;
    ++checked;
    const MomentIdentity id = negative_second_moment_check(a);
    CHECK(id.relative_gap <= 1e-9);
    // dist^{-2}(last row, span of the others) <= sum sigma^{-2}
    const double last = distance_to_span(a.row(4).transpose(), a.topRows(4).transpose());
    CHECK(1.0 / (last * last) <= id.lhs * (1 + 1e-12));
  }

  MatrixXd dup(2, 3);
  dup << 1, 1, 1, 1, 1, 1;
  CHECK_THROWS_AS(negative_second_moment_check(dup), InvalidInput);
}

TEST_CASE("exact adjugate") {
  Rng rng(35);
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 5;
    const MatrixXd x = sample_row_sum_matrix(n, 0, RowModel::IID, rng);
    const IntegerMatrix xi = *integer_matrix(x);
    const IntegerMatrix adj = *exact_adjugate(x);
    const Integer det = determinant(xi);
    // adj(X) X = det(X) I
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Integer acc = 0;
        for (int k = 0; k < n; ++k) acc += adj(i, k) * xi(k, j);
        CHECK(acc == (i == j ? det : Integer(0)));
      }
  }
  MatrixXd frac = MatrixXd::Identity(2, 2) * 0.5;
  CHECK_FALSE(exact_adjugate(frac).has_value());
}

TEST_CASE("cofactor identity") {
  CHECK(cofactor_identity_check(MatrixXd::Identity(3, 3), Eigen::Vector3d(0, 1, 0)) == 0.0);
  const MatrixXd d = Eigen::Vector2d(2, 3).asDiagonal();
  CHECK(*exact_adjugate(d) == [] {
    IntegerMatrix c(2, 2);
    c(0, 0) = 3, c(1, 1) = 2;
    return c;
  }());
  CHECK(cofactor_identity_check(d, Eigen::Vector2d(1, 0)) == 0.0);

  Rng rng(36);
  std::normal_distribution<double> g;
  int checked = 0;
  while (checked < 100) {
    const MatrixXd x = sample_row_sum_matrix(5, 0, RowModel::IID, rng);
    if (determinant(*integer_matrix(x)) == 0) {
      CHECK_THROWS_AS(cofactor_identity_check(x, Eigen::VectorXd::Unit(5, 0)), InvalidInput);
      continue;
    }
    ++checked;
    VectorXd a(5);
    for (int i = 0; i < 5; ++i) a(i) = g(rng);
    a.normalize();
    CHECK(cofactor_identity_check(x, a) <= 1e-10);
  }
  CHECK_THROWS_AS(cofactor_identity_check(MatrixXd::Identity(11, 11), VectorXd::Unit(11, 0)), InvalidInput);
}
