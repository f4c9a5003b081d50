#include <doctest.h>

#include <random>
#include <vector>

#include "cirlaw/exact.hpp"

using namespace cirlaw;

namespace {

// Laplace expansion along the first row.
long laplace_det(const std::vector<std::vector<long>>& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  long total = 0;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::vector<long>> minor;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<long> row;
      for (std::size_t c = 0; c < n; ++c)
        if (c != j) row.push_back(a[i][c]);
      minor.push_back(row);
    }
    total += (j % 2 ? -1 : 1) * a[0][j] * laplace_det(minor);
  }
  return total;
}

}  // namespace

TEST_CASE("binomial matches Pascal's triangle") {
  std::vector<std::vector<Integer>> pascal(41);
  for (int n = 0; n <= 40; ++n) {
    pascal[n].assign(n + 1, 1);
    for (int k = 1; k < n; ++k) pascal[n][k] = pascal[n - 1][k - 1] + pascal[n - 1][k];
  }
  for (int n = 0; n <= 40; ++n)
    for (int k = 0; k <= n; ++k) CHECK(binomial(n, k) == pascal[n][k]);
  CHECK(binomial(5, -1) == 0);
  CHECK(binomial(5, 6) == 0);
}

TEST_CASE("ratio is canonical") {
  const Rational q = ratio(6, 4);
  CHECK(q.get_num() == 3);
  CHECK(q.get_den() == 2);
  CHECK(ratio(0, 7) == 0);
}

TEST_CASE("exact_rational recovers the binary value") {
  CHECK(exact_rational(0.5) == Rational(1, 2));
  CHECK(exact_rational(0.1) == ratio(Integer("3602879701896397"), Integer("36028797018963968")));
  CHECK(exact_rational(-3.0) == -3);
}

TEST_CASE("integer_matrix rejects fractional entries") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 3, 4;
  CHECK(integer_matrix(m).has_value());
  m(1, 1) = 4.5;
  CHECK_FALSE(integer_matrix(m).has_value());
}

TEST_CASE("Bareiss determinant against Laplace expansion") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> entry(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 6;
    std::vector<std::vector<long>> a(n, std::vector<long>(n));
    IntegerMatrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = a[i][j] = entry(rng);
    CHECK(determinant(m) == laplace_det(a));
  }
}

TEST_CASE("determinant needs pivoting on a zero leading entry") {
  IntegerMatrix m(2, 2);
  m(0, 0) = 0, m(0, 1) = 1, m(1, 0) = 1, m(1, 1) = 0;
  CHECK(determinant(m) == -1);
}

TEST_CASE("inverse, rank and solve") {
  RationalMatrix a(2, 2);
  a(0, 0) = 1, a(0, 1) = 1, a(1, 0) = 1, a(1, 1) = -1;
  const auto inv = inverse(a);
  REQUIRE(inv.has_value());
  CHECK((*inv)(0, 0) == Rational(1, 2));
  CHECK((*inv)(1, 1) == Rational(-1, 2));
  CHECK(multiply(a, *inv) == RationalMatrix::identity(2));
  CHECK(rank(a) == 2);

  RationalMatrix s(2, 3);
  s(0, 0) = 1, s(0, 1) = 2, s(0, 2) = 3;
  s(1, 0) = 2, s(1, 1) = 4, s(1, 2) = 6;
  CHECK(rank(s) == 1);
  CHECK_FALSE(inverse(RationalMatrix(2, 2)).has_value());

  const auto x = solve(s, {6, 12});
  REQUIRE(x.has_value());
  CHECK((*x)[0] + 2 * (*x)[1] + 3 * (*x)[2] == 6);
  CHECK_FALSE(solve(s, {1, 1}).has_value());
}

TEST_CASE("random rational inverses are exact") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> entry(-5, 5);
  for (int trial = 0; trial < 50; ++trial) {
    RationalMatrix a(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) a(i, j) = ratio(entry(rng), 1 + trial % 3);
    const auto inv = inverse(a);
    if (!inv) {
      CHECK(rank(a) < 4);
      continue;
    }
    CHECK(multiply(*inv, a) == RationalMatrix::identity(4));
    CHECK(transpose(transpose(a)) == a);
  }
}
