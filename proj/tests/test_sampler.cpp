#include <doctest.h>

#include <map>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "cirlaw/sampler.hpp"

using namespace cirlaw;

namespace {

int encode(const SignVector& x) {
  int code = 0;
  for (int i = 0; i < x.size(); ++i) code = 2 * code + (x(i) > 0);
  return code;
}

// All sign vectors of length n, as bit codes, with their sums.
std::map<int, int> all_patterns(int n) {
  std::map<int, int> sums;
  for (int code = 0; code < (1 << n); ++code) {
    int sum = 0;
    for (int i = 0; i < n; ++i) sum += (code >> i) & 1 ? 1 : -1;
    sums[code] = sum;
  }
  return sums;
}

// Pearson statistic against a uniform law on `support` codes.
bool chi_square_uniform(const std::map<int, long>& counts, std::size_t support, long draws, double alpha) {
  if (counts.size() > support) return false;
  if (support == 1) return counts.size() == 1;
  const double expected = double(draws) / support;
  double stat = 0.0;
  for (const auto& [code, c] : counts) stat += (c - expected) * (c - expected) / expected;
  stat += expected * double(support - counts.size());  // unseen outcomes
  boost::math::chi_squared dist(double(support - 1));
  return stat <= boost::math::quantile(dist, 1.0 - alpha);
}

}  // namespace

TEST_CASE("SignVector validates entries") {
  Eigen::VectorXi v(3);
  v << 1, -1, 1;
  const SignVector x(v);
  CHECK(x.sum() == 1);
  CHECK(x.size() == 3);
  v(1) = 0;
  CHECK_THROWS_AS(SignVector{v}, InvalidInput);
  CHECK_THROWS_AS(SignVector{Eigen::VectorXi()}, InvalidInput);
}

TEST_CASE("row model names") {
  CHECK(parse_row_model("fixed-sum") == RowModel::FixedSum);
  CHECK(parse_row_model("union-s") == RowModel::UnionS);
  CHECK(parse_row_model("iid") == RowModel::IID);
  CHECK(to_string(RowModel::UnionS) == "union-s");
  CHECK_THROWS_AS(parse_row_model("gaussian"), InvalidInput);
}

TEST_CASE("fixed-sum sampler: small cases") {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const SignVector x = sample_fixed_sum_vector(4, 4, rng);
    CHECK(x.entries() == Eigen::VectorXi::Ones(4));
  }
  long first_plus = 0;
  for (int t = 0; t < 10000; ++t) {
    const SignVector x = sample_fixed_sum_vector(2, 0, rng);
    REQUIRE(x.sum() == 0);
    first_plus += x(0) > 0;
  }
  CHECK(first_plus == doctest::Approx(5000).epsilon(0.04));
}

TEST_CASE("fixed-sum sampler rejects infeasible parameters") {
  Rng rng(1);
  CHECK_THROWS_AS(sample_fixed_sum_vector(5, 0, rng), InvalidInput);
  CHECK_THROWS_AS(sample_fixed_sum_vector(4, 6, rng), InvalidInput);
  CHECK_THROWS_AS(sample_fixed_sum_vector(0, 0, rng), InvalidInput);
}

TEST_CASE("fixed-sum sampler is uniform (n=6, s=2)") {
  Rng rng(2024);
  std::map<int, long> counts;
  const long draws = 15000;
  for (long t = 0; t < draws; ++t) {
    const SignVector x = sample_fixed_sum_vector(6, 2, rng);
    REQUIRE(x.sum() == 2);
    ++counts[encode(x)];
  }
  CHECK(counts.size() == 15);
  CHECK(chi_square_uniform(counts, 15, draws, 0.01));
}

TEST_CASE("fixed-sum and union samplers are uniform for every n <= 6") {
  Rng rng(7);
  for (int n = 1; n <= 6; ++n) {
    const auto patterns = all_patterns(n);
    for (int s = -n; s <= n; ++s) {
      std::size_t fixed_support = 0, union_support = 0;
      for (const auto& [code, sum] : patterns) {
        fixed_support += sum == s;
        union_support += sum == s - 1 || sum == s + 1;
      }
      if ((n + s) % 2 == 0) {
        std::map<int, long> counts;
        const long draws = 10000 * long(fixed_support);
        for (long t = 0; t < draws; ++t) {
          const SignVector x = sample_fixed_sum_vector(n, s, rng);
          REQUIRE(x.sum() == s);
          ++counts[encode(x)];
        }
        CHECK(chi_square_uniform(counts, fixed_support, draws, 0.01));
      } else if (std::abs(s) <= n - 1) {
        std::map<int, long> counts;
        const long draws = 10000 * long(union_support);
        for (long t = 0; t < draws; ++t) {
          const SignVector x = sample_union_s_vector(n, s, rng);
          REQUIRE((x.sum() == s - 1 || x.sum() == s + 1));
          ++counts[encode(x)];
        }
        CHECK(chi_square_uniform(counts, union_support, draws, 0.01));
      }
    }
  }
}

TEST_CASE("union set S: counts and membership") {
  const UnionSetS u = UnionSetS::make(4, 1);
  CHECK(u.count_lower == 6);
  CHECK(u.count_upper == 4);
  CHECK(u.upper_probability() == Rational(2, 5));
  CHECK(UnionSetS::make(2, 1).size() == 3);
  CHECK(UnionSetS::make(3, 0).size() == 6);
  Eigen::VectorXi v(4);
  v << 1, 1, 1, -1;
  CHECK(u.contains(SignVector(v)));
  v << 1, 1, -1, -1;
  CHECK(u.contains(SignVector(v)));
  v << 1, 1, 1, 1;
  CHECK_FALSE(u.contains(SignVector(v)));
  CHECK_THROWS_AS(UnionSetS::make(4, 0), InvalidInput);
  CHECK_THROWS_AS(UnionSetS::make(3, 3), InvalidInput);
  CHECK(union_s_dimension(100, 0) == 99);
  CHECK(union_s_dimension(100, 1) == 100);
}

TEST_CASE("union sampler: class frequency matches the exact split") {
  Rng rng(3);
  const long draws = 40000;
  long upper = 0;
  for (long t = 0; t < draws; ++t) upper += sample_union_s_vector(4, 1, rng).sum() == 2;
  const double p = 0.4;
  const double band = 4.0 * std::sqrt(p * (1 - p) / draws);
  CHECK(std::abs(double(upper) / draws - p) <= band);
}

TEST_CASE("skewed Bernoulli sampler") {
  Rng rng(4);
  const SkewedBernoulli all_plus = SkewedBernoulli::make(5, 5);
  CHECK(all_plus.p_plus() == 1);
  for (int t = 0; t < 100; ++t) CHECK(sample_skewed_bernoulli_vector(all_plus, rng).sum() == 5);

  const SkewedBernoulli fair = SkewedBernoulli::make(2, 0);
  std::map<int, long> counts;
  for (int t = 0; t < 40000; ++t) ++counts[encode(sample_skewed_bernoulli_vector(fair, rng))];
  CHECK(chi_square_uniform(counts, 4, 40000, 0.01));

  const SkewedBernoulli skew = SkewedBernoulli::make(10, 2);
  CHECK(skew.p_plus() + skew.p_minus() == 1);
  double total = 0.0;
  for (int t = 0; t < 100000; ++t) total += sample_skewed_bernoulli_vector(skew, rng).sum();
  CHECK(std::abs(total / (100000.0 * 10) - 0.2) <= 0.01);
  CHECK_THROWS_AS(SkewedBernoulli::make(3, 4), InvalidInput);
}

TEST_CASE("matrices: row laws") {
  Rng rng(5);
  const MatrixXd big = sample_row_sum_matrix(1000, 0, RowModel::FixedSum, rng);
  CHECK((big.rowwise().sum().array() == 0.0).all());
  CHECK((big.array().abs() == 1.0).all());

  const MatrixXd iid = sample_row_sum_matrix(50, 10, RowModel::IID, rng);
  const double sd = std::sqrt((1.0 - 0.04) / 2500.0);
  CHECK(std::abs(iid.mean() - 0.2) <= 3.0 * sd);

  const MatrixXd u = sample_rows(30, 9, 0, RowModel::UnionS, rng);
  for (int i = 0; i < 30; ++i) CHECK(std::abs(u.row(i).sum()) == 1.0);
}

TEST_CASE("per-trial streams are reproducible and distinct") {
  Rng a = derive_stream(42, 3), b = derive_stream(42, 3), c = derive_stream(42, 4);
  const MatrixXd ma = sample_row_sum_matrix(8, 0, RowModel::FixedSum, a);
  CHECK(ma == sample_row_sum_matrix(8, 0, RowModel::FixedSum, b));
  CHECK_FALSE(ma == sample_row_sum_matrix(8, 0, RowModel::FixedSum, c));
}

TEST_CASE("collapsed coordinate law against enumeration of S") {
  const CollapsedLaw law = collapsed_coordinate_law(2, 1, 1, CollapsedType::Type1);
  REQUIRE(law.pmf.size() == 1);
  CHECK(law.pmf.at(1) == Rational(1, 3));

  for (int n = 2; n <= 8; ++n) {
    const auto patterns = all_patterns(n);
    for (int s = -(n - 1); s <= n - 1; ++s) {
      if ((n + s) % 2 == 0) continue;
      const TypeSplit split = type_split_probabilities(n, s, 0.1);
      for (int n0 = 1; n0 <= n; ++n0) {
        for (CollapsedType type : {CollapsedType::Type1, CollapsedType::Type2}) {
          const int target = type == CollapsedType::Type1 ? s + 1 : s - 1;
          std::map<int, long> hits;
          long members = 0;
          for (const auto& [code, sum] : patterns) {
            if (sum != s - 1 && sum != s + 1) continue;
            ++members;
            if (sum != target) continue;
            int head = 0;
            for (int i = 0; i < n0; ++i) head += (code >> (n - 1 - i)) & 1 ? 1 : -1;
            ++hits[head];
          }
          const CollapsedLaw law = collapsed_coordinate_law(n, n0, s, type);
          std::map<int, Rational> expected;
          for (const auto& [k, c] : hits) expected[k] = ratio(c, members);
          std::map<int, Rational> got;
          for (const auto& [k, p] : law.pmf)
            if (p != 0) got[k] = p;
          CHECK(got == expected);
          CHECK(law.total() == (type == CollapsedType::Type1 ? split.type1 : split.type2));
          for (const auto& [k, p] : law.pmf) {
            CHECK(std::abs(k) <= n0);
            CHECK((k + n0) % 2 == 0);
          }
        }
      }
    }
  }
}

TEST_CASE("collapsed law matches conditioned union draws (n=6, n0=2, s=1, Type2)") {
  const CollapsedLaw law = collapsed_coordinate_law(6, 2, 1, CollapsedType::Type2);
  Rng rng(6);
  std::map<int, long> counts;
  long kept = 0;
  for (int t = 0; t < 100000; ++t) {
    const SignVector x = sample_union_s_vector(6, 1, rng);
    if (x.sum() != 0) continue;
    ++kept;
    ++counts[x(0) + x(1)];
  }
  double tv = 0.0;
  for (const auto& [k, p] : law.pmf) tv += std::abs(to_double(p / law.total()) - double(counts[k]) / kept);
  CHECK(tv / 2 <= 0.01);
}

TEST_CASE("type split probabilities") {
  TypeSplit t = type_split_probabilities(3, 0, 0.1);
  CHECK(t.type1 == Rational(1, 2));
  CHECK(t.type2 == Rational(1, 2));
  t = type_split_probabilities(4, 1, 0.1);
  CHECK(t.type1 == Rational(2, 5));
  CHECK(t.type2 == Rational(3, 5));
  t = type_split_probabilities(101, 0, 0.1);
  CHECK(t.type1 + t.type2 == 1);
  CHECK(to_double(t.type1) >= 0.49);
  CHECK(to_double(t.type1) <= 0.51);
  CHECK(t.comparable);

  // The exact minimum is (n - |s| + 1)/(2n + 2), which drops below (1 - eps)/4
  // once |s| is a large fraction of n.
  for (int n = 3; n <= 60; ++n)
    for (int s = -(n - 1); s <= n - 1; ++s) {
      if ((n + s) % 2 == 0) continue;
      const TypeSplit ts = type_split_probabilities(n, s, 0.2);
      CHECK(ts.min_probability == ratio(n - std::abs(s) + 1, 2 * n + 2));
      CHECK(ts.min_probability == std::min(ts.type1, ts.type2));
    }
  const TypeSplit far = type_split_probabilities(101, 80, 0.2);
  CHECK_FALSE(far.comparable);
}

TEST_CASE("skewed Bernoulli conditioned on S (n=9, s=0) is uniform on S") {
  Rng rng(8);
  const SkewedBernoulli law = SkewedBernoulli::make(9, 0);
  const UnionSetS set = UnionSetS::make(9, 0);
  std::map<int, long> counts;
  long kept = 0;
  for (int t = 0; t < 1000000; ++t) {
    const SignVector x = sample_skewed_bernoulli_vector(law, rng);
    if (!set.contains(x)) continue;
    ++kept;
    ++counts[encode(x)];
  }
  const double uniform = 1.0 / set.size().get_d();
  double tv = 0.0;
  for (const auto& [code, c] : counts) tv += std::abs(double(c) / kept - uniform);
  tv += uniform * (set.size().get_d() - counts.size());
  CHECK(tv / 2 <= 0.02);
}

TEST_CASE("skewed Bernoulli conditioned on S is not uniform when s != 0") {
  // Within each sum class the conditioned law is uniform, but the classes are
  // reweighted by p_plus / p_minus relative to the uniform law on S.
  const int n = 8, s = 1;
  const SkewedBernoulli law = SkewedBernoulli::make(n, s);
  const UnionSetS set = UnionSetS::make(n, s);
  const Rational odds = law.p_plus() / law.p_minus();
  const Rational up = set.count_upper * odds, low = set.count_lower;
  const Rational conditioned_upper = up / (up + low);
  const Rational tv = abs(conditioned_upper - set.upper_probability());
  CHECK(conditioned_upper == Rational(36, 71));
  CHECK(to_double(tv) > 0.06);

  Rng rng(9);
  long kept = 0, upper = 0;
  for (int t = 0; t < 200000; ++t) {
    const SignVector x = sample_skewed_bernoulli_vector(law, rng);
    if (!set.contains(x)) continue;
    ++kept;
    upper += x.sum() == s + 1;
  }
  const double p = to_double(conditioned_upper);
  CHECK(std::abs(double(upper) / kept - p) <= 4.0 * std::sqrt(p * (1 - p) / kept));
}
