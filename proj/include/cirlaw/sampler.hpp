#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>

#include "cirlaw/core.hpp"
#include "cirlaw/exact.hpp"

namespace cirlaw {

/// Row laws. FixedSum: uniform over vectors with sum s. UnionS: uniform over
/// vectors with sum s-1 or s+1. IID: independent entries with P(+1) = 1/2 + s/2n.
enum class RowModel { FixedSum, UnionS, IID };

RowModel parse_row_model(std::string_view name);
std::string to_string(RowModel model);

/// Entry law with mean s/n.
struct SkewedBernoulli {
  int n = 1;
  int s = 0;

  static SkewedBernoulli make(int n, int s);
  Rational p_plus() const { return ratio(n + s, 2 * n); }
  Rational p_minus() const { return ratio(n - s, 2 * n); }
};

/// The set of +-1 vectors of length n with entry sum s-1 or s+1.
struct UnionSetS {
  int n = 0;
  int s = 0;
  Integer count_lower;  // C(n, (n+s-1)/2), sum s-1
  Integer count_upper;  // C(n, (n+s+1)/2), sum s+1

  static UnionSetS make(int n, int s);
  Integer size() const { return count_lower + count_upper; }
  bool contains(const SignVector& x) const;
  /// Probability that a uniform element has sum s+1.
  Rational upper_probability() const { return ratio(count_upper, size()); }
};

enum class CollapsedType { Type1, Type2 };  // Type1: sum s+1, Type2: sum s-1

/// Law of x_1 + ... + x_{n0} jointly with the type, for x uniform on UnionSetS.
struct CollapsedLaw {
  int n = 0;
  int n0 = 0;
  int s = 0;
  CollapsedType type = CollapsedType::Type1;
  std::map<int, Rational> pmf;

  Rational total() const;
};

/// Throws unless a length-n vector with sum s exists.
void require_fixed_sum_feasible(int n, int s);
/// Throws unless UnionSetS(n, s) is well defined and both classes are non-empty.
void require_union_feasible(int n, int s);

/// Dimension of the S-row block for a nominal size n: n itself when n + s is
/// odd, otherwise n - 1 (the block left after peeling the all-ones direction
/// off a size-n fixed-sum matrix).
int union_s_dimension(int n, int s);

SignVector sample_fixed_sum_vector(int n, int s, Rng& rng);
SignVector sample_union_s_vector(int n, int s, Rng& rng);
SignVector sample_skewed_bernoulli_vector(const SkewedBernoulli& model, Rng& rng);
SignVector sample_row(int n, int s, RowModel model, Rng& rng);

/// rows x n matrix with independent rows from the chosen law.
MatrixXd sample_rows(int rows, int n, int s, RowModel model, Rng& rng);
/// n x n matrix with independent rows from the chosen law.
inline MatrixXd sample_row_sum_matrix(int n, int s, RowModel model, Rng& rng) {
  return sample_rows(n, n, s, model, rng);
}

CollapsedLaw collapsed_coordinate_law(int n, int n0, int s, CollapsedType type);

struct TypeSplit {
  Rational type1;  // P(sum = s+1)
  Rational type2;  // P(sum = s-1)
  /// Whether both are >= (1-eps)/4; only meaningful when |s| <= (1-eps) n.
  bool comparable = false;
  /// Exact lower bound min(type1, type2) = (n - |s| + 1) / (2n + 2).
  Rational min_probability;
};

TypeSplit type_split_probabilities(int n, int s, double eps);

}  // namespace cirlaw
