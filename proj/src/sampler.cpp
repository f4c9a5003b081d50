#include "cirlaw/sampler.hpp"

#include <cstdlib>
#include <numeric>
#include <vector>

namespace cirlaw {

RowModel parse_row_model(std::string_view name) {
  if (name == "fixed-sum" || name == "fixed") return RowModel::FixedSum;
  if (name == "union-s" || name == "union") return RowModel::UnionS;
  if (name == "iid") return RowModel::IID;
  throw InvalidInput("unknown row model '" + std::string(name) + "' (expected fixed-sum, union-s or iid)");
}

std::string to_string(RowModel model) {
  switch (model) {
    case RowModel::FixedSum: return "fixed-sum";
    case RowModel::UnionS: return "union-s";
    case RowModel::IID: return "iid";
  }
  return "?";
}

SkewedBernoulli SkewedBernoulli::make(int n, int s) {
  if (n < 1) throw InvalidInput("skewed Bernoulli: n must be positive");
  if (std::abs(s) > n) throw InvalidInput("skewed Bernoulli: |s| must not exceed n");
  return {n, s};
}

void require_fixed_sum_feasible(int n, int s) {
  if (n < 1) throw InvalidInput("fixed-sum: n must be positive");
  if (std::abs(s) > n) throw InvalidInput("fixed-sum: |s| > n (n=" + std::to_string(n) + ", s=" + std::to_string(s) + ")");
  if ((n + s) % 2 != 0)
    throw InvalidInput("fixed-sum: n + s must be even (n=" + std::to_string(n) + ", s=" + std::to_string(s) + ")");
}

void require_union_feasible(int n, int s) {
  if (n < 1) throw InvalidInput("union S: n must be positive");
  if ((n + s) % 2 == 0)
    throw InvalidInput("union S: n + s must be odd (n=" + std::to_string(n) + ", s=" + std::to_string(s) + ")");
  // Both s-1 and s+1 are attainable iff |s| <= n-1.
  if (std::abs(s) > n - 1)
    throw InvalidInput("union S: |s| must be at most n-1 (n=" + std::to_string(n) + ", s=" + std::to_string(s) + ")");
}

int union_s_dimension(int n, int s) { return (n + s) % 2 != 0 ? n : n - 1; }

UnionSetS UnionSetS::make(int n, int s) {
  require_union_feasible(n, s);
  return {n, s, binomial(n, (n + s - 1) / 2), binomial(n, (n + s + 1) / 2)};
}

bool UnionSetS::contains(const SignVector& x) const {
  return x.size() == n && (x.sum() == s - 1 || x.sum() == s + 1);
}

Rational CollapsedLaw::total() const {
  Rational t = 0;
  for (const auto& [k, p] : pmf) t += p;
  return t;
}

namespace {

// Uniformly places `plus` entries equal to +1 among n slots (partial Fisher-Yates).
SignVector random_subset_vector(int n, int plus, Rng& rng) {
  const bool mark_plus = plus <= n - plus;
  const int marked = mark_plus ? plus : n - plus;
  std::vector<int> slots(static_cast<size_t>(n));
  std::iota(slots.begin(), slots.end(), 0);
  Eigen::VectorXi v = Eigen::VectorXi::Constant(n, mark_plus ? -1 : 1);
  for (int i = 0; i < marked; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(slots[i], slots[pick(rng)]);
    v(slots[i]) = mark_plus ? 1 : -1;
  }
  return SignVector(std::move(v));
}

}  // namespace

SignVector sample_fixed_sum_vector(int n, int s, Rng& rng) {
  require_fixed_sum_feasible(n, s);
  SignVector x = random_subset_vector(n, (n + s) / 2, rng);
  if (x.sum() != s) throw std::logic_error("fixed-sum sampler produced wrong sum");
  return x;
}

SignVector sample_union_s_vector(int n, int s, Rng& rng) {
  const UnionSetS set = UnionSetS::make(n, s);
  std::bernoulli_distribution upper(to_double(set.upper_probability()));
  const int target = upper(rng) ? s + 1 : s - 1;
  SignVector x = random_subset_vector(n, (n + target) / 2, rng);
  if (!set.contains(x)) throw std::logic_error("union S sampler left the set");
  return x;
}

SignVector sample_skewed_bernoulli_vector(const SkewedBernoulli& model, Rng& rng) {
  std::bernoulli_distribution plus(to_double(model.p_plus()));
  Eigen::VectorXi v(model.n);
  for (int i = 0; i < model.n; ++i) v(i) = plus(rng) ? 1 : -1;
  return SignVector(std::move(v));
}

SignVector sample_row(int n, int s, RowModel model, Rng& rng) {
  switch (model) {
    case RowModel::FixedSum: return sample_fixed_sum_vector(n, s, rng);
    case RowModel::UnionS: return sample_union_s_vector(n, s, rng);
    case RowModel::IID: return sample_skewed_bernoulli_vector(SkewedBernoulli::make(n, s), rng);
  }
  throw InvalidInput("unknown row model");
}

MatrixXd sample_rows(int rows, int n, int s, RowModel model, Rng& rng) {
  switch (model) {
    case RowModel::FixedSum: require_fixed_sum_feasible(n, s); break;
    case RowModel::UnionS: require_union_feasible(n, s); break;
    case RowModel::IID: SkewedBernoulli::make(n, s); break;
  }
  MatrixXd m(rows, n);
  for (int i = 0; i < rows; ++i) m.row(i) = sample_row(n, s, model, rng).as<double>().transpose();
  return m;
}

CollapsedLaw collapsed_coordinate_law(int n, int n0, int s, CollapsedType type) {
  if (n0 < 1 || n0 > n) throw InvalidInput("collapsed law: need 1 <= n0 <= n");
  const UnionSetS set = UnionSetS::make(n, s);
  const int total = type == CollapsedType::Type1 ? s + 1 : s - 1;
  const int rest = n - n0;
  CollapsedLaw law{n, n0, s, type, {}};
  for (int k = -n0; k <= n0; k += 2) {
    const int tail = total - k;  // sum of the remaining n - n0 coordinates
    if ((rest + tail) % 2 != 0 || std::abs(tail) > rest) continue;
    const Integer ways = binomial(n0, (n0 + k) / 2) * binomial(rest, (rest + tail) / 2);
    if (ways == 0) continue;
    law.pmf.emplace(k, ratio(ways, set.size()));
  }
  return law;
}

TypeSplit type_split_probabilities(int n, int s, double eps) {
  const UnionSetS set = UnionSetS::make(n, s);
  TypeSplit out;
  out.type1 = ratio(set.count_upper, set.size());
  out.type2 = ratio(set.count_lower, set.size());
  out.min_probability = out.type1 < out.type2 ? out.type1 : out.type2;
  const Rational floor = (Rational(1) - exact_rational(eps)) / 4;
  out.comparable = out.type1 >= floor && out.type2 >= floor;
  return out;
}

}  // namespace cirlaw
