#include "cirlaw/gap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cirlaw {

Gap Gap::symmetric(MatrixXd generators, std::vector<long> bounds) {
  Gap q;
  q.base = VectorXd::Zero(generators.rows());
  q.generators = std::move(generators);
  for (long b : bounds) {
    q.lower.push_back(-b);
    q.upper.push_back(b);
  }
  q.validate();
  return q;
}

void Gap::validate() const {
  if (base.size() != generators.rows()) throw InvalidInput("Gap: base and generators differ in dimension");
  if (static_cast<int>(lower.size()) != rank() || static_cast<int>(upper.size()) != rank())
    throw InvalidInput("Gap: one bound pair per generator required");
  for (int i = 0; i < rank(); ++i)
    if (lower[i] > upper[i]) throw InvalidInput("Gap: lower bound exceeds upper bound");
}

Integer Gap::volume() const {
  Integer v = 1;
  for (int i = 0; i < rank(); ++i) v *= Integer(upper[i] - lower[i] + 1);
  return v;
}

bool Gap::is_symmetric() const {
  if (!base.isZero(0.0)) return false;
  for (int i = 0; i < rank(); ++i)
    if (lower[i] != -upper[i]) return false;
  return true;
}

Gap Gap::dilate(long factor) const {
  Gap out = *this;
  for (int i = 0; i < rank(); ++i) {
    const long m = std::max(std::labs(lower[i]), std::labs(upper[i]));
    out.lower[i] = -factor * m;
    out.upper[i] = factor * m;
  }
  return out;
}

VectorXd Gap::point(const std::vector<long>& coefficients) const {
  VectorXd p = base;
  for (int i = 0; i < rank(); ++i) p += static_cast<double>(coefficients[i]) * generators.col(i);
  return p;
}

namespace {

bool lex_less(const VectorXd& a, const VectorXd& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

}  // namespace

GapEnumeration gap_enumerate(const Gap& q, long max_volume) {
  q.validate();
  const Integer vol = q.volume();
  if (vol > max_volume) throw InvalidInput("gap_enumerate: volume exceeds the enumeration cap");
  GapEnumeration e;
  const std::size_t count = vol.get_ui();
  e.points.reserve(count);
  e.coefficients.reserve(count);
  std::vector<long> k = q.lower;
  for (std::size_t idx = 0; idx < count; ++idx) {
    e.points.push_back(q.point(k));
    e.coefficients.push_back(k);
    for (int i = 0; i < q.rank(); ++i) {  // odometer step
      if (++k[i] <= q.upper[i]) break;
      k[i] = q.lower[i];
    }
  }
  std::vector<VectorXd> sorted = e.points;
  std::sort(sorted.begin(), sorted.end(), lex_less);
  e.distinct = static_cast<std::size_t>(
      std::unique(sorted.begin(), sorted.end(), [](const VectorXd& a, const VectorXd& b) { return a == b; }) -
      sorted.begin());
  e.proper = e.distinct == count;
  return e;
}

Closeness gap_closeness(const MatrixXd& v, const Gap& q, double delta) {
  if (v.rows() != q.dimension()) throw InvalidInput("gap_closeness: dimension mismatch");
  if (!(delta >= 0.0)) throw InvalidInput("gap_closeness: delta must be >= 0");
  const GapEnumeration e = gap_enumerate(q);
  Closeness c;
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < e.points.size(); ++j) {
      const double d = (v.col(i) - e.points[j]).norm();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    c.nearest.push_back(best);
    c.distance.push_back(best_d);
    c.close.push_back(best_d <= delta);
    c.coefficients.push_back(e.coefficients[best]);
    if (best_d <= delta) ++c.close_count;
  }
  return c;
}

PigeonholeReport gap_pigeonhole_bound(const MatrixXd& v, const Gap& q, const Closeness& closeness, double delta,
                                      int s) {
  const int n = static_cast<int>(v.cols());
  if (static_cast<int>(closeness.close.size()) != n) throw InvalidInput("gap_pigeonhole_bound: assignment missing");
  if (!std::all_of(closeness.close.begin(), closeness.close.end(), [](bool b) { return b; }))
    throw InvalidInput("gap_pigeonhole_bound: some element is not delta-close to Q");
  if (!q.base.isZero(0.0)) throw InvalidInput("gap_pigeonhole_bound: Q must have zero base point");

  PigeonholeReport r;
  r.dilated = q.dilate(n);
  r.dilated_size = gap_enumerate(r.dilated, 50 * kMaxGapVolume).distinct;
  Integer n_pow;
  mpz_ui_pow_ui(n_pow.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(q.rank()));
  r.counting_limit = n_pow * Integer(static_cast<unsigned long>(gap_enumerate(q).distinct));
  r.counting_ok = Integer(static_cast<unsigned long>(r.dilated_size)) <= r.counting_limit;
  r.bound = ratio(1, Integer(static_cast<unsigned long>(r.dilated_size)));
  r.radius = n * delta;
  r.rho = rho_iid({v, r.radius, BallModel::IID, s}).value;
  r.holds = r.rho >= r.bound;
  return r;
}

GeneratorExpression express_generators(const Gap& p, const IntegerMatrix& k) {
  const int r = p.rank();
  if (!p.is_symmetric()) throw InvalidInput("express_generators: P must be symmetric");
  if (k.rows() != r || k.cols() != r) throw InvalidInput("express_generators: need r coefficient vectors of length r");
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      if (abs(k(i, j)) > p.upper[j]) throw InvalidInput("express_generators: w_i is not in P");
  if (p.volume() <= kMaxGapVolume && !gap_enumerate(p).proper)
    throw InvalidInput("express_generators: P must be proper");

  GeneratorExpression out;
  mpz_pow_ui(out.height_scale.get_mpz_t(), p.volume().get_mpz_t(), static_cast<unsigned long>(r));
  const RationalMatrix kq = to_rational(k);
  const auto track_height = [&](const Rational& q) {
    const Integer num = abs(q.get_num());
    if (num > out.max_height) out.max_height = num;
    if (q.get_den() > out.max_height) out.max_height = q.get_den();
  };

  if (auto inv = inverse(kq)) {
    out.full_rank = true;
    out.y = *inv;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) track_height(out.y(i, j));
    // w_j = sum_l k(j, l) g_l in exact arithmetic, then sum_j y(i, j) w_j - g_i.
    const int d = p.dimension();
    RationalMatrix g(r, d);
    for (int i = 0; i < r; ++i)
      for (int c = 0; c < d; ++c) g(i, c) = exact_rational(p.generators(c, i));
    const RationalMatrix w = multiply(kq, g);
    const RationalMatrix rebuilt = multiply(out.y, w);
    out.residual_zero = rebuilt == g;
    return out;
  }

  // Fact (ii): first k_i that lies in the span of k_1..k_{i-1}.
  for (int i = 1; i < r; ++i) {
    RationalMatrix cols(r, i);
    for (int row = 0; row < r; ++row)
      for (int c = 0; c < i; ++c) cols(row, c) = kq(c, row);
    std::vector<Rational> target(r);
    for (int row = 0; row < r; ++row) target[row] = kq(i, row);
    if (auto y = solve(cols, target)) {
      out.dependent_index = i;
      out.dependency = *y;
      for (const Rational& q : out.dependency) track_height(q);
      // residual: k_i - sum_c y_c k_c
      out.residual_zero = true;
      for (int row = 0; row < r; ++row) {
        Rational acc = 0;
        for (int c = 0; c < i; ++c) acc += out.dependency[c] * kq(c, row);
        if (acc != target[row]) out.residual_zero = false;
      }
      return out;
    }
  }
  // A zero first row is the only remaining singular case.
  out.dependent_index = 0;
  out.residual_zero = true;
  return out;
}

}  // namespace cirlaw
