#include "cirlaw/smallball.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "cirlaw/sampler.hpp"

namespace cirlaw {

namespace {

constexpr double kBallSlack = 1e-9;

// A signed sum tagged with the number of +1 signs that produced it.
struct Atom1 {
  double x;
  int plus;
};

struct Atom2 {
  double x;
  double y;
  int plus;
};

template <typename Visit>
void for_each_pattern(int n, std::optional<int> plus_count, Visit&& visit) {
  const std::uint64_t limit = std::uint64_t{1} << n;
  if (!plus_count) {
    for (std::uint64_t mask = 0; mask < limit; ++mask) visit(mask);
    return;
  }
  const int k = *plus_count;
  if (k == 0) {
    visit(std::uint64_t{0});
    return;
  }
  // Gosper's hack over n-bit masks with k bits set.
  std::uint64_t mask = (std::uint64_t{1} << k) - 1;
  while (mask < limit) {
    visit(mask);
    const std::uint64_t c = mask & (~mask + 1);
    const std::uint64_t r = mask + c;
    mask = (((r ^ mask) >> 2) / c) | r;
  }
}

struct Distribution {
  std::vector<Integer> class_weight;  // weight of one pattern with k plus signs
  Integer denominator;
  std::optional<int> plus_count;  // fixed-sum restriction
};

Distribution make_distribution(const SmallBallQuery& q) {
  const int n = q.n();
  Distribution d;
  d.class_weight.assign(static_cast<std::size_t>(n + 1), Integer(0));
  if (q.model == BallModel::IID) {
    SkewedBernoulli::make(n, q.s);
    for (int k = 0; k <= n; ++k) {
      Integer plus, minus;
      mpz_ui_pow_ui(plus.get_mpz_t(), static_cast<unsigned long>(n + q.s), static_cast<unsigned long>(k));
      mpz_ui_pow_ui(minus.get_mpz_t(), static_cast<unsigned long>(n - q.s), static_cast<unsigned long>(n - k));
      d.class_weight[k] = plus * minus;
    }
    mpz_ui_pow_ui(d.denominator.get_mpz_t(), static_cast<unsigned long>(2 * n), static_cast<unsigned long>(n));
  } else {
    require_fixed_sum_feasible(n, q.s);
    const int k = (n + q.s) / 2;
    d.class_weight[k] = 1;
    d.denominator = binomial(n, k);
    d.plus_count = k;
  }
  return d;
}

void validate(const SmallBallQuery& q) {
  if (q.dimension() != 1 && q.dimension() != 2) throw InvalidInput("small ball: dimension must be 1 or 2");
  if (q.n() < 1) throw InvalidInput("small ball: V must be non-empty");
  if (!(q.beta >= 0.0) || !std::isfinite(q.beta)) throw InvalidInput("small ball: beta must be finite and >= 0");
  if (!q.points.allFinite()) throw InvalidInput("small ball: non-finite point");
}

bool all_equal(const std::vector<Integer>& w) {
  Integer first = -1;
  for (const Integer& x : w) {
    if (x == 0) continue;
    if (first < 0) first = x;
    else if (x != first) return false;
  }
  return true;
}

// Closed-window sweep on sorted 1-d atoms: window [x_i, x_i + 2 beta].
template <typename Acc, typename WeightOf>
std::pair<Acc, double> sweep_1d(const std::vector<Atom1>& atoms, double beta, WeightOf weight_of) {
  Acc best = 0, current = 0;
  double best_left = atoms.front().x;
  std::size_t right = 0;
  const double width = 2.0 * beta;
  for (std::size_t left = 0; left < atoms.size(); ++left) {
    if (left > 0) current -= weight_of(atoms[left - 1]);
    if (right < left) {
      right = left;
    }
    while (right < atoms.size() && atoms[right].x - atoms[left].x <= width) {
      current += weight_of(atoms[right]);
      ++right;
    }
    if (current > best) {
      best = current;
      best_left = atoms[left].x;
    }
  }
  return {best, best_left + beta};
}

std::pair<Integer, double> supremum_1d(std::vector<Atom1> atoms, double beta, const std::vector<Integer>& class_weight) {
  std::sort(atoms.begin(), atoms.end(), [](const Atom1& a, const Atom1& b) { return a.x < b.x; });
  if (all_equal(class_weight)) {
    Integer unit = 0;
    for (const Integer& w : class_weight)
      if (w != 0) unit = w;
    auto [count, center] = sweep_1d<std::uint64_t>(atoms, beta, [&](const Atom1& a) -> std::uint64_t {
      return class_weight[a.plus] == 0 ? 0 : 1;
    });
    return {Integer(static_cast<unsigned long>(count)) * unit, center};
  }
  auto [best, center] = sweep_1d<Integer>(atoms, beta, [&](const Atom1& a) -> const Integer& {
    return class_weight[a.plus];
  });
  return {best, center};
}

std::vector<WeightedPoint> merge_atoms(std::vector<Atom2> atoms, const std::vector<Integer>& class_weight) {
  std::sort(atoms.begin(), atoms.end(), [](const Atom2& a, const Atom2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  std::vector<WeightedPoint> merged;
  for (std::size_t i = 0; i < atoms.size();) {
    std::size_t j = i;
    Integer w = 0;
    while (j < atoms.size() && atoms[j].x == atoms[i].x && atoms[j].y == atoms[i].y) {
      w += class_weight[atoms[j].plus];
      ++j;
    }
    if (w != 0) {
      VectorXd p(2);
      p << atoms[i].x, atoms[i].y;
      merged.push_back({std::move(p), std::move(w)});
    }
    i = j;
  }
  return merged;
}

std::int64_t cell_key(std::int64_t ix, std::int64_t iy) { return ix * 0x1000003LL + iy; }

std::pair<Integer, VectorXd> supremum_2d(const std::vector<WeightedPoint>& atoms, double beta) {
  std::pair<Integer, VectorXd> best{Integer(0), atoms.front().position};
  for (const auto& a : atoms)
    if (a.weight > best.first) best = {a.weight, a.position};
  if (beta == 0.0) return best;

  const double cell = 2.0 * beta;
  const double reach = beta * (1.0 + kBallSlack);
  std::unordered_map<std::int64_t, std::vector<std::size_t>> grid;
  const auto cell_of = [cell](double v) { return static_cast<std::int64_t>(std::floor(v / cell)); };
  for (std::size_t i = 0; i < atoms.size(); ++i)
    grid[cell_key(cell_of(atoms[i].position(0)), cell_of(atoms[i].position(1)))].push_back(i);

  const auto mass_at = [&](const Eigen::Vector2d& c) {
    Integer total = 0;
    const std::int64_t cx = cell_of(c(0)), cy = cell_of(c(1));
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = grid.find(cell_key(cx + dx, cy + dy));
        if (it == grid.end()) continue;
        for (std::size_t j : it->second)
          if ((atoms[j].position - c).norm() <= reach) total += atoms[j].weight;
      }
    return total;
  };

  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Eigen::Vector2d p = atoms[i].position;
    const std::int64_t cx = cell_of(p(0)), cy = cell_of(p(1));
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = grid.find(cell_key(cx + dx, cy + dy));
        if (it == grid.end()) continue;
        for (std::size_t j : it->second) {
          if (j <= i) continue;
          const Eigen::Vector2d q = atoms[j].position;
          const double dist = (q - p).norm();
          if (dist > 2.0 * reach) continue;
          const Eigen::Vector2d mid = 0.5 * (p + q);
          const double half = 0.5 * dist;
          const double h = std::sqrt(std::max(0.0, beta * beta - half * half));
          const Eigen::Vector2d normal = dist > 0 ? Eigen::Vector2d(-(q - p)(1), (q - p)(0)) / dist
                                                  : Eigen::Vector2d(0.0, 0.0);
          for (const Eigen::Vector2d& c : {Eigen::Vector2d(mid + h * normal), Eigen::Vector2d(mid - h * normal)}) {
            Integer m = mass_at(c);
            if (m > best.first) best = {std::move(m), VectorXd(c)};
          }
        }
      }
  }
  return best;
}

}  // namespace

std::pair<Integer, VectorXd> ball_supremum(std::vector<WeightedPoint> atoms, double beta) {
  if (atoms.empty()) throw InvalidInput("ball_supremum: no atoms");
  const Eigen::Index d = atoms.front().position.size();
  if (d == 1) {
    std::vector<Atom1> flat;
    std::vector<Integer> weights;
    flat.reserve(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      flat.push_back({atoms[i].position(0), static_cast<int>(i)});
      weights.push_back(atoms[i].weight);
    }
    auto [w, c] = supremum_1d(std::move(flat), beta, weights);
    return {w, VectorXd::Constant(1, c)};
  }
  if (d != 2) throw InvalidInput("ball_supremum: dimension must be 1 or 2");
  std::vector<Atom2> flat;
  std::vector<Integer> weights;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    flat.push_back({atoms[i].position(0), atoms[i].position(1), static_cast<int>(i)});
    weights.push_back(atoms[i].weight);
  }
  return supremum_2d(merge_atoms(std::move(flat), weights), beta);
}

SmallBallResult small_ball(const SmallBallQuery& query) {
  validate(query);
  const int n = query.n();
  if (n > kExactSizeCap)
    throw InvalidInput("small ball: exact mode supports n <= 24; use small_ball_monte_carlo");
  const Distribution dist = make_distribution(query);
  SmallBallResult out;

  if (query.dimension() == 1) {
    std::vector<Atom1> atoms;
    atoms.reserve(dist.plus_count ? binomial(n, *dist.plus_count).get_ui() : (std::size_t{1} << n));
    const auto v = query.points.row(0);
    for_each_pattern(n, dist.plus_count, [&](std::uint64_t mask) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += (mask >> i & 1) ? v(i) : -v(i);
      atoms.push_back({acc, std::popcount(mask)});
    });
    auto [best, center] = supremum_1d(atoms, query.beta, dist.class_weight);
    std::vector<double> xs;
    xs.reserve(atoms.size());
    for (const Atom1& a : atoms) xs.push_back(a.x);
    std::sort(xs.begin(), xs.end());
    out.support = static_cast<std::size_t>(std::unique(xs.begin(), xs.end()) - xs.begin());
    out.value = ratio(best, dist.denominator);
    out.center = VectorXd::Constant(1, center);
  } else {
    std::vector<Atom2> atoms;
    const auto vx = query.points.row(0);
    const auto vy = query.points.row(1);
    for_each_pattern(n, dist.plus_count, [&](std::uint64_t mask) {
      double ax = 0.0, ay = 0.0;
      for (int i = 0; i < n; ++i) {
        const bool plus = mask >> i & 1;
        ax += plus ? vx(i) : -vx(i);
        ay += plus ? vy(i) : -vy(i);
      }
      atoms.push_back({ax, ay, std::popcount(mask)});
    });
    const auto merged = merge_atoms(std::move(atoms), dist.class_weight);
    out.support = merged.size();
    auto [best, center] = supremum_2d(merged, query.beta);
    out.value = ratio(best, dist.denominator);
    out.center = center;
  }
  out.estimate = to_double(out.value);
  return out;
}

SmallBallResult rho_iid(const SmallBallQuery& query) {
  if (query.model != BallModel::IID) throw InvalidInput("rho_iid: query must use the IID model");
  return small_ball(query);
}

SmallBallResult rho_star(const SmallBallQuery& query) {
  if (query.model != BallModel::FixedSum) throw InvalidInput("rho_star: query must use the FixedSum model");
  return small_ball(query);
}

SmallBallResult small_ball_monte_carlo(const SmallBallQuery& query, long samples, Rng& rng) {
  validate(query);
  if (samples < 1) throw InvalidInput("small ball Monte Carlo: samples must be >= 1");
  const int n = query.n();
  const RowModel row_model = query.model == BallModel::IID ? RowModel::IID : RowModel::FixedSum;
  std::vector<WeightedPoint> atoms;
  atoms.reserve(static_cast<std::size_t>(samples));
  for (long t = 0; t < samples; ++t) {
    const VectorXd x = sample_row(n, query.s, row_model, rng).as<double>();
    atoms.push_back({query.points * x, Integer(1)});
  }
  auto [best, center] = ball_supremum(std::move(atoms), query.beta);
  SmallBallResult out;
  out.exact = false;
  out.value = ratio(best, Integer(samples));
  out.estimate = to_double(out.value);
  out.center = center;
  return out;
}

Rational iid_sum_mass(int n, int s, int target) {
  SkewedBernoulli::make(n, s);
  if ((n + target) % 2 != 0 || std::abs(target) > n) return 0;
  const int k = (n + target) / 2;
  Integer plus, minus, denom;
  mpz_ui_pow_ui(plus.get_mpz_t(), static_cast<unsigned long>(n + s), static_cast<unsigned long>(k));
  mpz_ui_pow_ui(minus.get_mpz_t(), static_cast<unsigned long>(n - s), static_cast<unsigned long>(n - k));
  mpz_ui_pow_ui(denom.get_mpz_t(), static_cast<unsigned long>(2 * n), static_cast<unsigned long>(n));
  return ratio(binomial(n, k) * plus * minus, denom);
}

Rational erdos_littlewood_offord_bound(int n) {
  Integer denom;
  mpz_ui_pow_ui(denom.get_mpz_t(), 2, static_cast<unsigned long>(n));
  return ratio(binomial(n, n / 2), denom);
}

RhoRelation rho_relation_check(const MatrixXd& points, double beta, int s) {
  const int n = static_cast<int>(points.cols());
  require_union_feasible(n, s);
  RhoRelation r;
  r.rho = rho_iid({points, beta, BallModel::IID, s}).value;
  r.rho_star_lower = rho_star({points, beta, BallModel::FixedSum, s - 1}).value;
  r.rho_star_upper = rho_star({points, beta, BallModel::FixedSum, s + 1}).value;
  r.mass_lower = iid_sum_mass(n, s, s - 1);
  r.mass_upper = iid_sum_mass(n, s, s + 1);
  const double root_n = std::sqrt(static_cast<double>(n));
  r.c_lower = to_double(r.mass_lower) * root_n;
  r.c_upper = to_double(r.mass_upper) * root_n;
  const Rational star_max = r.rho_star_lower > r.rho_star_upper ? r.rho_star_lower : r.rho_star_upper;
  r.ratio = to_double(r.rho) * root_n / to_double(star_max);
  r.conditioning_holds = r.rho >= r.mass_lower * r.rho_star_lower && r.rho >= r.mass_upper * r.rho_star_upper;
  return r;
}

CollapsedReport claim1_probability(const CollapsedInstance& in) {
  const int n = in.n;
  const int rest = n - in.n0;
  if (n > 20) throw InvalidInput("claim1_probability: exact enumeration needs n <= 20");
  if (in.n0 < 1 || rest < 0) throw InvalidInput("claim1_probability: need 1 <= n0 <= n");
  if (static_cast<int>(in.u.size()) != rest + 1 || static_cast<int>(in.f.size()) != rest + 1)
    throw InvalidInput("claim1_probability: u' and f' must have length n - n0 + 1");
  if (!(in.beta_prime > 0.0)) throw InvalidInput("claim1_probability: beta' must be positive");
  const UnionSetS set = UnionSetS::make(n, in.s);

  CollapsedReport r;
  const double nd = static_cast<double>(n);
  r.lattice_spacing = in.beta_prime * std::pow(nd, 4);
  r.radius = in.beta_prime * std::pow(nd, 5);
  r.weighted_norm = in.n0 * std::norm(in.u[0]);
  for (int j = 1; j <= rest; ++j) r.weighted_norm += std::norm(in.u[j]);
  const Rational eps = exact_rational(in.eps);
  r.bound = 1 - (1 - eps) / 8;

  // Admissibility: the hypotheses the bound is stated under, at desk scale.
  const auto on_lattice = [&](double v) {
    const double q = v / r.lattice_spacing;
    return std::abs(q - std::round(q)) <= 1e-6;
  };
  if (!(in.eps > 0.0 && in.eps < 0.25)) r.reason = "eps must lie in (0, 1/4)";
  else if (std::abs(in.s) > (1.0 - in.eps) * nd) r.reason = "|s| exceeds (1 - eps) n";
  else if (!std::all_of(in.u.begin(), in.u.end(), [&](Complex c) { return on_lattice(c.real()) && on_lattice(c.imag()); }))
    r.reason = "u' is not on the beta' n^4 lattice";
  else if (r.weighted_norm < 0.25 || r.weighted_norm > 4.0) r.reason = "weighted norm of u' is not of order 1";
  else if (in.beta_prime * std::pow(nd, 9) > 0.25 / std::sqrt(nd)) r.reason = "beta' too large: beta' n^9 exceeds 1/(4 sqrt n)";
  else if (!type_split_probabilities(n, in.s, in.eps).comparable) r.reason = "type probabilities fall below (1 - eps)/4";
  r.admissible = r.reason.empty();

  Integer hits = 0;
  const std::uint64_t limit = std::uint64_t{1} << rest;
  for (int total : {in.s - 1, in.s + 1}) {
    for (std::uint64_t mask = 0; mask < limit; ++mask) {
      int tail_sum = 0;
      Complex value = 0.0;
      for (int j = 0; j < rest; ++j) {
        const int x = (mask >> j & 1) ? 1 : -1;
        tail_sum += x;
        value += (static_cast<double>(x) + in.f[j + 1]) * in.u[j + 1];
      }
      const int k = total - tail_sum;
      if (std::abs(k) > in.n0 || (k + in.n0) % 2 != 0) continue;
      value += (static_cast<double>(k) + in.f[0]) * in.u[0];
      if (std::abs(value) <= r.radius) hits += binomial(in.n0, (in.n0 + k) / 2);
    }
  }
  r.probability = ratio(hits, set.size());
  r.holds = r.probability <= r.bound;
  return r;
}

}  // namespace cirlaw
