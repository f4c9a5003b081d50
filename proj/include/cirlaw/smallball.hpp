#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cirlaw/core.hpp"
#include "cirlaw/exact.hpp"

namespace cirlaw {

/// Sign law for small-ball queries. IID: independent signs with
/// P(+1) = 1/2 + s/2n. FixedSum: uniform over sign vectors with sum s.
enum class BallModel { IID, FixedSum };

/// Multiset V in R^d (d = 1 or 2, one column per element), a radius and a sign law.
struct SmallBallQuery {
  MatrixXd points;
  double beta = 0.0;
  BallModel model = BallModel::IID;
  int s = 0;

  int n() const { return static_cast<int>(points.cols()); }
  int dimension() const { return static_cast<int>(points.rows()); }
  double sum_sq_norm() const { return points.squaredNorm(); }
};

struct SmallBallResult {
  Rational value;    // exact ball mass (exact mode)
  double estimate = 0.0;
  VectorXd center;   // a witnessing center
  std::size_t support = 0;  // number of distinct achievable sums
  bool exact = true;
};

inline constexpr int kExactSizeCap = 24;

/// One weighted atom of the distribution of sum_i x_i v_i.
struct WeightedPoint {
  VectorXd position;
  Integer weight;
};

/// sup over centers of the total weight inside a closed ball of radius beta.
/// d = 1: sorted interval sweep. d = 2: candidate centers at atoms and at the
/// two radius-beta circles through each close pair; membership uses a
/// relative slack of 1e-9 on beta.
std::pair<Integer, VectorXd> ball_supremum(std::vector<WeightedPoint> atoms, double beta);

/// Exact small-ball probability by enumeration (n <= 24).
SmallBallResult small_ball(const SmallBallQuery& query);

/// rho_beta(V) with i.i.d. skewed signs.
SmallBallResult rho_iid(const SmallBallQuery& query);
/// rho*_beta(V) with uniform fixed-sum signs.
SmallBallResult rho_star(const SmallBallQuery& query);

/// Monte Carlo estimate from `samples` sign draws (any n).
SmallBallResult small_ball_monte_carlo(const SmallBallQuery& query, long samples, Rng& rng);

/// P(x_1 + ... + x_n = target) for i.i.d. signs with P(+1) = 1/2 + s/2n.
Rational iid_sum_mass(int n, int s, int target);

/// C(n, floor(n/2)) / 2^n.
Rational erdos_littlewood_offord_bound(int n);

struct RhoRelation {
  Rational rho;
  Rational rho_star_lower;  // sum s - 1
  Rational rho_star_upper;  // sum s + 1
  Rational mass_lower;      // P(sum = s - 1)
  Rational mass_upper;      // P(sum = s + 1)
  double c_lower = 0.0;     // mass * sqrt(n)
  double c_upper = 0.0;
  double ratio = 0.0;       // rho sqrt(n) / max(rho*)
  bool conditioning_holds = false;  // rho >= mass * rho* for both sums, exactly
};

/// rho under IID(n, s) against rho* at sums s - 1 and s + 1 (n + s odd).
RhoRelation rho_relation_check(const MatrixXd& points, double beta, int s);

/// One collapsed-coordinate instance: x uniform on the union set S of length n,
/// x' = (x_1 + ... + x_{n0}, x_{n0+1}, ..., x_n), event |<x' + f', u'>| <= beta' n^5.
struct CollapsedInstance {
  int n = 0;
  int n0 = 1;
  int s = 0;
  std::vector<Complex> u;  // length n - n0 + 1
  std::vector<Complex> f;  // length n - n0 + 1
  double beta_prime = 0.0;
  double eps = 0.2;
};

struct CollapsedReport {
  Rational probability;
  Rational bound;  // 1 - (1 - eps)/8
  bool holds = false;
  bool admissible = false;
  std::string reason;  // why the instance is inadmissible, empty otherwise
  double lattice_spacing = 0.0;  // beta' n^4
  double radius = 0.0;           // beta' n^5
  double weighted_norm = 0.0;    // n0 |u_1|^2 + sum_{i>1} |u_i|^2
};

/// Exact probability by enumerating the union set, with admissibility checks.
CollapsedReport claim1_probability(const CollapsedInstance& instance);

}  // namespace cirlaw
