#pragma once

#include <vector>

#include "cirlaw/core.hpp"
#include "cirlaw/exact.hpp"
#include "cirlaw/smallball.hpp"

namespace cirlaw {

/// Generalized arithmetic progression
///   Q = { base + sum_i k_i g_i : lower_i <= k_i <= upper_i }
/// in R^d; generators are the columns of a d x r matrix.
struct Gap {
  VectorXd base;
  MatrixXd generators;
  std::vector<long> lower;
  std::vector<long> upper;

  static Gap symmetric(MatrixXd generators, std::vector<long> bounds);

  int dimension() const { return static_cast<int>(generators.rows()); }
  int rank() const { return static_cast<int>(generators.cols()); }
  /// prod (upper_i - lower_i + 1)
  Integer volume() const;
  bool is_symmetric() const;
  /// Box scaled by `factor`: k_i in [-factor M_i, factor M_i], M_i = max(|lower_i|, |upper_i|).
  /// For a symmetric Q this is the usual dilate factor * Q.
  Gap dilate(long factor) const;
  VectorXd point(const std::vector<long>& coefficients) const;
  void validate() const;
};

struct GapEnumeration {
  std::vector<VectorXd> points;               // one per box element, in box order
  std::vector<std::vector<long>> coefficients;  // matching coefficient tuples
  std::size_t distinct = 0;
  bool proper = false;  // distinct == volume
};

inline constexpr long kMaxGapVolume = 1'000'000;

/// All points of Q. Properness compares exact-equality distinct counts with the
/// volume, so generators should be exactly representable (integers or dyadics).
GapEnumeration gap_enumerate(const Gap& q, long max_volume = kMaxGapVolume);

struct Closeness {
  std::size_t close_count = 0;
  std::vector<std::size_t> nearest;  // index into the enumeration
  std::vector<double> distance;
  std::vector<bool> close;
  std::vector<std::vector<long>> coefficients;  // of the nearest point
};

/// Nearest point of Q for each column of v and whether it lies within delta.
Closeness gap_closeness(const MatrixXd& v, const Gap& q, double delta);

struct PigeonholeReport {
  Gap dilated;
  std::size_t dilated_size = 0;  // |nQ|
  Integer counting_limit;        // n^r |Q|
  bool counting_ok = false;      // |nQ| <= n^r |Q|
  Rational bound;                // 1 / |nQ|
  Rational rho;                  // exact rho_{n delta}(V)
  double radius = 0.0;           // n delta
  bool holds = false;            // rho >= bound
};

/// Lower bound on rho_{n delta}(V) from the GAP approximation: sum q_i x_i
/// ranges over nQ, so some value carries mass >= 1/|nQ|. Checked against the
/// exact IID(n, s) oracle.
PigeonholeReport gap_pigeonhole_bound(const MatrixXd& v, const Gap& q, const Closeness& closeness, double delta,
                                      int s);

struct GeneratorExpression {
  bool full_rank = false;
  RationalMatrix y;  // full rank: g_i = sum_j y(i, j) w_j
  int dependent_index = -1;          // otherwise k_{dependent} = sum_{i < dependent} dependency[i] k_i
  std::vector<Rational> dependency;
  Integer max_height;  // largest |numerator| or |denominator| among the coefficients
  Integer height_scale;  // |P|^r
  bool residual_zero = false;
};

/// Expresses the generators of a proper symmetric GAP through elements
/// w_i = sum_j k(i, j) g_j, or finds a rational dependency among the k rows.
GeneratorExpression express_generators(const Gap& p, const IntegerMatrix& k);

}  // namespace cirlaw
