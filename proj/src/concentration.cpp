#include "cirlaw/concentration.hpp"

#include <algorithm>
#include <cmath>

namespace cirlaw {

namespace {

template <typename Scalar, typename Vec>
MomentReport moment_impl(const ProjectionOperator<Scalar>& op, const Vec& f, int s, long samples, Rng& rng) {
  const int n = op.n();
  if (f.size() != n) throw InvalidInput("moment_bound_check: f must have length n");
  if (samples < 2) throw InvalidInput("moment_bound_check: need at least 2 samples");
  const Vec f_prime = f + Vec::Constant(n, Scalar(static_cast<double>(s) / n));
  const double df2 = op.distance(f_prime) * op.distance(f_prime);
  const double base = n - op.k;
  const SkewedBernoulli law = SkewedBernoulli::make(n, s);

  double sum = 0.0, sum_sq = 0.0, sum_4 = 0.0;
  for (long t = 0; t < samples; ++t) {
    const Vec v = f + sample_skewed_bernoulli_vector(law, rng).as<double>().template cast<Scalar>();
    const double d = op.distance(v);
    const double y = d * d - base - df2;
    sum += y;
    sum_sq += y * y;
    sum_4 += y * y * y * y;
  }
  const double m = static_cast<double>(samples);
  MomentReport r;
  r.samples = samples;
  r.mean_y = sum / m;
  r.stderr_y = std::sqrt(std::max(0.0, sum_sq / m - r.mean_y * r.mean_y) / (m - 1.0));
  r.expected_y = expected_residual(n, op.k, s);
  r.second_moment = sum_sq / m;
  r.stderr_second_moment =
      std::sqrt(std::max(0.0, sum_4 / m - r.second_moment * r.second_moment) / (m - 1.0));
  r.bound = std::min(op.k, n - op.k) + 4.0 * df2;
  r.pair_sum = op.p.cwiseAbs2().sum() - op.p.diagonal().cwiseAbs2().sum();
  r.corrected_bound = 2.0 * op.k * (n - op.k) / n + 4.0 * df2;
  r.mean_ok = std::abs(r.mean_y - r.expected_y) <= 4.0 * r.stderr_y;
  r.second_ok = r.second_moment <= r.bound + 4.0 * r.stderr_second_moment;
  r.corrected_ok = r.second_moment <= r.corrected_bound + 4.0 * r.stderr_second_moment;
  return r;
}

}  // namespace

MomentReport moment_bound_check(const ProjectionOperator<double>& op, const VectorXd& f, int s, long samples,
                                Rng& rng) {
  return moment_impl(op, f, s, samples, rng);
}

MomentReport moment_bound_check(const ProjectionOperator<Complex>& op, const VectorXcd& f, int s, long samples,
                                Rng& rng) {
  return moment_impl(op, f, s, samples, rng);
}

bool TailTable::all_ok() const {
  return monotone && std::all_of(rows.begin(), rows.end(), [](const TailRow& r) { return r.asserted_ok; });
}

TailTable talagrand_tail_experiment(const ProjectionOperator<double>& op, const VectorXd& f, int s,
                                    const std::vector<double>& t_ladder, long samples, RowModel model, Rng& rng,
                                    double declared_constant) {
  const int n = op.n();
  if (op.k > n - 10) throw InvalidInput("talagrand_tail_experiment: requires k <= n - 10");
  if (model == RowModel::FixedSum) throw InvalidInput("talagrand_tail_experiment: model must be iid or union-s");
  if (samples < 1) throw InvalidInput("talagrand_tail_experiment: samples must be >= 1");
  if (f.size() != n) throw InvalidInput("talagrand_tail_experiment: f must have length n");
  TailTable table;
  table.n = n;
  table.k = op.k;
  table.s = s;
  table.model = model;
  table.samples = samples;
  table.declared_constant = declared_constant;
  const VectorXd f_prime = f + VectorXd::Constant(n, static_cast<double>(s) / n);
  const double df = op.distance(f_prime);
  table.center = std::sqrt(n - op.k + df * df);

  std::vector<double> deviations(static_cast<std::size_t>(samples));
  std::vector<double> distances(static_cast<std::size_t>(samples));
  for (long i = 0; i < samples; ++i) {
    const VectorXd v = f + sample_row(n, s, model, rng).as<double>();
    distances[i] = op.distance(v);
    deviations[i] = std::abs(distances[i] - table.center);
  }
  std::nth_element(distances.begin(), distances.begin() + samples / 2, distances.end());
  table.median = distances[samples / 2];

  const double root_n = std::sqrt(static_cast<double>(n));
  for (double t : t_ladder) {
    TailRow row;
    row.t = t;
    row.exceed = std::count_if(deviations.begin(), deviations.end(), [t](double d) { return d >= t + 3.0; });
    row.frequency = static_cast<double>(row.exceed) / samples;
    row.lemma_bound = std::exp(-t * t / 4.0);
    row.median_bound = 4.0 * std::exp(-t * t / 16.0);
    row.union_bound = declared_constant * root_n * row.lemma_bound;
    row.asserted_ok = row.frequency <= (model == RowModel::IID ? row.lemma_bound : row.union_bound);
    table.fitted_constant = std::max(table.fitted_constant, row.frequency / (root_n * row.lemma_bound));
    table.rows.push_back(row);
  }
  table.monotone = true;
  std::vector<TailRow> by_t = table.rows;
  std::sort(by_t.begin(), by_t.end(), [](const TailRow& a, const TailRow& b) { return a.t < b.t; });
  for (std::size_t i = 1; i < by_t.size(); ++i)
    if (by_t[i].frequency > by_t[i - 1].frequency) table.monotone = false;
  return table;
}

}  // namespace cirlaw
