#include "cirlaw/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "cirlaw/concentration.hpp"
#include "cirlaw/exact.hpp"
#include "cirlaw/gap.hpp"
#include "cirlaw/logdet.hpp"
#include "cirlaw/sampler.hpp"
#include "cirlaw/singular.hpp"
#include "cirlaw/smallball.hpp"
#include "cirlaw/spectral.hpp"

namespace cirlaw {

namespace fs = std::filesystem;

namespace {

// Non-finite doubles are stored as strings so records survive a round trip.
Json number_to_json(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double number_from_json(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw InvalidInput("record: bad number '" + s + "'");
  }
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
  return os.str();
}

std::string label(const std::string& prefix, double x) {
  std::ostringstream os;
  os << prefix << x;
  return os.str();
}

RowModel model_or(const ExperimentConfig& c, RowModel fallback) {
  return c.model.empty() ? fallback : parse_row_model(c.model);
}

// S-row blocks live in dimension n or n - 1 depending on parity.
int row_dimension(int n, int s, RowModel model) {
  return model == RowModel::UnionS ? union_s_dimension(n, s) : n;
}

MatrixXd gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal;
  MatrixXd g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) g(i, j) = normal(rng);
  return g;
}

void trial_sample(const ExperimentConfig& c, Rng& rng, TrialRecord& r) {
  const RowModel model = model_or(c, RowModel::FixedSum);
  const int dim = row_dimension(c.n, c.s, model);
  const MatrixXd x = sample_row_sum_matrix(dim, c.s, model, rng);
  const VectorXd sums = x.rowwise().sum();
  bool ok = (x.array().abs() == 1.0).all();
  for (int i = 0; i < dim; ++i) {
    const double v = sums(i);
    if (model == RowModel::FixedSum && v != c.s) ok = false;
    if (model == RowModel::UnionS && v != c.s - 1 && v != c.s + 1) ok = false;
  }
  r.stats["dimension"] = dim;
  r.stats["row_sum_min"] = sums.minCoeff();
  r.stats["row_sum_max"] = sums.maxCoeff();
  r.stats["mean_entry"] = x.mean();
  r.stats["expected_mean_entry"] = static_cast<double>(c.s) / dim;
  r.flags["rows_ok"] = ok;
}

void trial_esd(const ExperimentConfig& c, Rng& rng, TrialRecord& r) {
  const RowModel model = model_or(c, RowModel::FixedSum);
  const int n = row_dimension(c.n, c.s, model);
  const MatrixXd m = sample_row_sum_matrix(n, c.s, model, rng);
  std::vector<Complex> raw;
  long outlier_index = -1;
  if (model == RowModel::FixedSum) {
    const ReducedSpectrum red = spectrum_via_reduction(m);
    raw.push_back(red.deterministic);
    raw.insert(raw.end(), red.rest.data(), red.rest.data() + red.rest.size());
    outlier_index = 0;
  } else {
    const VectorXcd ev = eigenvalues_dense(m);
    raw.assign(ev.data(), ev.data() + ev.size());
  }
  Complex sum = 0.0;
  for (const Complex& z : raw) sum += z;
  const double trace_error = std::abs(sum - m.trace());

  const double scale = spectral_sigma(n, c.s) * std::sqrt(static_cast<double>(n));
  std::vector<Complex> points;
  std::vector<double> re, im;
  for (const Complex& z : raw) {
    points.push_back(z / scale);
    re.push_back(points.back().real());
    im.push_back(points.back().imag());
  }
  std::vector<Complex> kept = points;
  const auto dropped = exclude_outlier(kept, n, c.s);
  const EsdFunction esd(kept);

  r.stats["dimension"] = n;
  r.stats["ks_distance"] = ks_distance_to_circular(esd, c.grid);
  r.stats["quarter_mass"] = esd(0.0, 0.0);
  r.stats["trace_error"] = trace_error;
  r.stats["outlier_location"] = normalized_outlier(n, c.s);
  r.stats["outlier_index"] = static_cast<double>(outlier_index);
  r.stats["outlier_excluded"] = dropped ? 1.0 : 0.0;
  r.flags["trace_ok"] = trace_error <= 1e-8 * n;
  r.series["re"] = std::move(re);
  r.series["im"] = std::move(im);
}

void trial_reduce(const ExperimentConfig& c, Rng& rng, TrialRecord& r) {
  const MatrixXd m = sample_row_sum_matrix(c.n, c.s, RowModel::FixedSum, rng);
  const ReducedSpectrum red = spectrum_via_reduction(m);
  const VectorXcd direct = eigenvalues_dense(m);
  VectorXcd joined(red.rest.size() + 1);
  joined << Complex(red.deterministic), red.rest;
  const double err = reduction_match_error(m);
  double nearest_s = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < direct.size(); ++i)
    nearest_s = std::min(nearest_s, std::abs(direct(i) - double(c.s)));
  const VectorXd ones = VectorXd::Ones(c.n);
  r.stats["match_error"] = err;
  r.stats["paired_error"] = multiset_match_error(joined, direct);
  r.stats["distance_to_s"] = nearest_s;
  r.flags["match_ok"] = err <= 1e-6;
  r.flags["row_sum_exact"] = (m * ones - c.s * ones).isZero(0.0);
}

void trial_logdet(const ExperimentConfig& c, Rng& rng, TrialRecord& r) {
  const int n = union_s_dimension(c.n, c.s);
  const MatrixXd x = sample_row_sum_matrix(n, c.s, RowModel::UnionS, rng);
  const MatrixXd x_iid = sample_row_sum_matrix(n, c.s, RowModel::IID, rng);
  const MatrixXd f = MatrixXd::Zero(n, n);
  const int m = c.m_split > 0 ? std::min(c.m_split, n) : default_split(n);
  const ReplacementOutcome out = replacement_statistic(x, x_iid, f, c.z, m);

  r.stats["dimension"] = n;
  r.stats["m"] = m;
  r.stats["singular"] = out.singular ? 1.0 : 0.0;
  r.stats["statistic"] = out.statistic;
  r.stats["abs_statistic"] = std::abs(out.statistic);
  r.stats["log_s1"] = out.constrained.log_s1;
  r.stats["log_s2"] = out.constrained.log_s2;
  if (!out.constrained.degenerate) {
    const double lu = log_abs_det_lu(shifted_matrix(x, f, c.z));
    const double rel = std::abs(out.constrained.total - lu) / std::max(1.0, std::abs(lu));
    r.stats["bth_error"] = rel;
    r.flags["bth_ok"] = rel <= 1e-6;
  }
  const MatrixXcd f_rows = f.cast<Complex>() - c.z * std::sqrt(double(n)) * MatrixXcd::Identity(n, n);
  const TailWindow w = tail_window(out.constrained, f_rows);
  r.stats["min_tail_distance"] = w.min_tail_distance;
  r.flags["tail_upper_ok"] = w.upper_ok;
}

void trial_singvals(const ExperimentConfig& c, Rng& rng, TrialRecord& r) {
  const RowModel model = model_or(c, RowModel::UnionS);
  const int n = row_dimension(c.n, c.s, model);
  const MatrixXd x = sample_row_sum_matrix(n, c.s, model, rng);
  const SingularSpectrum sv = singular_values(x);
  r.stats["dimension"] = n;
  r.stats["sigma_min"] = sv.smallest();
  r.stats["sigma_max"] = sv.largest();
  for (double a : c.a_exponents)
    r.stats[label("hit_a=", a)] = sv.smallest() < std::pow(double(n), -a) ? 1.0 : 0.0;
  const double frob = x.squaredNorm();
  r.flags["frobenius_ok"] = std::abs(sv.values.squaredNorm() - frob) <= 1e-8 * frob;
  if (n >= 2) r.flags["interlacing_ok"] = interlacing_check(x, std::min(5, n - 1)).holds;
}

void trial_smallball(const ExperimentConfig& c, Rng& rng, TrialRecord& r) {
  const int n = c.n;
  // Dyadic values in (beta, 3 beta] keep sums exact and satisfy |v_i| > beta.
  std::uniform_int_distribution<int> step(1, 8);
  MatrixXd v(1, n);
  for (int i = 0; i < n; ++i) v(0, i) = c.beta * (1.0 + step(rng) / 4.0);
  const SmallBallResult rho = rho_iid({v, c.beta, BallModel::IID, c.s});
  r.stats["rho"] = to_double(rho.value);
  r.stats["support"] = static_cast<double>(rho.support);
  if (c.s == 0) {
    const Rational bound = erdos_littlewood_offord_bound(n);
    r.stats["elo_bound"] = to_double(bound);
    r.flags["elo_ok"] = rho.value <= bound;
  }
  if ((n + c.s) % 2 == 0) {
    r.stats["rho_star"] = to_double(rho_star({v, c.beta, BallModel::FixedSum, c.s}).value);
  } else if (std::abs(c.s) <= n - 1) {
    const RhoRelation rel = rho_relation_check(v, c.beta, c.s);
    r.stats["ratio"] = rel.ratio;
    r.flags["conditioning_ok"] = rel.conditioning_holds;
  }
}

void trial_gap(const ExperimentConfig& c, Rng& rng, TrialRecord& r) {
  const int n = c.n;
  // Q = {k1 + k2 g : |k_i| <= 2} with g = odd / 64 is proper.
  std::uniform_int_distribution<int> odd(0, 31);
  MatrixXd gens(1, 2);
  gens << 1.0, (2 * odd(rng) + 1) / 64.0;
  const Gap q = Gap::symmetric(gens, {2, 2});
  const double delta = c.beta / n;
  std::uniform_int_distribution<long> coeff(-2, 2);
  std::uniform_real_distribution<double> noise(-delta, delta);
  MatrixXd v(1, n);
  for (int i = 0; i < n; ++i) v(0, i) = q.point({coeff(rng), coeff(rng)})(0) + noise(rng);

  const Closeness close = gap_closeness(v, q, delta);
  r.flags["all_close"] = close.close_count == static_cast<std::size_t>(n);
  const PigeonholeReport pig = gap_pigeonhole_bound(v, q, close, delta, c.s);
  r.stats["rho"] = to_double(pig.rho);
  r.stats["bound"] = to_double(pig.bound);
  r.stats["dilated_size"] = static_cast<double>(pig.dilated_size);
  r.flags["counting_ok"] = pig.counting_ok;
  r.flags["pigeonhole_ok"] = pig.holds;

  IntegerMatrix k(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) k(i, j) = coeff(rng);
  const GeneratorExpression expr = express_generators(q, k);
  r.stats["full_rank"] = expr.full_rank ? 1.0 : 0.0;
  r.flags["expression_exact"] = expr.residual_zero;
}

void trial_talagrand(const ExperimentConfig& c, Rng& rng, TrialRecord& r) {
  const RowModel model = model_or(c, RowModel::IID);
  const int n = row_dimension(c.n, c.s, model);
  const int k = c.k > 0 ? c.k : n / 2;
  const ProjectionOperator<double> op = projection_complement(gaussian(n, k, rng), n);
  const VectorXd f = VectorXd::Zero(n);
  r.flags["projection_ok"] =
      op.hermitian_error() <= 1e-10 && op.idempotent_error() <= 1e-10 && op.trace_error() <= 1e-8;

  const TailTable table = talagrand_tail_experiment(op, f, c.s, c.t_ladder, c.samples, model, rng);
  r.stats["dimension"] = n;
  r.stats["k"] = op.k;
  r.stats["center"] = table.center;
  r.stats["median"] = table.median;
  r.stats["fitted_constant"] = table.fitted_constant;
  for (const TailRow& row : table.rows) r.stats[label("freq_t=", row.t)] = row.frequency;
  r.flags["tails_ok"] = table.all_ok();

  if (model == RowModel::IID) {
    const MomentReport mom = moment_bound_check(op, f, c.s, c.samples, rng);
    r.stats["mean_y"] = mom.mean_y;
    r.stats["stderr_y"] = mom.stderr_y;
    r.stats["expected_y"] = mom.expected_y;
    r.stats["second_moment"] = mom.second_moment;
    r.stats["second_moment_bound"] = mom.bound;
    r.stats["second_moment_corrected_bound"] = mom.corrected_bound;
    r.flags["mean_ok"] = mom.mean_ok;
    r.flags["second_moment_ok"] = mom.second_ok;
    r.flags["second_moment_corrected_ok"] = mom.corrected_ok;
  }
}

void trial_identity(const ExperimentConfig& c, Rng& rng, TrialRecord& r) {
  const int n = c.n;
  std::normal_distribution<double> normal;

  if ((n + c.s) % 2 == 0 && std::abs(c.s) <= n) {
    const MatrixXd m = sample_row_sum_matrix(n, c.s, RowModel::FixedSum, rng);
    const double err = reduction_match_error(m);
    r.stats["reduction_error"] = err;
    r.flags["reduction_ok"] = err <= 1e-6;
  }

  const MatrixXd a = sample_row_sum_matrix(n, 0, RowModel::IID, rng);
  const LogDetDecomposition d = logdet_via_distances(a);
  if (!d.degenerate) {
    const double lu = log_abs_det_lu(a);
    const double rel = std::abs(d.total - lu) / std::max(1.0, std::abs(lu));
    r.stats["bth_error"] = rel;
    r.flags["bth_ok"] = rel <= 1e-6;
  }
  if (!d.degenerate) {
    const std::vector<double> h1 = row_heights(a), h2 = row_heights_by_prefix(a);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(h1[i] - h2[i]));
    r.flags["heights_agree"] = worst <= 1e-8 * std::sqrt(double(n));
  }

  bool interlace = true;
  for (int k = 1; k <= std::min(5, n - 1); ++k) interlace = interlace && interlacing_check(a, k).holds;
  r.flags["interlacing_ok"] = interlace;

  const int rows = std::max(1, n / 2);
  const MatrixXd sub = sample_rows(rows, n, 0, RowModel::IID, rng);
  if (singular_values(sub).smallest() > 1e-10) {
    const MomentIdentity id = negative_second_moment_check(sub);
    r.stats["nsm_gap"] = id.relative_gap;
    r.flags["nsm_ok"] = id.relative_gap <= 1e-6;
    const double last = distance_to_span(sub.row(rows - 1).transpose(), sub.topRows(rows - 1).transpose());
    r.flags["deduction_ok"] = 1.0 / (last * last) <= id.lhs * (1.0 + 1e-9);
  }

  const int cn = std::min(n, 7);
  const MatrixXd x = sample_row_sum_matrix(cn, 0, RowModel::IID, rng);
  if (determinant(*integer_matrix(x)) != 0) {
    VectorXd u(cn);
    for (int i = 0; i < cn; ++i) u(i) = normal(rng);
    u.normalize();
    const double res = cofactor_identity_check(x, u);
    r.stats["cofactor_residual"] = res;
    r.flags["cofactor_ok"] = res <= 1e-8;
  } else {
    r.stats["cofactor_skipped"] = 1.0;
  }
}

using TrialFn = void (*)(const ExperimentConfig&, Rng&, TrialRecord&);

const std::map<std::string, TrialFn>& registry() {
  static const std::map<std::string, TrialFn> table{
      {"sample", trial_sample},     {"esd", trial_esd},
      {"reduce", trial_reduce},     {"logdet-compare", trial_logdet},
      {"singvals", trial_singvals}, {"smallball", trial_smallball},
      {"gap", trial_gap},           {"talagrand", trial_talagrand},
      {"identity-suite", trial_identity},
  };
  return table;
}

template <typename T>
void read_field(const Json& j, const char* key, T& out) {
  try {
    out = j.get<T>();
  } catch (const Json::exception&) {
    throw InvalidInput(std::string("config: field '") + key + "' has the wrong type");
  }
}

std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << (x == 0.0 ? 0.0 : x);  // no "-0"
  return os.str();
}

}  // namespace

Json to_json(const ExperimentConfig& c) {
  return Json{{"experiment", c.experiment},
              {"n", c.n},
              {"s", c.s},
              {"trials", c.trials},
              {"seed", c.seed},
              {"model", c.model},
              {"z", {c.z.real(), c.z.imag()}},
              {"beta", c.beta},
              {"a-exponent", c.a_exponents},
              {"t-ladder", c.t_ladder},
              {"m-split", c.m_split},
              {"k", c.k},
              {"grid", c.grid},
              {"samples", c.samples},
              {"threads", c.threads},
              {"out", c.out},
              {"in", c.in}};
}

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidInput("config: expected a JSON object");
  ExperimentConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "experiment") read_field(value, "experiment", c.experiment);
    else if (key == "n") read_field(value, "n", c.n);
    else if (key == "s") read_field(value, "s", c.s);
    else if (key == "trials") read_field(value, "trials", c.trials);
    else if (key == "seed") read_field(value, "seed", c.seed);
    else if (key == "model") read_field(value, "model", c.model);
    else if (key == "z") {
      std::vector<double> parts;
      read_field(value, "z", parts);
      if (parts.size() != 2) throw InvalidInput("config: field 'z' must be [re, im]");
      c.z = {parts[0], parts[1]};
    } else if (key == "beta") read_field(value, "beta", c.beta);
    else if (key == "a-exponent") read_field(value, "a-exponent", c.a_exponents);
    else if (key == "t-ladder") read_field(value, "t-ladder", c.t_ladder);
    else if (key == "m-split") read_field(value, "m-split", c.m_split);
    else if (key == "k") read_field(value, "k", c.k);
    else if (key == "grid") read_field(value, "grid", c.grid);
    else if (key == "samples") read_field(value, "samples", c.samples);
    else if (key == "threads") read_field(value, "threads", c.threads);
    else if (key == "out") read_field(value, "out", c.out);
    else if (key == "in") read_field(value, "in", c.in);
    else throw InvalidInput("config: unknown field '" + key + "'");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("config: cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw InvalidInput("config: " + path + ": " + e.what());
  }
  return config_from_json(j);
}

void validate(const ExperimentConfig& c) {
  const auto fail = [](const std::string& field, const std::string& why) {
    throw InvalidInput("--" + field + ": " + why);
  };
  if (!is_registered(c.experiment)) fail("experiment", "unknown experiment '" + c.experiment + "'");
  if (c.experiment == "export") {
    if (c.in.empty()) fail("in", "export needs an NDJSON input file");
    return;
  }
  if (c.n < 2) fail("n", "must be >= 2");
  if (std::abs(c.s) > c.n) fail("s", "must satisfy |s| <= n");
  if (c.trials < 0) fail("trials", "must be >= 0");
  if (!c.model.empty()) {
    try {
      parse_row_model(c.model);
    } catch (const InvalidInput& e) {
      fail("model", e.what());
    }
  }
  if (!(c.beta >= 0.0)) fail("beta", "must be >= 0");
  if (c.m_split < 0 || c.m_split > c.n) fail("m-split", "must lie in [0, n]");
  if (c.k < 0 || c.k > c.n) fail("k", "must lie in [0, n]");
  if (c.grid < 2) fail("grid", "must be >= 2");
  if (c.samples < 1) fail("samples", "must be >= 1");
  if (c.threads < 0) fail("threads", "must be >= 0");
  if (c.experiment == "smallball" && c.n > 20) fail("n", "smallball enumerates exactly, n <= 20");
  if (c.experiment == "gap" && c.n > 12) fail("n", "gap enumerates exactly, n <= 12");
  if (c.experiment == "talagrand") {
    const RowModel model = model_or(c, RowModel::IID);
    if (model == RowModel::FixedSum) fail("model", "talagrand takes iid or union-s");
    const int dim = row_dimension(c.n, c.s, model);
    const int k = c.k > 0 ? c.k : dim / 2;
    if (k > dim - 10) fail("k", "must satisfy k <= n - 10");
  }
  if ((c.experiment == "reduce") && (c.n + c.s) % 2 != 0) fail("s", "n + s must be even for fixed row sums");
  if ((c.experiment == "sample" || c.experiment == "esd") && model_or(c, RowModel::FixedSum) == RowModel::FixedSum &&
      (c.n + c.s) % 2 != 0)
    fail("s", "n + s must be even for fixed row sums");
}

std::string output_directory(const ExperimentConfig& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("CIRLAW_OUT_DIR"); env && *env) return env;
  return "results";
}

bool TrialRecord::passed() const {
  return error.empty() && std::all_of(flags.begin(), flags.end(), [](const auto& kv) { return kv.second; });
}

bool TrialRecord::operator==(const TrialRecord& o) const {
  const auto same_stats = [](const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
    if (a.size() != b.size()) return false;
    for (auto i = a.begin(), j = b.begin(); i != a.end(); ++i, ++j)
      if (i->first != j->first || !same_double(i->second, j->second)) return false;
    return true;
  };
  const auto same_series = [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return false;
    for (auto i = a.begin(), j = b.begin(); i != a.end(); ++i, ++j) {
      if (i->first != j->first || i->second.size() != j->second.size()) return false;
      for (std::size_t t = 0; t < i->second.size(); ++t)
        if (!same_double(i->second[t], j->second[t])) return false;
    }
    return true;
  };
  return experiment == o.experiment && trial == o.trial && seed == o.seed && parameters == o.parameters &&
         same_stats(stats, o.stats) && flags == o.flags && same_series(series, o.series) && error == o.error &&
         started == o.started && finished == o.finished;
}

Json to_json(const TrialRecord& r) {
  Json stats = Json::object();
  for (const auto& [k, v] : r.stats) stats[k] = number_to_json(v);
  Json series = Json::object();
  for (const auto& [k, v] : r.series) {
    Json arr = Json::array();
    for (double x : v) arr.push_back(number_to_json(x));
    series[k] = std::move(arr);
  }
  return Json{{"experiment", r.experiment}, {"trial", r.trial},   {"seed", r.seed},
              {"parameters", r.parameters}, {"stats", stats},     {"flags", r.flags},
              {"series", series},           {"error", r.error},   {"started", r.started},
              {"finished", r.finished}};
}

TrialRecord record_from_json(const Json& j) {
  TrialRecord r;
  try {
    r.experiment = j.at("experiment").get<std::string>();
    r.trial = j.at("trial").get<long>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.parameters = j.at("parameters");
    for (const auto& [k, v] : j.at("stats").items()) r.stats[k] = number_from_json(v);
    r.flags = j.at("flags").get<std::map<std::string, bool>>();
    for (const auto& [k, v] : j.at("series").items())
      for (const Json& x : v) r.series[k].push_back(number_from_json(x));
    r.error = j.at("error").get<std::string>();
    r.started = j.at("started").get<std::string>();
    r.finished = j.at("finished").get<std::string>();
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("record: ") + e.what());
  }
  return r;
}

void write_ndjson(std::ostream& out, const std::vector<TrialRecord>& records) {
  for (const TrialRecord& r : records) out << to_json(r).dump() << '\n';
}

std::vector<TrialRecord> read_ndjson(std::istream& in) {
  std::vector<TrialRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw InvalidInput(std::string("record: ") + e.what());
    }
    records.push_back(record_from_json(j));
  }
  return records;
}

bool Summary::all_passed() const {
  if (errors > 0) return false;
  for (const auto& [name, count] : flag_counts)
    if (flag_passes.at(name) != count) return false;
  return true;
}

Summary summarize(const std::vector<TrialRecord>& records) {
  Summary s;
  s.records = static_cast<long>(records.size());
  if (!records.empty()) s.experiment = records.front().experiment;
  std::map<std::string, std::vector<double>> values;
  for (const TrialRecord& r : records) {
    if (!r.error.empty()) ++s.errors;
    for (const auto& [k, v] : r.stats) {
      auto& bucket = values[k];
      if (std::isfinite(v)) bucket.push_back(v);
    }
    for (const auto& [k, ok] : r.flags) {
      ++s.flag_counts[k];
      s.flag_passes[k] += ok ? 1 : 0;
    }
  }
  for (auto& [k, v] : values) {
    StatSummary st;
    st.count = static_cast<long>(v.size());
    if (!v.empty()) {
      double total = 0.0;
      for (double x : v) total += x;
      st.mean = total / v.size();
      std::sort(v.begin(), v.end());
      const std::size_t h = v.size() / 2;
      st.median = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
      st.min = v.front();
      st.max = v.back();
    }
    s.stats[k] = st;
  }
  return s;
}

void print_summary(std::ostream& out, const Summary& s) {
  out << "experiment " << s.experiment << ": " << s.records << " records, " << s.errors << " errors\n";
  if (!s.stats.empty()) {
    int width = 22;
    for (const auto& kv : s.stats) width = std::max(width, static_cast<int>(kv.first.size()) + 2);
    out << std::left << std::setw(width) << "stat" << std::right << std::setw(8) << "count" << std::setw(14) << "mean"
        << std::setw(14) << "median" << std::setw(14) << "min" << std::setw(14) << "max" << '\n';
    for (const auto& [k, st] : s.stats)
      out << std::left << std::setw(width) << k << std::right << std::setw(8) << st.count << std::setw(14)
          << format_double(st.mean) << std::setw(14) << format_double(st.median) << std::setw(14)
          << format_double(st.min) << std::setw(14) << format_double(st.max) << '\n';
  }
  for (const auto& [k, count] : s.flag_counts)
    out << "flag " << k << ": " << s.flag_passes.at(k) << "/" << count << (s.flag_passes.at(k) == count ? "" : "  FAIL")
        << '\n';
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"sample",    "esd", "reduce",    "logdet-compare", "singvals",
                                              "smallball", "gap", "talagrand", "identity-suite", "export"};
  return names;
}

bool is_registered(const std::string& name) {
  const auto& names = experiment_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

TrialRecord run_trial(const ExperimentConfig& c, long trial) {
  TrialRecord r;
  r.experiment = c.experiment;
  r.trial = trial;
  r.seed = c.seed;
  r.parameters = to_json(c);
  r.started = timestamp();
  const auto it = registry().find(c.experiment);
  if (it == registry().end()) {
    r.error = "no trial function for '" + c.experiment + "'";
  } else {
    try {
      Rng rng = derive_stream(c.seed, static_cast<std::uint64_t>(trial));
      it->second(c, rng, r);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  }
  r.finished = timestamp();
  return r;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& c, const std::function<void(const TrialRecord&)>& sink) {
  const long count = c.trials;
  std::vector<TrialRecord> out;
  if (count <= 0) return out;
  long workers = c.threads > 0 ? c.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);

  std::vector<std::optional<TrialRecord>> slots(static_cast<std::size_t>(count));
  std::mutex mu;
  std::condition_variable ready;
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  for (long w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (long i; (i = next++) < count;) {
        TrialRecord r = run_trial(c, i);
        {
          std::lock_guard<std::mutex> lock(mu);
          slots[i] = std::move(r);
        }
        ready.notify_all();
      }
    });

  out.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    std::unique_lock<std::mutex> lock(mu);
    ready.wait(lock, [&] { return slots[i].has_value(); });
    TrialRecord r = std::move(*slots[i]);
    slots[i].reset();
    lock.unlock();
    if (sink) sink(r);
    out.push_back(std::move(r));
  }
  for (std::thread& t : pool) t.join();
  return out;
}

std::vector<std::string> export_figure1(const std::vector<TrialRecord>& records, const std::string& directory,
                                        const std::string& prefix) {
  fs::create_directories(directory);
  std::vector<std::string> files;
  for (const TrialRecord& r : records) {
    if (r.experiment != "esd" || !r.error.empty()) continue;
    const auto re = r.series.find("re"), im = r.series.find("im");
    if (re == r.series.end() || im == r.series.end() || re->second.size() != im->second.size())
      throw InvalidInput("export: esd record " + std::to_string(r.trial) + " has no eigenvalue series");
    std::vector<Complex> points;
    for (std::size_t i = 0; i < re->second.size(); ++i) points.emplace_back(re->second[i], im->second[i]);
    const std::string path = (fs::path(directory) / (prefix + "_draw" + std::to_string(r.trial) + ".csv")).string();
    std::ofstream out(path);
    write_eigenvalue_csv(out, points);
    files.push_back(path);
  }
  if (files.empty()) {
    std::cerr << "export: no esd records; writing a header-only file\n";
    const std::string path = (fs::path(directory) / (prefix + ".csv")).string();
    std::ofstream out(path);
    write_eigenvalue_csv(out, {});
    files.push_back(path);
  }
  return files;
}

RunResult run(const ExperimentConfig& c) {
  validate(c);
  RunResult result;
  const std::string dir = output_directory(c);
  fs::create_directories(dir);

  if (c.experiment == "export") {
    std::ifstream in(c.in);
    if (!in) throw InvalidInput("--in: cannot open " + c.in);
    result.records = read_ndjson(in);
    result.files = export_figure1(result.records, dir);
    result.summary = summarize(result.records);
    return result;
  }

  const std::string path = (fs::path(dir) / (c.experiment + ".ndjson")).string();
  std::ofstream store(path);
  if (!store) throw InvalidInput("--out: cannot write " + path);
  result.records = run_trials(c, [&](const TrialRecord& r) { store << to_json(r).dump() << '\n' << std::flush; });
  result.files.push_back(path);
  if (c.experiment == "esd") {
    const auto csv = export_figure1(result.records, dir, "esd");
    result.files.insert(result.files.end(), csv.begin(), csv.end());
  }
  result.summary = summarize(result.records);
  return result;
}

}  // namespace cirlaw
