#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cirlaw/core.hpp"

namespace cirlaw {

using Json = nlohmann::json;

/// Flat run configuration. JSON keys are the CLI flag names without the
/// leading dashes ("n", "a-exponent", "t-ladder", ...).
struct ExperimentConfig {
  std::string experiment;
  int n = 100;
  int s = 0;
  long trials = 1;
  std::uint64_t seed = 1;
  std::string model;  // empty: the experiment's default row law
  Complex z{1.0, 0.5};
  double beta = 1.0;
  std::vector<double> a_exponents{0.0, 1.0, 2.0, 3.0};
  std::vector<double> t_ladder{0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  int m_split = 0;  // 0: default split
  int k = 0;        // 0: n / 2
  int grid = 101;
  long samples = 10000;
  int threads = 0;  // 0: hardware concurrency
  std::string out;  // output directory; empty: $CIRLAW_OUT_DIR, then "results"
  std::string in;   // NDJSON input for export

  bool operator==(const ExperimentConfig&) const = default;
};

Json to_json(const ExperimentConfig& config);
/// Unknown keys and ill-typed values are rejected with the key name.
ExperimentConfig config_from_json(const Json& j);
ExperimentConfig load_config(const std::string& path);

/// Throws InvalidInput naming the failing field.
void validate(const ExperimentConfig& config);

/// Directory for outputs: config.out, then $CIRLAW_OUT_DIR, then "results".
std::string output_directory(const ExperimentConfig& config);

struct TrialRecord {
  std::string experiment;
  long trial = 0;
  std::uint64_t seed = 0;  // master seed; the stream is derive_stream(seed, trial)
  Json parameters;
  std::map<std::string, double> stats;
  std::map<std::string, bool> flags;  // asserted invariants
  std::map<std::string, std::vector<double>> series;
  std::string error;  // non-empty when the trial threw
  std::string started;
  std::string finished;

  bool passed() const;
  bool operator==(const TrialRecord& other) const;
};

Json to_json(const TrialRecord& record);
TrialRecord record_from_json(const Json& j);

void write_ndjson(std::ostream& out, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> read_ndjson(std::istream& in);

struct StatSummary {
  long count = 0;  // finite values only
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;

  bool operator==(const StatSummary&) const = default;
};

struct Summary {
  std::string experiment;
  long records = 0;
  long errors = 0;
  std::map<std::string, StatSummary> stats;
  std::map<std::string, long> flag_passes;
  std::map<std::string, long> flag_counts;

  bool all_passed() const;
  bool operator==(const Summary&) const = default;
};

/// Deterministic in record order.
Summary summarize(const std::vector<TrialRecord>& records);
void print_summary(std::ostream& out, const Summary& summary);

/// Registered experiment names, including "export".
const std::vector<std::string>& experiment_names();
bool is_registered(const std::string& name);

/// One trial of a registered experiment on stream derive_stream(seed, trial).
/// Exceptions are caught and stored in the record.
TrialRecord run_trial(const ExperimentConfig& config, long trial);

/// Runs trials 0..trials-1 on a bounded pool. `sink` receives each record on
/// the calling thread, in trial order.
std::vector<TrialRecord> run_trials(const ExperimentConfig& config,
                                    const std::function<void(const TrialRecord&)>& sink = {});

struct RunResult {
  std::vector<TrialRecord> records;
  Summary summary;
  std::vector<std::string> files;  // written paths
};

/// Runs, persists <out>/<experiment>.ndjson plus CSV exports, and summarizes.
/// "export" reads config.in instead of running trials.
RunResult run(const ExperimentConfig& config);

/// One CSV (header re,im) per esd record, named <prefix>_draw<trial>.csv; with no
/// esd records a single <prefix>.csv holding only the header.
std::vector<std::string> export_figure1(const std::vector<TrialRecord>& records, const std::string& directory,
                                        const std::string& prefix = "figure1");

}  // namespace cirlaw
