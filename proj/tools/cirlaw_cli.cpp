// cirlaw: named experiments for fixed-row-sum random sign matrices.
//
//   cirlaw esd --n 1000 --trials 1 --out results
//   cirlaw identity-suite --n 10 --trials 100
//   cirlaw export --in results/esd.ndjson --out figures

#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "cirlaw/experiments.hpp"

namespace {

cirlaw::Complex parse_complex(const std::string& text) {
  const auto comma = text.find(',');
  std::size_t used = 0;
  if (comma == std::string::npos) {
    const double re = std::stod(text, &used);
    if (used != text.size()) throw cirlaw::InvalidInput("--z: expected 're,im'");
    return {re, 0.0};
  }
  const std::string a = text.substr(0, comma), b = text.substr(comma + 1);
  const double re = std::stod(a, &used);
  if (used != a.size()) throw cirlaw::InvalidInput("--z: expected 're,im'");
  const double im = std::stod(b, &used);
  if (used != b.size()) throw cirlaw::InvalidInput("--z: expected 're,im'");
  return {re, im};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-row-sum random matrix experiments"};
  cirlaw::ExperimentConfig flags;
  std::string z_text;
  std::string config_path;

  app.add_option("experiment", flags.experiment, "Experiment name")
      ->required()
      ->check(CLI::IsMember(cirlaw::experiment_names()));
  // Each flag mirrors one config field; the lambda copies it over a loaded config.
  std::vector<std::pair<CLI::Option*, std::function<void(cirlaw::ExperimentConfig&)>>> overrides;
  const auto bind = [&](CLI::Option* opt, auto field) {
    overrides.emplace_back(opt, [&flags, field](cirlaw::ExperimentConfig& c) { c.*field = flags.*field; });
  };
  using C = cirlaw::ExperimentConfig;
  bind(app.add_option("--n", flags.n, "Matrix or vector size"), &C::n);
  bind(app.add_option("--s", flags.s, "Row sum"), &C::s);
  bind(app.add_option("--trials", flags.trials, "Number of trials"), &C::trials);
  bind(app.add_option("--seed", flags.seed, "Master seed"), &C::seed);
  bind(app.add_option("--model", flags.model, "Row law: fixed-sum, union-s or iid"), &C::model);
  auto* z_opt = app.add_option("--z", z_text, "Complex shift as re,im");
  bind(app.add_option("--beta", flags.beta, "Ball radius"), &C::beta);
  bind(app.add_option("--a-exponent", flags.a_exponents, "Least-singular-value exponents")->delimiter(','),
       &C::a_exponents);
  bind(app.add_option("--t-ladder", flags.t_ladder, "Tail offsets t")->delimiter(','), &C::t_ladder);
  bind(app.add_option("--m-split", flags.m_split, "Split index m (0: default)"), &C::m_split);
  bind(app.add_option("--k", flags.k, "Subspace dimension (0: n/2)"), &C::k);
  bind(app.add_option("--grid", flags.grid, "Grid points per axis"), &C::grid);
  bind(app.add_option("--samples", flags.samples, "Samples per tail table"), &C::samples);
  bind(app.add_option("--threads", flags.threads, "Worker threads (0: all cores)"), &C::threads);
  bind(app.add_option("--out", flags.out, "Output directory (default $CIRLAW_OUT_DIR or results)"), &C::out);
  bind(app.add_option("--in", flags.in, "NDJSON records for export"), &C::in);
  app.add_option("--config", config_path, "Flat JSON config; flags given on the command line win");

  CLI11_PARSE(app, argc, argv);

  try {
    if (z_opt->count() > 0) flags.z = parse_complex(z_text);
    cirlaw::ExperimentConfig config = flags;
    if (!config_path.empty()) {
      config = cirlaw::load_config(config_path);
      config.experiment = flags.experiment;
      for (auto& [opt, apply] : overrides)
        if (opt->count() > 0) apply(config);
      if (z_opt->count() > 0) config.z = flags.z;
    }
    const cirlaw::RunResult result = cirlaw::run(config);
    cirlaw::print_summary(std::cout, result.summary);
    for (const std::string& f : result.files) std::cout << "wrote " << f << '\n';
    return result.summary.all_passed() ? 0 : 1;
  } catch (const cirlaw::InvalidInput& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
