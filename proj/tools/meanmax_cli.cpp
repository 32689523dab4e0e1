// meanmax: expected-maximum-at-budget curves and the simulation batteries
// that compare the plug-in and unbiased estimators.
//
// Exit status: 0 success, 1 data error, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "meanmax/meanmax.hpp"

namespace {

namespace fs = std::filesystem;
using namespace meanmax;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputOptions {
  std::string output = "-";
  std::string format = "json";
  std::string plot;
};

struct SimOptions {
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
};

void add_output_options(CLI::App* cmd, OutputOptions& out, bool plottable) {
  cmd->add_option("-o,--output", out.output, "Report path ('-' for stdout)");
  cmd->add_option("--format", out.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  if (plottable) cmd->add_option("--plot", out.plot, "Also write an SVG chart (plus sidecar CSV)");
}

void add_sim_options(CLI::App* cmd, SimOptions& sim) {
  cmd->add_option("--seed", sim.seed, "Random seed");
  cmd->add_option("--threads", sim.threads,
                  "Worker threads; results do not depend on this")
      ->envname("MEANMAX_THREADS")
      ->check(CLI::Range(1U, 1024U));
}

EstimatorKind estimator_flag(const std::string& name) {
  try {
    return parse_estimator_kind(name);
  } catch (const InvalidInput& e) {
    throw UsageError(std::string("--estimator: ") + e.what());
  }
}

void require_positive(std::size_t value, const char* flag) {
  if (value < 1) throw UsageError(std::string(flag) + " must be at least 1");
}

void require_confidence(double value) {
  if (!(value > 0.0 && value < 1.0)) {
    throw UsageError("--confidence must lie strictly between 0 and 1");
  }
}

std::size_t resolve_n_max(std::optional<std::size_t> requested, std::size_t sample_size,
                          EstimatorKind kind) {
  const std::size_t n_max = requested.value_or(sample_size);
  require_positive(n_max, "--n-max");
  if (n_max > sample_size) {
    if (requires_budget_within_sample(kind)) {
      throw UsageError("--n-max " + std::to_string(n_max) + " exceeds B = " +
                       std::to_string(sample_size) + " for estimator " +
                       std::string(to_string(kind)));
    }
    std::cerr << "warning: --n-max " << n_max << " exceeds B = " << sample_size
              << "; the plug-in estimator extrapolates past the sample size\n";
  }
  return n_max;
}

void check_outputs(const OutputOptions& out) {
  if (out.plot.empty()) return;
  if (fs::path(out.plot) == fs::path(out.output) ||
      sidecar_path(out.plot) == fs::path(out.output)) {
    throw UsageError("--plot " + out.plot + " and its sidecar CSV must not overwrite --output");
  }
}

std::string dist_id(const fs::path& path) { return path.stem().string(); }

void emit(const ReportEnvelope& env, const OutputOptions& out) {
  write_report(env, out.output, parse_report_format(out.format));
  if (!out.plot.empty()) emit_plot(env, out.plot);
}

ReportEnvelope envelope(json config, ReportPayload payload) {
  ReportEnvelope env;
  env.config = std::move(config);
  env.payload = std::move(payload);
  env.timestamp = current_timestamp();
  return env;
}

// ---------------------------------------------------------------------------

struct CurveArgs {
  std::string runs;
  std::vector<std::string> estimators{"unbiased"};
  std::optional<std::size_t> n_max;
  bool ci = false;
  std::size_t resamples = 1000;
  double confidence = 0.95;
  std::uint64_t seed = kDefaultSeed;
  OutputOptions out;
};

int cmd_curve(const CurveArgs& args) {
  check_outputs(args.out);
  std::vector<EstimatorKind> kinds;
  for (const auto& name : args.estimators) kinds.push_back(estimator_flag(name));
  require_positive(args.resamples, "--resamples");
  require_confidence(args.confidence);

  const auto sample = read_runs(args.runs);
  std::vector<std::size_t> n_maxes;
  for (auto kind : kinds) n_maxes.push_back(resolve_n_max(args.n_max, sample.size(), kind));

  EstimateReport report;
  report.source = args.runs;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    auto curve = expected_max_curve(sample, kinds[k], n_maxes[k]);
    if (args.ci) {
      const BootstrapConfig boot{args.resamples, args.confidence, RngStream(args.seed).child(k)};
      curve = with_bootstrap_cis(std::move(curve), sample, boot);
    }
    report.curves.push_back(std::move(curve));
  }

  json config{{"command", "curve"},
              {"runs", args.runs},
              {"estimators", args.estimators},
              {"n_max", args.n_max ? json(*args.n_max) : json(nullptr)},
              {"ci", args.ci},
              {"resamples", args.resamples},
              {"confidence", args.confidence},
              {"seed", args.seed}};
  emit(envelope(std::move(config), std::move(report)), args.out);
  return 0;
}

struct FitArgs {
  std::string runs;
  std::string preset;
  std::string bandwidth = "scott";
  std::optional<double> support_lo;
  std::optional<double> support_hi;
  std::size_t bins = 511;
  std::string output = "-";
  bool bandwidth_set = false;
  bool bins_set = false;
};

int cmd_fit(const FitArgs& args) {
  KdeSpec spec;
  if (!args.preset.empty()) {
    try {
      spec = find_preset(args.preset).spec();
    } catch (const InvalidInput& e) {
      throw UsageError(std::string("--preset: ") + e.what());
    }
  }
  if (args.preset.empty() || args.bandwidth_set) {
    try {
      spec.bandwidth = Bandwidth::parse(args.bandwidth);
    } catch (const InvalidInput& e) {
      throw UsageError(std::string("--bandwidth: ") + e.what());
    }
  }
  if (args.preset.empty() || args.bins_set) spec.bins = args.bins;
  if (args.support_lo) spec.support_lo = *args.support_lo;
  if (args.support_hi) spec.support_hi = *args.support_hi;
  if (args.preset.empty() && (!args.support_lo || !args.support_hi)) {
    throw UsageError("--support-lo and --support-hi are required without --preset");
  }
  if (spec.bins < 2) throw UsageError("--bins must be at least 2");
  if (!(spec.support_lo < spec.support_hi)) {
    throw UsageError("--support-lo must be below --support-hi");
  }

  const auto runs = read_runs(args.runs);
  const auto dist = fit_kde(runs, spec);
  write_distribution(dist, args.output);
  std::cerr << "fit: " << runs.size() << " runs -> " << dist.size() << " support points, bandwidth "
            << spec.bandwidth.resolve(runs) << "\n";
  return 0;
}

struct ProbeArgs {
  std::string dist;
  std::size_t sample_size = 50;
  std::optional<std::size_t> n_max;
  std::size_t samples = 1000;
  std::string estimator = "meanmax";
  std::optional<std::size_t> mc_truth;
  SimOptions sim;
  OutputOptions out;
};

json sim_config(const char* command, const SimOptions& sim, const std::string& estimator,
                std::size_t sample_size, std::size_t n_max) {
  return {{"command", command},
          {"seed", sim.seed},
          {"estimator", estimator},
          {"B", sample_size},
          {"n_max", n_max}};
}

int cmd_probe(const ProbeArgs& args) {
  check_outputs(args.out);
  const auto kind = estimator_flag(args.estimator);
  require_positive(args.sample_size, "--B");
  require_positive(args.samples, "--samples");
  if (args.mc_truth) require_positive(*args.mc_truth, "--mc-truth");
  const std::size_t n_max = resolve_n_max(args.n_max, args.sample_size, kind);

  const auto dist = read_distribution(args.dist);
  std::cerr << "probe: " << n_max << " budgets x " << args.samples << " samples of B = "
            << args.sample_size << "\n";
  ExperimentOptions options{args.sim.threads, args.mc_truth};
  auto report = probe(dist, args.sample_size, n_max, args.samples, kind, RngStream(args.sim.seed),
                      options, dist_id(args.dist));

  auto config = sim_config("probe", args.sim, args.estimator, args.sample_size, n_max);
  config["dist"] = args.dist;
  config["samples"] = args.samples;
  config["mc_truth"] = args.mc_truth ? json(*args.mc_truth) : json(nullptr);
  emit(envelope(std::move(config), std::move(report)), args.out);
  return 0;
}

struct CoverageArgs {
  std::string dist;
  std::size_t sample_size = 50;
  std::optional<std::size_t> n_max;
  std::size_t trials = 300;
  std::size_t resamples = 1000;
  double confidence = 0.95;
  std::string estimator = "meanmax";
  std::optional<std::size_t> mc_truth;
  SimOptions sim;
  OutputOptions out;
};

int cmd_coverage(const CoverageArgs& args) {
  check_outputs(args.out);
  const auto kind = estimator_flag(args.estimator);
  require_positive(args.sample_size, "--B");
  require_positive(args.trials, "--M");
  require_positive(args.resamples, "--resamples");
  require_confidence(args.confidence);
  if (args.mc_truth) require_positive(*args.mc_truth, "--mc-truth");
  const std::size_t n_max = resolve_n_max(args.n_max, args.sample_size, kind);

  const auto dist = read_distribution(args.dist);
  std::cerr << "coverage: " << n_max << " budgets x " << args.trials << " samples x "
            << args.resamples << " resamples\n";
  const RngStream rng(args.sim.seed);
  const BootstrapConfig boot{args.resamples, args.confidence, RngStream(args.sim.seed, 1)};
  ExperimentOptions options{args.sim.threads, args.mc_truth};
  auto report = coverage(dist, args.sample_size, n_max, args.trials, boot, kind, rng, options,
                         dist_id(args.dist));

  auto config = sim_config("coverage", args.sim, args.estimator, args.sample_size, n_max);
  config["dist"] = args.dist;
  config["M"] = args.trials;
  config["resamples"] = args.resamples;
  config["confidence"] = args.confidence;
  config["mc_truth"] = args.mc_truth ? json(*args.mc_truth) : json(nullptr);
  emit(envelope(std::move(config), std::move(report)), args.out);
  return 0;
}

struct CurvesSimArgs {
  std::vector<std::string> dists;
  std::size_t sample_size = 50;
  std::size_t samples = 1000;
  std::string estimator = "meanmax";
  std::optional<std::size_t> mc_truth;
  SimOptions sim;
  OutputOptions out;
};

// "name=path" or a bare path named after its stem.
NamedDistribution load_named(const std::string& spec) {
  const auto eq = spec.find('=');
  const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
  std::string name = eq == std::string::npos ? dist_id(path) : spec.substr(0, eq);
  if (name.empty() || name.find(',') != std::string::npos) {
    throw UsageError("--dist: model names must be non-empty and free of commas");
  }
  return {std::move(name), read_distribution(path)};
}

int cmd_curves_sim(const CurvesSimArgs& args) {
  check_outputs(args.out);
  const auto kind = estimator_flag(args.estimator);
  require_positive(args.sample_size, "--B");
  require_positive(args.samples, "--samples");
  if (args.dists.empty()) throw UsageError("--dist is required");
  if (args.mc_truth) require_positive(*args.mc_truth, "--mc-truth");

  std::vector<NamedDistribution> dists;
  for (const auto& d : args.dists) dists.push_back(load_named(d));
  for (std::size_t i = 0; i < dists.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (dists[i].name == dists[j].name) throw UsageError("--dist: duplicate model name " + dists[i].name);
    }
  }
  std::cerr << "curves-sim: " << dists.size() << " models x " << args.samples << " samples of B = "
            << args.sample_size << "\n";
  ExperimentOptions options{args.sim.threads, args.mc_truth};
  auto report = curves(dists, args.sample_size, args.samples, kind, RngStream(args.sim.seed), options);

  auto config = sim_config("curves-sim", args.sim, args.estimator, args.sample_size, args.sample_size);
  config["dist"] = args.dists;
  config["samples"] = args.samples;
  config["mc_truth"] = args.mc_truth ? json(*args.mc_truth) : json(nullptr);
  emit(envelope(std::move(config), std::move(report)), args.out);
  return 0;
}

struct FailureScanArgs {
  std::string report;
  std::string model_a;
  std::string model_b;
  OutputOptions out;
};

int cmd_failure_scan(const FailureScanArgs& args) {
  const auto env = read_report(args.report);
  const auto* curves_report = std::get_if<CurveReport>(&env.payload);
  if (!curves_report) throw UsageError("--report must be a curves-sim report");

  FailureScanReport scan;
  scan.model_a = args.model_a;
  scan.model_b = args.model_b;
  scan.estimator = curves_report->estimator;
  try {
    scan.inversions = failure_scan(*curves_report, args.model_a, args.model_b);
  } catch (const InvalidInput& e) {
    if (e.code() == InputErrc::unknown_name) throw UsageError(e.what());
    throw;
  }
  std::cerr << "failure-scan: " << scan.inversions.size() << " inverted budget(s)";
  for (const auto& inv : scan.inversions) std::cerr << (&inv == &scan.inversions.front() ? ": " : ", ") << inv.n;
  std::cerr << "\n";

  json config{{"command", "failure-scan"},
              {"report", args.report},
              {"a", args.model_a},
              {"b", args.model_b}};
  emit(envelope(std::move(config), std::move(scan)), args.out);
  return 0;
}

struct KsBoundArgs {
  std::vector<std::size_t> budgets{1, 5, 10};
  std::optional<double> cdf_at_max;
  std::string runs;
  std::string dist;
  OutputOptions out;
};

int cmd_ks_bound(const KsBoundArgs& args) {
  for (auto n : args.budgets) require_positive(n, "--n");
  const bool from_data = !args.runs.empty() || !args.dist.empty();
  if (from_data == args.cdf_at_max.has_value()) {
    throw UsageError("pass either --cdf-at-max or both --runs and --dist");
  }
  if (from_data && (args.runs.empty() || args.dist.empty())) {
    throw UsageError("--runs and --dist must be given together");
  }
  if (args.cdf_at_max && !(*args.cdf_at_max >= 0.0 && *args.cdf_at_max <= 1.0)) {
    throw UsageError("--cdf-at-max must lie in [0, 1]");
  }

  KsBoundReport report;
  if (args.cdf_at_max) {
    for (auto n : args.budgets) report.rows.push_back({n, *args.cdf_at_max, ks_lower_bound(*args.cdf_at_max, n), std::nullopt});
  } else {
    const auto sample = read_runs(args.runs);
    const auto dist = read_distribution(args.dist);
    std::vector<double> grid(dist.support().begin(), dist.support().end());
    grid.insert(grid.end(), sample.sorted().begin(), sample.sorted().end());
    std::sort(grid.begin(), grid.end());
    const double f_max = dist.cdf(sample.max());
    for (auto n : args.budgets) {
      const double p = static_cast<double>(n);
      const double measured = ks_distance([&](double x) { return ecdf_pow(sample, x, n); },
                                          [&](double x) { return std::pow(dist.cdf(x), p); }, grid);
      report.rows.push_back({n, f_max, ks_lower_bound(f_max, n), measured});
    }
  }

  json config{{"command", "ks-bound"},
              {"n", args.budgets},
              {"cdf_at_max", args.cdf_at_max ? json(*args.cdf_at_max) : json(nullptr)},
              {"runs", args.runs},
              {"dist", args.dist}};
  emit(envelope(std::move(config), std::move(report)), args.out);
  return 0;
}

struct SynthArgs {
  std::size_t count = 145;
  SyntheticShape shape;
  std::string output = "-";
};

int cmd_synth_runs(const SynthArgs& args) {
  require_positive(args.count, "--count");
  try {
    args.shape.validate();
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
  const ScoreSample runs(synthetic_runs(args.shape, args.count));
  if (args.output == "-") {
    std::cout << "score\n";
    for (double v : runs.ingestion_order()) std::cout << format_double(v) << "\n";
  } else {
    write_runs(runs, args.output);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"meanmax: expected maximum validation score under a tuning budget"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CurveArgs curve_args;
  auto* curve = app.add_subcommand("curve", "Estimate the budget-quality curve of a runs file");
  curve->add_option("--runs", curve_args.runs, "Runs CSV (score[,run_id])")->required();
  curve->add_option("--estimator", curve_args.estimators,
                    "Estimator(s): meanmax, meanmax-prefix, unbiased");
  curve->add_option("--n-max", curve_args.n_max, "Largest budget (default: B)");
  curve->add_flag("--ci", curve_args.ci, "Attach percentile bootstrap CIs");
  curve->add_option("--resamples", curve_args.resamples, "Bootstrap resamples");
  curve->add_option("--confidence", curve_args.confidence, "CI confidence level");
  curve->add_option("--seed", curve_args.seed, "Random seed");
  add_output_options(curve, curve_args.out, true);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit a discretized Gaussian KDE to a runs file");
  fit->add_option("--runs", fit_args.runs, "Runs CSV")->required();
  fit->add_option("--preset", fit_args.preset, "Kernel preset: mlp, lstm, glove, elmo");
  auto* bw_opt = fit->add_option("--bandwidth", fit_args.bandwidth, "Bandwidth or 'scott'");
  fit->add_option("--support-lo", fit_args.support_lo, "Lower support bound");
  fit->add_option("--support-hi", fit_args.support_hi, "Upper support bound");
  auto* bins_opt = fit->add_option("--bins", fit_args.bins, "Number of bins");
  fit->add_option("-o,--output", fit_args.output, "Distribution JSON path ('-' for stdout)");

  ProbeArgs probe_args;
  auto* probe_cmd = app.add_subcommand("probe", "False-conclusion probing: P(estimate < truth) per n");
  probe_cmd->add_option("--dist", probe_args.dist, "Distribution JSON")->required();
  probe_cmd->add_option("--B", probe_args.sample_size, "Sample size");
  probe_cmd->add_option("--n-max", probe_args.n_max, "Largest budget (default: B)");
  probe_cmd->add_option("--samples", probe_args.samples, "Samples per budget");
  probe_cmd->add_option("--estimator", probe_args.estimator, "meanmax, meanmax-prefix or unbiased");
  probe_cmd->add_option("--mc-truth", probe_args.mc_truth, "Use Monte Carlo truth with this many iterations");
  add_sim_options(probe_cmd, probe_args.sim);
  add_output_options(probe_cmd, probe_args.out, true);

  CoverageArgs cov_args;
  auto* cov_cmd = app.add_subcommand("coverage", "Coverage of percentile bootstrap CIs per n");
  cov_cmd->add_option("--dist", cov_args.dist, "Distribution JSON")->required();
  cov_cmd->add_option("--B", cov_args.sample_size, "Sample size");
  cov_cmd->add_option("--n-max", cov_args.n_max, "Largest budget (default: B)");
  cov_cmd->add_option("--M", cov_args.trials, "Samples (CIs) per budget");
  cov_cmd->add_option("--resamples", cov_args.resamples, "Bootstrap resamples per CI");
  cov_cmd->add_option("--confidence", cov_args.confidence, "Nominal CI level");
  cov_cmd->add_option("--estimator", cov_args.estimator, "meanmax, meanmax-prefix or unbiased");
  cov_cmd->add_option("--mc-truth", cov_args.mc_truth, "Use Monte Carlo truth with this many iterations");
  add_sim_options(cov_cmd, cov_args.sim);
  add_output_options(cov_cmd, cov_args.out, true);

  CurvesSimArgs sim_args;
  auto* sim_cmd = app.add_subcommand("curves-sim", "Averaged estimated curves vs. true curves");
  sim_cmd->add_option("--dist", sim_args.dists, "Distribution JSON, optionally name=path (repeatable)")
      ->required();
  sim_cmd->add_option("--B", sim_args.sample_size, "Sample size");
  sim_cmd->add_option("--samples", sim_args.samples, "Samples averaged per model");
  sim_cmd->add_option("--estimator", sim_args.estimator, "meanmax, meanmax-prefix or unbiased");
  sim_cmd->add_option("--mc-truth", sim_args.mc_truth, "Use Monte Carlo truth with this many iterations");
  add_sim_options(sim_cmd, sim_args.sim);
  add_output_options(sim_cmd, sim_args.out, true);

  FailureScanArgs scan_args;
  auto* scan_cmd = app.add_subcommand("failure-scan", "Budgets where averaged estimates invert the true ranking");
  scan_cmd->add_option("--report", scan_args.report, "curves-sim JSON report")->required();
  scan_cmd->add_option("--a", scan_args.model_a, "First model name")->required();
  scan_cmd->add_option("--b", scan_args.model_b, "Second model name")->required();
  add_output_options(scan_cmd, scan_args.out, false);

  KsBoundArgs ks_args;
  auto* ks_cmd = app.add_subcommand("ks-bound", "KS lower bound 1 - F(v_B)^n (and measured KS)");
  ks_cmd->add_option("--n", ks_args.budgets, "Budgets");
  ks_cmd->add_option("--cdf-at-max", ks_args.cdf_at_max, "True CDF at the sample maximum");
  ks_cmd->add_option("--runs", ks_args.runs, "Runs CSV (with --dist)");
  ks_cmd->add_option("--dist", ks_args.dist, "Ground-truth distribution JSON (with --runs)");
  add_output_options(ks_cmd, ks_args.out, false);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth-runs", "Write deterministic synthetic runs (quantile grid)");
  synth_cmd->add_option("--count", synth_args.count, "Number of runs");
  synth_cmd->add_option("--mean", synth_args.shape.mean, "Gaussian body mean");
  synth_cmd->add_option("--sd", synth_args.shape.sd, "Gaussian body standard deviation");
  synth_cmd->add_option("--tail-quantile", synth_args.shape.tail_quantile,
                        "Quantile above which a Pareto tail replaces the body (1 = none)");
  synth_cmd->add_option("--tail-alpha", synth_args.shape.tail_alpha, "Pareto tail index");
  synth_cmd->add_option("-o,--output", synth_args.output, "Runs CSV path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  fit_args.bandwidth_set = bw_opt->count() > 0;
  fit_args.bins_set = bins_opt->count() > 0;

  try {
    if (curve->parsed()) return cmd_curve(curve_args);
    if (fit->parsed()) return cmd_fit(fit_args);
    if (probe_cmd->parsed()) return cmd_probe(probe_args);
    if (cov_cmd->parsed()) return cmd_coverage(cov_args);
    if (sim_cmd->parsed()) return cmd_curves_sim(sim_args);
    if (scan_cmd->parsed()) return cmd_failure_scan(scan_args);
    if (ks_cmd->parsed()) return cmd_ks_bound(ks_args);
    if (synth_cmd->parsed()) return cmd_synth_runs(synth_args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const RunsFileError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 1;
  } catch (const InvalidInput& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
