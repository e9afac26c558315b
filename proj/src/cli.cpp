#include "soilfusion/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "soilfusion/csv.hpp"
#include "soilfusion/error.hpp"
#include "soilfusion/evaluation.hpp"
#include "soilfusion/io.hpp"
#include "soilfusion/simulation.hpp"
#include "soilfusion/synthgen.hpp"

namespace soilfusion::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::string_view kSimManifest = "simulation_manifest.json";

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kSeedEnv); env && *env) {
    try {
      return static_cast<std::uint64_t>(io::parse_int(env, kSeedEnv));
    } catch (const Error&) {
      throw ConfigError(std::string(kSeedEnv) + " is not an integer: '" + env + "'");
    }
  }
  return 0;
}

struct ForestFlags {
  std::size_t trees = 100;
  std::size_t kfeat = 0;  // 0: all features
  std::size_t min_split = 5;
  unsigned threads = 1;

  void add_to(CLI::App* app) {
    app->add_option("--trees", trees, "Number of trees")->check(CLI::PositiveNumber);
    app->add_option("--kfeat", kfeat, "Candidate features per split (0 = all)");
    app->add_option("--min-split", min_split, "Nodes with at most this many samples become leaves")->check(CLI::Range(1, 1 << 30));
    app->add_option("--threads", threads, "Worker threads for tree building")->check(CLI::PositiveNumber);
  }

  ForestParams params() const {
    ForestParams p;
    p.n_trees = trees;
    if (kfeat > 0) p.k_features = kfeat;
    p.min_samples_split = min_split;
    return p;
  }

  void echo(std::vector<std::string>& args) const {
    args.insert(args.end(), {"--trees", std::to_string(trees), "--kfeat", std::to_string(kfeat), "--min-split",
                             std::to_string(min_split), "--threads", std::to_string(threads)});
  }

  json to_json() const {
    return {{"n_trees", trees}, {"k_features", kfeat}, {"min_samples_split", min_split}, {"threads", threads}};
  }
};

std::string echo_document(std::string_view command, const std::vector<std::string>& args, json resolved) {
  json doc{{"tool", "soilfusion"},
           {"version", kVersion},
           {"command", command},
           {"args", args},
           {"resolved", std::move(resolved)}};
  return doc.dump(2) + "\n";
}

// Echoes never record the output directory, and record inputs relative to it,
// so a whole output tree can be moved and replayed in place.
std::string relative_input(const std::string& in, const std::string& out) {
  return fs::absolute(in).lexically_normal().lexically_relative(fs::absolute(out).lexically_normal()).generic_string();
}

std::string echo_name(std::string_view command) { return std::string(command) + "_config.json"; }

// ---------------------------------------------------------------- generate

struct GenerateOptions {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string campaign;
};

void cmd_generate(const GenerateOptions& o, std::ostream& log) {
  CampaignConfig cfg = CampaignConfig::defaults();
  if (!o.campaign.empty()) {
    json j;
    try {
      j = json::parse(io::read_file(o.campaign));
    } catch (const json::exception& e) {
      throw ConfigError("cannot parse campaign file " + o.campaign + ": " + e.what());
    }
    cfg = campaign_from_json(j.contains("config") ? j.at("config") : j);
  }
  if (o.seed || std::getenv(kSeedEnv)) cfg.seed = resolve_seed(o.seed);

  const auto campaign = generate_campaign(cfg);
  io::OutputSet outputs(o.out);
  // manifest.json carries the full resolved config and serves as the echo.
  for (auto& [name, content] : campaign_files(campaign)) outputs.add(name, std::move(content));
  outputs.commit();
  log << "generated " << campaign.profiles.size() << " GPR profiles, " << campaign.tdr.size() << " TDR samples, "
      << campaign.frames.size() << " frames in " << o.out << "\n";
}

// --------------------------------------------------------------- correlate

struct CorrelateOptions {
  std::string in;
  std::string out;
  Timestamp tolerance = kDefaultTimeToleranceS;
};

void cmd_correlate(const CorrelateOptions& o, std::ostream& log) {
  const auto campaign = csv::load_campaign(o.in);
  const auto assembled =
      assemble_measured_dataset(campaign.frames, campaign.profiles, campaign.tdr, o.tolerance);
  const auto& ds = assembled.dataset;
  const auto corr = correlate_plots(ds);

  std::string table = "plot,n,r,note\n";
  for (const auto& [plot, n] : corr.n_per_plot) {
    table += std::to_string(plot) + ',' + std::to_string(n) + ',';
    if (const auto it = corr.per_plot.find(plot); it != corr.per_plot.end()) {
      table += io::format_shortest(it->second) + ",\n";
    } else {
      table += ",undefined: " + corr.omitted.at(plot) + "\n";
    }
  }
  table += "all," + std::to_string(corr.n_pooled) + ',';
  table += corr.pooled ? io::format_shortest(*corr.pooled) + ",\n" : std::string(",undefined\n");

  std::string points = "plot_id,timestamp,position_index,delta_theta,theta\n";
  const std::size_t col = *ds.gpr_column();
  for (const auto& r : ds.rows) {
    points += std::to_string(r.plot_id) + ',' + std::to_string(r.timestamp) + ',' + std::to_string(r.position_index) +
              ',' + io::format_shortest(r.features[col]) + ',' + io::format_shortest(r.target) + '\n';
  }

  io::OutputSet outputs(o.out);
  outputs.add("correlation.csv", table);
  outputs.add("correlation_points.csv", points);
  outputs.add(echo_name("correlate"),
              echo_document("correlate",
                            {"correlate", "--in", relative_input(o.in, o.out), "--time-tolerance",
                             std::to_string(o.tolerance)},
                            {{"in", relative_input(o.in, o.out)},
                             {"time_tolerance_s", o.tolerance},
                             {"measured_rows", ds.size()},
                             {"skipped_pairs", assembled.skipped.count()}}));
  outputs.commit();
  log << "correlated " << ds.size() << " measured rows (" << assembled.skipped.count() << " pairs skipped)\n";
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string in;
  std::string out;
  std::string experiment = "approach1";
  std::string method = "interpolation";
  std::optional<double> noise_sigma;
  std::optional<std::uint64_t> seed;
  bool use_spectrum_features = false;
  bool no_bridge_gaps = false;
  Timestamp tolerance = kDefaultTimeToleranceS;
  ForestFlags forest;
};

json skip_report_json(const SkipReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back(
        {{"plot_id", e.plot_id}, {"timestamp", e.timestamp}, {"position_index", e.position_index}, {"reason", e.reason}});
  }
  return {{"count", r.count()}, {"entries", entries}};
}

// Plot-ready GPR time series per (plot, cell): measured values at GPR times
// and simulated values at the other TDR times.
void add_timeseries(io::OutputSet& outputs, const Dataset& ds) {
  const std::size_t col = *ds.gpr_column();
  std::map<std::pair<int, int>, std::string> files;
  for (const auto& r : ds.rows) {
    auto& text = files[{r.plot_id, r.position_index}];
    if (text.empty()) text = "time,measured_dtheta,simulated_dtheta\n";
    const auto v = io::format_shortest(r.features[col]);
    text += std::to_string(r.timestamp) + ',';
    text += r.provenance == Provenance::measured ? v + ",\n" : "," + v + "\n";
  }
  for (auto& [key, text] : files) {
    outputs.add("timeseries_" + std::to_string(key.first) + "_" + std::to_string(key.second) + ".csv",
                std::move(text));
  }
}

// Per-plot simulated theta along the profile line.
void add_profiles(io::OutputSet& outputs, const Dataset& ds) {
  std::map<int, std::string> files;
  for (const auto& r : ds.rows) {
    auto& text = files[r.plot_id];
    if (text.empty()) text = "timestamp,position_index,delta_theta,simulated_theta\n";
    text += std::to_string(r.timestamp) + ',' + std::to_string(r.position_index) + ',' +
            (r.source_delta_theta ? io::format_shortest(*r.source_delta_theta) : std::string{}) + ',' +
            io::format_shortest(r.target) + '\n';
  }
  for (auto& [plot, text] : files) outputs.add("tdr_profile_" + std::to_string(plot) + ".csv", std::move(text));
}

void cmd_simulate(const SimulateOptions& o, std::ostream& log) {
  const Experiment experiment = parse_experiment(o.experiment);
  if (experiment == Experiment::baseline) throw ConfigError("simulate needs --experiment approach1 or approach2");
  SimConfig cfg;
  cfg.method = parse_sim_method(o.method);
  cfg.noise_sigma = o.noise_sigma;
  cfg.seed = resolve_seed(o.seed);
  cfg.use_spectrum_features = o.use_spectrum_features;
  cfg.bridge_gaps = !o.no_bridge_gaps;
  cfg.time_tolerance_s = o.tolerance;
  cfg.forest = o.forest.params();
  cfg.validate();

  const auto campaign = csv::load_campaign(o.in);
  const auto assembled =
      assemble_measured_dataset(campaign.frames, campaign.profiles, campaign.tdr, o.tolerance);
  const auto result = experiment == Experiment::approach1
                          ? simulate_gpr(assembled.dataset, campaign.tdr, campaign.frames, cfg)
                          : simulate_tdr(assembled.dataset, campaign.profiles, campaign.frames, cfg);

  std::map<std::string, std::size_t> counts;
  for (const auto& r : result.dataset.rows) ++counts[std::string(to_string(r.provenance))];
  json sigma = json::object();
  for (const auto& [plot, s] : result.noise_sigma) sigma[std::to_string(plot)] = s;

  std::vector<std::string> args{"simulate",     "--in",       relative_input(o.in, o.out),
                                "--experiment", o.experiment, "--sim-method",
                                o.method,       "--seed",     std::to_string(cfg.seed),
                                "--time-tolerance", std::to_string(o.tolerance)};
  if (o.noise_sigma) args.insert(args.end(), {"--noise-sigma", io::format_shortest(*o.noise_sigma)});
  if (o.use_spectrum_features) args.emplace_back("--use-spectrum-features");
  if (o.no_bridge_gaps) args.emplace_back("--no-bridge-gaps");
  o.forest.echo(args);

  json manifest{{"approach", to_string(experiment)},
                {"method", to_string(cfg.method)},
                {"seed", cfg.seed},
                {"noise_sigma", cfg.method == SimMethod::interpolation ? json(sigma) : json(nullptr)},
                {"noise_sigma_flag", o.noise_sigma ? json(*o.noise_sigma) : json(nullptr)},
                {"use_spectrum_features", cfg.use_spectrum_features},
                {"bridge_gaps", cfg.bridge_gaps},
                {"time_tolerance_s", cfg.time_tolerance_s},
                {"forest", o.forest.to_json()},
                {"row_counts", counts},
                {"rows_total", result.dataset.size()},
                {"assembly_skips", skip_report_json(assembled.skipped)},
                {"simulation_skips", skip_report_json(result.skipped)}};

  io::OutputSet outputs(o.out);
  outputs.add(std::string(csv::kDatasetFile), csv::format_dataset(result.dataset));
  outputs.add(std::string(kSimManifest), manifest.dump(2) + "\n");
  if (experiment == Experiment::approach1) {
    add_timeseries(outputs, result.dataset);
  } else {
    add_profiles(outputs, result.dataset);
  }
  outputs.add(echo_name("simulate"), echo_document("simulate", args, manifest));
  outputs.commit();
  log << "simulated " << to_string(experiment) << " with " << to_string(cfg.method) << ": "
      << result.dataset.size() << " rows written to " << o.out << "\n";
}

// -------------------------------------------------------------------- eval

struct EvalOptions {
  std::string in;
  std::string out;
  std::string experiment = "approach1";
  std::string method;
  std::optional<std::uint64_t> seed;
  double ratio = 0.5;
  bool stratify = false;
  std::size_t sweep = 0;
  ForestFlags forest;
};

fs::path dataset_path(const std::string& in) {
  const fs::path p(in);
  if (fs::is_directory(p)) return p / csv::kDatasetFile;
  if (fs::is_regular_file(p)) return p;
  throw IoError("input not found: " + in);
}

std::string method_label(const EvalOptions& o, const fs::path& dataset) {
  if (!o.method.empty()) return std::string(to_string(parse_sim_method(o.method)));
  const auto manifest = dataset.parent_path() / kSimManifest;
  if (fs::is_regular_file(manifest)) {
    try {
      return json::parse(io::read_file(manifest)).at("method").get<std::string>();
    } catch (const json::exception&) {
    }
  }
  return "none";
}

std::vector<EvalReport> cmd_eval(const EvalOptions& o, std::ostream& log) {
  const Experiment experiment = parse_experiment(o.experiment);
  const auto path = dataset_path(o.in);
  const std::uint64_t seed = resolve_seed(o.seed);
  const Dataset ds = csv::parse_dataset(io::read_file(path), path.string());

  ExperimentOptions opts;
  opts.forest = o.forest.params();
  opts.split.ratio = o.ratio;
  opts.split.stratify_by_plot = o.stratify;
  opts.method = method_label(o, path);
  opts.n_threads = o.forest.threads;

  std::vector<std::string> args{"eval", "--in", relative_input(o.in, o.out), "--experiment", o.experiment, "--seed",
                                std::to_string(seed), "--ratio", io::format_shortest(o.ratio)};
  if (!o.method.empty()) args.insert(args.end(), {"--sim-method", o.method});
  if (o.stratify) args.emplace_back("--stratify");
  if (o.sweep > 0) args.insert(args.end(), {"--sweep", std::to_string(o.sweep)});
  o.forest.echo(args);

  json config{{"in", relative_input(o.in, o.out)},
              {"experiment", o.experiment},
              {"method", opts.method},
              {"seed", seed},
              {"ratio", o.ratio},
              {"stratify_by_plot", o.stratify},
              {"sweep", o.sweep},
              {"forest", o.forest.to_json()},
              {"seed_derivation", "split: derive_seed(seed, 1); forest: derive_seed(seed, 2); sweep run i uses seed + i"}};

  std::vector<EvalReport> reports;
  std::optional<ForestModel> model;
  if (o.sweep == 0) {
    auto result = run_experiment(ds, experiment, seed, opts);
    reports.push_back(std::move(result.report));
    model = std::move(result.model);
  } else {
    // Runs fan out over worker threads; each writes its own slot.
    reports.resize(o.sweep);
    std::vector<std::optional<std::string>> errors(o.sweep);
    ExperimentOptions run_opts = opts;
    run_opts.n_threads = 1;
    const std::size_t workers = std::min<std::size_t>(o.forest.threads, o.sweep);
    auto work = [&](std::size_t first) {
      for (std::size_t i = first; i < o.sweep; i += workers) {
        try {
          reports[i] = run_experiment(ds, experiment, seed + i, run_opts).report;
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
    };
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    for (const auto& e : errors) {
      if (e) throw Error(*e);
    }
  }

  std::string table = report_csv_header();
  json report;
  for (const auto& r : reports) table += report_csv_row(r);
  if (reports.size() == 1 && o.sweep == 0) {
    report = to_json(reports.front());
  } else {
    json runs = json::array();
    for (const auto& r : reports) runs.push_back(to_json(r));
    report = {{"runs", runs}};
  }
  report["config"] = config;
  report["artifact_version"] = kVersion;

  io::OutputSet outputs(o.out);
  outputs.add("report.json", report.dump(2) + "\n");
  outputs.add("report.csv", table);
  if (model) outputs.add("model.json", serialize_forest(*model));
  outputs.add(echo_name("eval"), echo_document("eval", args, config));
  outputs.commit();
  for (const auto& r : reports) {
    log << to_string(r.experiment) << " [" << r.method << "] seed " << r.seed << ": R2=" << r.r2
        << " RMSE=" << r.rmse;
    if (r.fi_gpr) log << " FI(gpr)=" << *r.fi_gpr;
    log << "\n";
  }
  return reports;
}

// ---------------------------------------------------------------- pipeline

struct PipelineOptions {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise_sigma;
  bool use_spectrum_features = false;
  bool no_bridge_gaps = false;
  Timestamp tolerance = kDefaultTimeToleranceS;
  double ratio = 0.5;
  ForestFlags forest;
};

void cmd_pipeline(const PipelineOptions& o, std::ostream& log) {
  const std::uint64_t seed = resolve_seed(o.seed);
  if (!(o.ratio > 0.0 && o.ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  if (o.noise_sigma && !(*o.noise_sigma >= 0.0)) throw ConfigError("noise sigma must be non-negative");
  if (o.tolerance <= 0) throw ConfigError("time tolerance must be positive");
  const fs::path root(o.out);

  GenerateOptions gen{(root / "campaign").string(), seed, {}};
  cmd_generate(gen, log);

  std::string summary = report_csv_header();
  auto evaluate = [&](const std::string& in, const std::string& out, const std::string& experiment) {
    EvalOptions e;
    e.in = in;
    e.out = out;
    e.experiment = experiment;
    e.seed = seed;
    e.ratio = o.ratio;
    e.forest = o.forest;
    for (const auto& r : cmd_eval(e, log)) summary += report_csv_row(r);
  };

  for (const char* approach : {"approach1", "approach2"}) {
    for (const char* method : {"interpolation", "linreg", "et"}) {
      const auto dir = (root / (std::string(approach) + "_" + method)).string();
      SimulateOptions s;
      s.in = gen.out;
      s.out = dir;
      s.experiment = approach;
      s.method = method;
      s.noise_sigma = o.noise_sigma;
      s.seed = seed;
      s.use_spectrum_features = o.use_spectrum_features;
      s.no_bridge_gaps = o.no_bridge_gaps;
      s.tolerance = o.tolerance;
      s.forest = o.forest;
      cmd_simulate(s, log);
      evaluate(dir, dir, approach);
    }
  }
  evaluate((root / "approach1_interpolation").string(), (root / "baseline").string(), "baseline");

  std::vector<std::string> args{"pipeline", "--seed", std::to_string(seed), "--time-tolerance",
                                std::to_string(o.tolerance), "--ratio", io::format_shortest(o.ratio)};
  if (o.noise_sigma) args.insert(args.end(), {"--noise-sigma", io::format_shortest(*o.noise_sigma)});
  if (o.use_spectrum_features) args.emplace_back("--use-spectrum-features");
  if (o.no_bridge_gaps) args.emplace_back("--no-bridge-gaps");
  o.forest.echo(args);
  io::OutputSet outputs(o.out);
  outputs.add("summary.csv", summary);
  outputs.add(echo_name("pipeline"),
              echo_document("pipeline", args,
                            {{"seed", seed},
                             {"ratio", o.ratio},
                             {"time_tolerance_s", o.tolerance},
                             {"forest", o.forest.to_json()}}));
  outputs.commit();
}

// ------------------------------------------------------------------ replay

struct ReplayOptions {
  std::string config;
  std::string out;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Soil-moisture estimation from fused hyperspectral, GPR and TDR data", "soilfusion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic campaign (hsi.csv, gpr.csv, tdr.csv, manifest.json)");
  generate->add_option("--out", gen.out, "Output directory")->required();
  generate->add_option("--seed", gen.seed, "Random seed (falls back to $SOILFUSION_SEED)");
  generate->add_option("--campaign", gen.campaign, "Campaign config JSON (a manifest.json also works)")
      ->check(CLI::ExistingFile);

  CorrelateOptions cor;
  auto* correlate = app.add_subcommand("correlate", "Per-plot Pearson r between GPR variation and TDR theta");
  correlate->add_option("--in", cor.in, "Campaign directory")->required()->check(CLI::ExistingDirectory);
  correlate->add_option("--out", cor.out, "Output directory")->required();
  correlate->add_option("--time-tolerance", cor.tolerance, "Matching tolerance in seconds")
      ->check(CLI::PositiveNumber);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Extend the measured dataset (approach1: GPR, approach2: TDR)");
  simulate->add_option("--in", sim.in, "Campaign directory")->required()->check(CLI::ExistingDirectory);
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--experiment", sim.experiment, "approach1 | approach2")
      ->check(CLI::IsMember({"approach1", "approach2"}));
  simulate->add_option("--sim-method", sim.method, "interpolation | linreg | et")
      ->check(CLI::IsMember({"interpolation", "linreg", "et"}));
  simulate->add_option("--noise-sigma", sim.noise_sigma, "Gaussian noise sigma (default: 0.1 x plot std)")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--seed", sim.seed, "Random seed (falls back to $SOILFUSION_SEED)");
  simulate->add_flag("--use-spectrum-features", sim.use_spectrum_features, "Add the spectrum to the theta->GPR fit");
  simulate->add_flag("--no-bridge-gaps", sim.no_bridge_gaps, "Interpolate only within a day");
  simulate->add_option("--time-tolerance", sim.tolerance, "Matching tolerance in seconds")
      ->check(CLI::PositiveNumber);
  sim.forest.add_to(simulate);

  EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "Fit extra trees on a 1:1 split and report R2, RMSE, FI");
  eval->add_option("--in", ev.in, "Directory with dataset.csv, or the file itself")->required()->check(CLI::ExistingPath);
  eval->add_option("--out", ev.out, "Output directory")->required();
  eval->add_option("--experiment", ev.experiment, "baseline | approach1 | approach2")
      ->check(CLI::IsMember({"baseline", "approach1", "approach2"}));
  eval->add_option("--sim-method", ev.method, "Method label (default: from simulation_manifest.json)")
      ->check(CLI::IsMember({"interpolation", "linreg", "et"}));
  eval->add_option("--seed", ev.seed, "Random seed (falls back to $SOILFUSION_SEED)");
  eval->add_option("--ratio", ev.ratio, "Training share")->check(CLI::Range(0.0, 1.0));
  eval->add_flag("--stratify", ev.stratify, "Split each plot separately");
  eval->add_option("--sweep", ev.sweep, "Run N seeds (seed, seed+1, ...)");
  ev.forest.add_to(eval);

  PipelineOptions pipe;
  auto* pipeline = app.add_subcommand("pipeline", "generate, simulate and eval every approach x method cell");
  pipeline->add_option("--out", pipe.out, "Output directory")->required();
  pipeline->add_option("--seed", pipe.seed, "Random seed (falls back to $SOILFUSION_SEED)");
  pipeline->add_option("--noise-sigma", pipe.noise_sigma, "Gaussian noise sigma")->check(CLI::NonNegativeNumber);
  pipeline->add_flag("--use-spectrum-features", pipe.use_spectrum_features);
  pipeline->add_flag("--no-bridge-gaps", pipe.no_bridge_gaps);
  pipeline->add_option("--time-tolerance", pipe.tolerance)->check(CLI::PositiveNumber);
  pipeline->add_option("--ratio", pipe.ratio)->check(CLI::Range(0.0, 1.0));
  pipe.forest.add_to(pipeline);

  ReplayOptions rep;
  auto* replay = app.add_subcommand("replay", "Re-run a command from its *_config.json echo");
  replay->add_option("config", rep.config, "Config echo file")->required()->check(CLI::ExistingFile);
  replay->add_option("--out", rep.out, "Override the output directory");

  std::vector<std::string> argv_store{"soilfusion"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*generate) {
      cmd_generate(gen, out);
    } else if (*correlate) {
      cmd_correlate(cor, out);
    } else if (*simulate) {
      cmd_simulate(sim, out);
    } else if (*eval) {
      cmd_eval(ev, out);
    } else if (*pipeline) {
      cmd_pipeline(pipe, out);
    } else if (*replay) {
      json doc;
      try {
        doc = json::parse(io::read_file(rep.config));
      } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + rep.config + ": " + e.what());
      }
      std::vector<std::string> replay_args;
      if (doc.contains("args") && doc.at("args").is_array()) {
        replay_args = doc.at("args").get<std::vector<std::string>>();
      } else if (doc.contains("config") && doc.at("config").is_object()) {
        // A campaign manifest: regenerate beside it unless --out says otherwise.
        const auto seed = doc.at("config").value("seed", std::uint64_t{0});
        replay_args = {"generate", "--campaign", rep.config, "--seed", std::to_string(seed), "--out",
                       fs::path(rep.config).parent_path().empty() ? std::string(".")
                                                                  : fs::path(rep.config).parent_path().string()};
      } else {
        throw ConfigError(rep.config + " is neither a config echo nor a campaign manifest");
      }
      if (replay_args.empty() || replay_args.front() == "replay") throw ConfigError("invalid replay args");
      if (doc.contains("args")) {
        // Inputs are recorded relative to the directory the echo was written to.
        const fs::path origin = fs::path(rep.config).parent_path().empty() ? fs::path(".") : fs::path(rep.config).parent_path();
        for (std::size_t i = 0; i + 1 < replay_args.size(); ++i) {
          if (replay_args[i] == "--in" && fs::path(replay_args[i + 1]).is_relative()) {
            replay_args[i + 1] = (origin / replay_args[i + 1]).lexically_normal().string();
          }
        }
        replay_args.insert(replay_args.end(), {"--out", rep.out.empty() ? origin.string() : rep.out});
      } else if (!rep.out.empty()) {
        replay_args.back() = rep.out;
      }
      return run(replay_args, out, err);
    }
  } catch (const std::exception& e) {
    err << "soilfusion: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace soilfusion::cli
