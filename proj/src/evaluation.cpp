#include "soilfusion/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "soilfusion/error.hpp"
#include "soilfusion/io.hpp"
#include "soilfusion/rng.hpp"

namespace soilfusion {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b, std::string_view metric) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(metric) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw DimensionError(std::string(metric) + ": empty input");
}

// Metrics accumulate in long double so results are correctly rounded even
// when sums cancel heavily.
long double mean(std::span<const double> v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return s / static_cast<long double>(v.size());
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

Dataset with_rows(const Dataset& proto, std::vector<Datapoint> rows) {
  Dataset d;
  d.schema = proto.schema;
  d.target_name = proto.target_name;
  d.rows = std::move(rows);
  return d;
}

std::size_t train_count(std::size_t n, double ratio) {
  const auto k = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * ratio));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

}  // namespace

double r2(std::span<const double> y_true, std::span<const double> y_pred) {
  check_pair(y_true, y_pred, "r2");
  if (is_constant(y_true)) throw MetricError("undefined R² (zero variance)");
  const long double m = mean(y_true);
  long double ss_res = 0.0L, ss_tot = 0.0L;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const long double e = static_cast<long double>(y_true[i]) - y_pred[i];
    const long double c = y_true[i] - m;
    ss_res += e * e;
    ss_tot += c * c;
  }
  if (!(ss_tot > 0.0L)) throw MetricError("undefined R² (zero variance)");
  return static_cast<double>(1.0L - ss_res / ss_tot);
}

double rmse(std::span<const double> y_true, std::span<const double> y_pred) {
  check_pair(y_true, y_pred, "rmse");
  long double ss = 0.0L;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const long double e = static_cast<long double>(y_true[i]) - y_pred[i];
    ss += e * e;
  }
  return static_cast<double>(std::sqrt(ss / static_cast<long double>(y_true.size())));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b, "pearson");
  if (a.size() < 2) throw MetricError("undefined correlation (fewer than 2 points)");
  if (is_constant(a) || is_constant(b)) throw MetricError("undefined correlation (constant input)");
  const long double ma = mean(a);
  const long double mb = mean(b);
  long double sab = 0.0L, saa = 0.0L, sbb = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double da = a[i] - ma;
    const long double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0L) || !(sbb > 0.0L)) throw MetricError("undefined correlation (constant input)");
  return std::clamp(static_cast<double>(sab / std::sqrt(saa * sbb)), -1.0, 1.0);
}

TrainTestSplit train_test_split(const Dataset& ds, std::uint64_t seed, const SplitOptions& opts) {
  if (ds.size() < 2) throw InsufficientDataError("split needs at least 2 rows");
  if (!(opts.ratio > 0.0 && opts.ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  Rng rng(seed);

  std::vector<Datapoint> train, test;
  if (!opts.stratify_by_plot) {
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span(order));
    const std::size_t k = train_count(ds.size(), opts.ratio);
    for (std::size_t i = 0; i < order.size(); ++i) (i < k ? train : test).push_back(ds.rows[order[i]]);
  } else {
    std::map<int, std::vector<std::size_t>> by_plot;
    for (std::size_t i = 0; i < ds.size(); ++i) by_plot[ds.rows[i].plot_id].push_back(i);
    for (auto& [plot, order] : by_plot) {
      rng.shuffle(std::span(order));
      // A single-row plot goes to training.
      const std::size_t k = order.size() < 2 ? order.size() : train_count(order.size(), opts.ratio);
      for (std::size_t i = 0; i < order.size(); ++i) (i < k ? train : test).push_back(ds.rows[order[i]]);
    }
  }
  return {with_rows(ds, std::move(train)), with_rows(ds, std::move(test))};
}

PlotCorrelation correlate_plots(const Dataset& ds) {
  const auto col = ds.gpr_column();
  if (!col) throw SchemaError("correlation needs the " + std::string(kGprFeatureName) + " column");
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_plot;
  std::vector<double> all_x, all_y;
  for (const auto& r : ds.rows) {
    auto& [x, y] = by_plot[r.plot_id];
    x.push_back(r.features[*col]);
    y.push_back(r.target);
    all_x.push_back(r.features[*col]);
    all_y.push_back(r.target);
  }
  PlotCorrelation out;
  for (const auto& [plot, xy] : by_plot) {
    out.n_per_plot[plot] = xy.first.size();
    try {
      out.per_plot[plot] = pearson(xy.first, xy.second);
    } catch (const MetricError& e) {
      out.omitted[plot] = e.what();
    }
  }
  out.n_pooled = all_x.size();
  if (all_x.size() >= 2) {
    try {
      out.pooled = pearson(all_x, all_y);
    } catch (const MetricError&) {
    }
  }
  return out;
}

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::baseline:
      return "baseline";
    case Experiment::approach1:
      return "approach1";
    case Experiment::approach2:
      return "approach2";
  }
  return "baseline";
}

Experiment parse_experiment(std::string_view s) {
  if (s == "baseline") return Experiment::baseline;
  if (s == "approach1") return Experiment::approach1;
  if (s == "approach2") return Experiment::approach2;
  throw ConfigError("unknown experiment '" + std::string(s) + "' (baseline|approach1|approach2)");
}

Dataset prepare_experiment_dataset(const Dataset& ds, Experiment e) {
  ds.validate();
  const auto col = ds.gpr_column();
  switch (e) {
    case Experiment::approach1:
      if (!col) throw SchemaError("approach1 needs the " + std::string(kGprFeatureName) + " feature");
      return ds;
    case Experiment::approach2:
      if (col) throw SchemaError("approach2 expects spectrum-only features");
      return ds;
    case Experiment::baseline: {
      if (!col) return ds;
      Dataset out = ds;
      out.schema.erase(out.schema.begin() + static_cast<std::ptrdiff_t>(*col));
      for (auto& r : out.rows) r.features.erase(r.features.begin() + static_cast<std::ptrdiff_t>(*col));
      return out;
    }
  }
  return ds;
}

ExperimentResult run_experiment(const Dataset& ds, Experiment e, std::uint64_t seed, const ExperimentOptions& opts) {
  const Dataset prepared = prepare_experiment_dataset(ds, e);
  const auto split = train_test_split(prepared, derive_seed(seed, streams::kSplit), opts.split);

  ForestParams params = opts.forest;
  params.seed = derive_seed(seed, streams::kEvalForest);
  const auto x_train = split.train.feature_matrix();
  const auto y_train = split.train.targets();
  const std::size_t d = prepared.feature_count();
  auto model = fit_extra_trees(MatrixView(x_train, split.train.size(), d), y_train, params, opts.n_threads);

  const auto x_test = split.test.feature_matrix();
  const auto y_test = split.test.targets();
  const auto y_hat = predict_forest(model, MatrixView(x_test, split.test.size(), d));

  EvalReport rep;
  rep.experiment = e;
  rep.method = opts.method;
  rep.r2 = r2(y_test, y_hat);
  rep.rmse = rmse(y_test, y_hat);
  if (const auto col = prepared.gpr_column()) rep.fi_gpr = model.feature_importances()[*col];
  rep.n_train = split.train.size();
  rep.n_test = split.test.size();
  rep.seed = seed;

  std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_plot;
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    auto& [t, p] = by_plot[split.test.rows[i].plot_id];
    t.push_back(y_test[i]);
    p.push_back(y_hat[i]);
  }
  for (const auto& [plot, tp] : by_plot) {
    try {
      rep.pearson_per_plot[plot] = pearson(tp.first, tp.second);
    } catch (const MetricError&) {
      // constant targets or predictions in this plot's test rows
    }
  }
  try {
    rep.pearson_all = pearson(y_test, y_hat);
  } catch (const MetricError&) {
  }
  return {std::move(rep), std::move(model)};
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json per_plot = nlohmann::json::object();
  for (const auto& [plot, v] : r.pearson_per_plot) per_plot[std::to_string(plot)] = v;
  nlohmann::json j{{"experiment", to_string(r.experiment)},
                   {"method", r.method},
                   {"r2", r.r2},
                   {"rmse", r.rmse},
                   {"pearson_per_plot", per_plot},
                   {"pearson_all", r.pearson_all ? nlohmann::json(*r.pearson_all) : nlohmann::json(nullptr)},
                   {"n_train", r.n_train},
                   {"n_test", r.n_test},
                   {"seed", r.seed}};
  if (r.fi_gpr) j["fi_gpr"] = *r.fi_gpr;
  return j;
}

std::string report_csv_header() { return "experiment,method,seed,n_train,n_test,r2,rmse,fi_gpr,pearson_all\n"; }

std::string report_csv_row(const EvalReport& r) {
  std::string s;
  s += to_string(r.experiment);
  s += ',' + r.method + ',' + std::to_string(r.seed) + ',' + std::to_string(r.n_train) + ',' +
       std::to_string(r.n_test) + ',' + io::format_shortest(r.r2) + ',' + io::format_shortest(r.rmse) + ',';
  if (r.fi_gpr) s += io::format_shortest(*r.fi_gpr);
  s += ',';
  if (r.pearson_all) s += io::format_shortest(*r.pearson_all);
  s += '\n';
  return s;
}

}  // namespace soilfusion
