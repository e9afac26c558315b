#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "soilfusion/data_model.hpp"
#include "soilfusion/extra_trees.hpp"

namespace soilfusion {

// Coefficient of determination 1 - SS_res / SS_tot. Throws MetricError when
// y_true is constant.
double r2(std::span<const double> y_true, std::span<const double> y_pred);
double rmse(std::span<const double> y_true, std::span<const double> y_pred);
// Clipped to [-1, 1]. Throws MetricError when either input is constant.
double pearson(std::span<const double> a, std::span<const double> b);

struct SplitOptions {
  double ratio = 0.5;  // share of rows in the training subset
  bool stratify_by_plot = false;
};

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

// Seeded uniform shuffle; the first ceil(n * ratio) rows train, the rest test.
TrainTestSplit train_test_split(const Dataset& ds, std::uint64_t seed, const SplitOptions& opts = {});

struct PlotCorrelation {
  std::map<int, double> per_plot;
  std::map<int, std::size_t> n_per_plot;
  std::map<int, std::string> omitted;  // plot -> reason
  std::optional<double> pooled;
  std::size_t n_pooled = 0;
};

// Pearson r between the GPR feature and the target, per plot and pooled.
PlotCorrelation correlate_plots(const Dataset& ds);

enum class Experiment { baseline, approach1, approach2 };

std::string_view to_string(Experiment e);
Experiment parse_experiment(std::string_view s);

// The feature set each experiment trains on: approach1 needs the GPR column,
// baseline drops it when present, approach2 requires spectrum-only rows.
Dataset prepare_experiment_dataset(const Dataset& ds, Experiment e);

struct EvalReport {
  Experiment experiment = Experiment::baseline;
  std::string method;
  double r2 = 0.0;
  double rmse = 0.0;
  std::optional<double> fi_gpr;
  // Pearson r between test predictions and test targets.
  std::map<int, double> pearson_per_plot;
  std::optional<double> pearson_all;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
};

struct ExperimentOptions {
  ForestParams forest;  // seed replaced by derive_seed(seed, streams::kEvalForest)
  SplitOptions split;
  std::string method;  // recorded in the report only
  unsigned n_threads = 1;
};

struct ExperimentResult {
  EvalReport report;
  ForestModel model;
};

// Split, fit extra trees on the training half, score the test half.
ExperimentResult run_experiment(const Dataset& ds, Experiment e, std::uint64_t seed,
                                const ExperimentOptions& opts = {});

nlohmann::json to_json(const EvalReport& r);
std::string report_csv_header();
std::string report_csv_row(const EvalReport& r);

}  // namespace soilfusion
