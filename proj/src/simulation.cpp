#include "soilfusion/simulation.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <type_traits>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <variant>

#include "soilfusion/error.hpp"
#include "soilfusion/linear_model.hpp"
#include "soilfusion/rng.hpp"

namespace soilfusion {

namespace {

// A fitted regressor of either kind behind one predict().
class FittedMap {
 public:
  static FittedMap fit(SimMethod method, MatrixView x, std::span<const double> y, const SimConfig& cfg) {
    if (method == SimMethod::linear_regression) return FittedMap(fit_linear(x, y));
    ForestParams params = cfg.forest;
    params.seed = derive_seed(cfg.seed, streams::kSimForest);
    if (params.k_features && *params.k_features > x.cols()) params.k_features.reset();
    return FittedMap(fit_extra_trees(x, y, params));
  }

  double predict(std::span<const double> row) const {
    return std::visit(
        [&](const auto& m) {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, LinearModel>) {
            return predict_linear(m, row);
          } else {
            return m.predict(row);
          }
        },
        model_);
  }

 private:
  explicit FittedMap(LinearModel m) : model_(std::move(m)) {}
  explicit FittedMap(ForestModel m) : model_(std::move(m)) {}

  std::variant<LinearModel, ForestModel> model_;
};

std::size_t require_gpr_column(const Dataset& measured) {
  const auto col = measured.gpr_column();
  if (!col) throw SchemaError("measured dataset has no " + std::string(kGprFeatureName) + " column");
  measured.validate();
  return *col;
}

double population_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

// Sorted (x, y) knots with duplicate x merged to the mean y.
struct Knots {
  std::vector<double> xs;
  std::vector<double> ys;
};

Knots merge_knots(std::vector<std::pair<double, double>> points) {
  std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  Knots k;
  for (std::size_t i = 0; i < points.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < points.size() && points[j].first == points[i].first) sum += points[j++].second;
    k.xs.push_back(points[i].first);
    k.ys.push_back(sum / static_cast<double>(j - i));
    i = j;
  }
  return k;
}

Timestamp day_of(Timestamp t) { return t >= 0 ? t / kSecondsPerDay : (t - kSecondsPerDay + 1) / kSecondsPerDay; }

std::string cell_label(int plot, int pos) {
  return "plot " + std::to_string(plot) + ", position " + std::to_string(pos);
}

}  // namespace

std::string_view to_string(SimMethod m) {
  switch (m) {
    case SimMethod::interpolation:
      return "interpolation";
    case SimMethod::linear_regression:
      return "linreg";
    case SimMethod::et_regression:
      return "et";
  }
  return "interpolation";
}

SimMethod parse_sim_method(std::string_view s) {
  if (s == "interpolation") return SimMethod::interpolation;
  if (s == "linreg" || s == "linear_regression") return SimMethod::linear_regression;
  if (s == "et" || s == "et_regression") return SimMethod::et_regression;
  throw ConfigError("unknown simulation method '" + std::string(s) + "' (interpolation|linreg|et)");
}

void SimConfig::validate() const {
  if (noise_sigma && !(*noise_sigma >= 0.0 && std::isfinite(*noise_sigma))) {
    throw ConfigError("noise sigma must be finite and non-negative");
  }
  if (time_tolerance_s <= 0) throw ConfigError("time tolerance must be positive");
  if (forest.n_trees == 0) throw ConfigError("number of trees must be positive");
  if (forest.min_samples_split < 1) throw ConfigError("min_samples_split must be at least 1");
}

double interp1(std::span<const double> xs, std::span<const double> ys, double xq) {
  if (xs.empty()) throw InsufficientDataError("interpolation needs at least one knot");
  if (xs.size() != ys.size()) throw DimensionError("knot x and y lengths differ");
  if (std::isnan(xq)) return xq;
  if (xq <= xs.front()) return ys.front();
  if (xq >= xs.back()) return ys.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), xq) - xs.begin());
  const std::size_t lo = hi - 1;
  if (xq == xs[lo]) return ys[lo];
  const double t = (xq - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + t * (ys[hi] - ys[lo]);
}

std::vector<double> interp1(std::span<const double> xs, std::span<const double> ys, std::span<const double> xq) {
  if (xs.empty()) throw InsufficientDataError("interpolation needs at least one knot");
  if (xs.size() != ys.size()) throw DimensionError("knot x and y lengths differ");
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw ConfigError("interpolation knots must be strictly increasing");
  }
  std::vector<double> out;
  out.reserve(xq.size());
  for (double q : xq) out.push_back(interp1(xs, ys, q));
  return out;
}

std::vector<double> add_gaussian_noise(std::span<const double> values, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("noise sigma must be finite and non-negative");
  std::vector<double> out(values.begin(), values.end());
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (auto& v : out) v += sigma * rng.normal();
  return out;
}

SimulationResult simulate_gpr(const Dataset& measured, std::span<const TdrSample> tdr_samples,
                              std::span<const HyperspectralFrame> frames, const SimConfig& cfg) {
  cfg.validate();
  const std::size_t gpr_col = require_gpr_column(measured);
  if (measured.empty()) throw InsufficientDataError("measured dataset is empty");

  // TDR samples per (plot, cell), in time order.
  std::map<std::pair<int, int>, std::vector<std::size_t>> by_cell;
  for (std::size_t i = 0; i < tdr_samples.size(); ++i) {
    validate(tdr_samples[i]);
    by_cell[{tdr_samples[i].plot_id, tdr_samples[i].position_index}].push_back(i);
  }
  for (auto& [key, idx] : by_cell) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return tdr_samples[a].timestamp < tdr_samples[b].timestamp; });
  }

  // A TDR sample already carries a measured GPR value when it is the sample
  // nearest in time to a measured row of its cell (the assembly rule).
  std::set<std::size_t> covered;
  std::map<std::pair<int, int>, std::vector<std::pair<double, double>>> knot_points;
  std::map<int, std::vector<double>> plot_values;
  for (const auto& row : measured.rows) {
    const double dtheta = row.features[gpr_col];
    knot_points[{row.plot_id, row.position_index}].emplace_back(static_cast<double>(row.timestamp), dtheta);
    plot_values[row.plot_id].push_back(dtheta);
    const auto it = by_cell.find({row.plot_id, row.position_index});
    if (it == by_cell.end()) continue;
    std::vector<Timestamp> times;
    for (auto i : it->second) times.push_back(tdr_samples[i].timestamp);
    const auto hit = nearest_in_time(times, row.timestamp, std::numeric_limits<Timestamp>::max());
    if (hit) covered.insert(it->second[*hit]);
  }

  SimulationResult out;
  out.dataset.schema = measured.schema;
  out.dataset.target_name = measured.target_name;
  out.dataset.rows = measured.rows;

  auto emit = [&](const TdrSample& s, const HyperspectralFrame& frame, double dtheta) {
    Datapoint row;
    row.plot_id = s.plot_id;
    row.timestamp = s.timestamp;
    row.position_index = s.position_index;
    row.features = trim_spectrum(frame.pixels.at(s.position_index)).bands;
    row.features.push_back(dtheta);
    row.target = s.theta;
    row.provenance = Provenance::simulated_gpr;
    out.dataset.rows.push_back(std::move(row));
  };

  if (cfg.method == SimMethod::interpolation) {
    for (const auto& [plot, values] : plot_values) {
      out.noise_sigma[plot] = cfg.noise_sigma.value_or(kDefaultNoiseFraction * population_std(values));
    }
    for (const auto& [key, idx] : by_cell) {
      const auto [plot, pos] = key;
      std::vector<std::size_t> pending;
      for (auto i : idx) {
        if (!covered.contains(i)) pending.push_back(i);
      }
      if (pending.empty()) continue;
      const auto kp = knot_points.find(key);
      const Knots knots = kp == knot_points.end() ? Knots{} : merge_knots(kp->second);
      if (knots.xs.size() < 2) {
        throw InsufficientDataError(cell_label(plot, pos) + " has " + std::to_string(knots.xs.size()) +
                                    " GPR timestamps; interpolation needs at least 2");
      }

      std::vector<double> values;
      std::vector<std::size_t> kept;
      for (auto i : pending) {
        const auto t = tdr_samples[i].timestamp;
        if (cfg.bridge_gaps) {
          values.push_back(interp1(knots.xs, knots.ys, static_cast<double>(t)));
          kept.push_back(i);
          continue;
        }
        Knots day;
        for (std::size_t k = 0; k < knots.xs.size(); ++k) {
          if (day_of(static_cast<Timestamp>(knots.xs[k])) == day_of(t)) {
            day.xs.push_back(knots.xs[k]);
            day.ys.push_back(knots.ys[k]);
          }
        }
        if (day.xs.empty()) {
          out.skipped.add(plot, t, pos, "no GPR measurement on the same day");
          continue;
        }
        values.push_back(interp1(day.xs, day.ys, static_cast<double>(t)));
        kept.push_back(i);
      }
      const auto noisy =
          add_gaussian_noise(values, out.noise_sigma.at(plot), derive_seed(cfg.seed, streams::gpr_noise(plot, pos)));
      for (std::size_t k = 0; k < kept.size(); ++k) {
        const auto& s = tdr_samples[kept[k]];
        const auto* frame = find_frame(frames, plot, pos, s.timestamp, cfg.time_tolerance_s);
        if (!frame) {
          out.skipped.add(plot, s.timestamp, pos, "no hyperspectral frame within tolerance");
          continue;
        }
        emit(s, *frame, noisy[k]);
      }
    }
  } else {
    // Inputs: TDR theta, optionally followed by the spectrum; target: GPR value.
    const std::size_t width = cfg.use_spectrum_features ? 1 + kSpectrumBandCount : 1;
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& row : measured.rows) {
      x.push_back(row.target);
      if (cfg.use_spectrum_features) x.insert(x.end(), row.features.begin(), row.features.begin() + kSpectrumBandCount);
      y.push_back(row.features[gpr_col]);
    }
    const auto map = FittedMap::fit(cfg.method, MatrixView(x, y.size(), width), y, cfg);

    for (const auto& [key, idx] : by_cell) {
      const auto [plot, pos] = key;
      for (auto i : idx) {
        if (covered.contains(i)) continue;
        const auto& s = tdr_samples[i];
        const auto* frame = find_frame(frames, plot, pos, s.timestamp, cfg.time_tolerance_s);
        if (!frame) {
          out.skipped.add(plot, s.timestamp, pos, "no hyperspectral frame within tolerance");
          continue;
        }
        std::vector<double> input{s.theta};
        if (cfg.use_spectrum_features) {
          const auto spec = trim_spectrum(frame->pixels.at(pos)).bands;
          input.insert(input.end(), spec.begin(), spec.end());
        }
        emit(s, *frame, map.predict(input));
      }
    }
  }

  sort_rows(out.dataset.rows);
  return out;
}

SimulationResult simulate_tdr(const Dataset& measured, std::span<const GprProfile> profiles,
                              std::span<const HyperspectralFrame> frames, const SimConfig& cfg) {
  cfg.validate();
  const std::size_t gpr_col = require_gpr_column(measured);
  if (measured.empty()) throw InsufficientDataError("measured dataset is empty");

  std::vector<std::pair<double, double>> pairs;
  std::map<int, std::set<int>> probes;
  for (const auto& row : measured.rows) {
    pairs.emplace_back(row.features[gpr_col], row.target);
    probes[row.plot_id].insert(row.position_index);
  }

  // GPR value -> theta.
  std::function<double(double)> simulate;
  Knots knots;
  std::optional<FittedMap> map;
  if (cfg.method == SimMethod::interpolation) {
    knots = merge_knots(pairs);
    if (knots.xs.size() < 2) {
      throw InsufficientDataError("TDR interpolation needs at least 2 distinct GPR values, got " +
                                  std::to_string(knots.xs.size()));
    }
    simulate = [&](double v) { return interp1(knots.xs, knots.ys, v); };
  } else {
    std::vector<double> x, y;
    for (const auto& [dtheta, theta] : pairs) {
      x.push_back(dtheta);
      y.push_back(theta);
    }
    map = FittedMap::fit(cfg.method, MatrixView(x, x.size(), 1), y, cfg);
    simulate = [&](double v) { return map->predict(std::span<const double>(&v, 1)); };
  }

  SimulationResult out;
  out.dataset.schema = spectrum_schema(false);
  out.dataset.target_name = measured.target_name;
  for (const auto& profile : profiles) {
    const auto probe = probes.find(profile.plot_id);
    if (probe == probes.end()) {
      out.skipped.add(profile.plot_id, profile.timestamp, -1, "no measured probe cell for plot");
      continue;
    }
    const auto cells = resample_profile(profile);
    for (int c = 0; c < kCellCount; ++c) {
      if (probe->second.contains(c)) continue;
      const auto* frame = find_frame(frames, profile.plot_id, c, profile.timestamp, cfg.time_tolerance_s);
      if (!frame) {
        out.skipped.add(profile.plot_id, profile.timestamp, c, "no hyperspectral frame within tolerance");
        continue;
      }
      const double dtheta = cells[static_cast<std::size_t>(c)];
      Datapoint row;
      row.plot_id = profile.plot_id;
      row.timestamp = profile.timestamp;
      row.position_index = c;
      row.features = trim_spectrum(frame->pixels.at(c)).bands;
      row.target = simulate(dtheta);
      row.provenance = Provenance::simulated_tdr;
      row.source_delta_theta = dtheta;
      out.dataset.rows.push_back(std::move(row));
    }
  }
  sort_rows(out.dataset.rows);
  return out;
}

}  // namespace soilfusion
