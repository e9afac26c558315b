#pragma once

// Extension of a sparse measured dataset.
//
// GPR simulation fills in the GPR variation at every TDR sample time that has
// no GPR measurement, either by interpolating the plot's GPR time series (plus
// Gaussian noise) or by a regression from TDR theta to the GPR variation.
// TDR simulation fits a map from GPR variation to theta at the probe cells and
// applies it to the other nine cells of every GPR profile.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "soilfusion/data_model.hpp"
#include "soilfusion/extra_trees.hpp"

namespace soilfusion {

enum class SimMethod { interpolation, linear_regression, et_regression };

// "interpolation", "linreg", "et"
std::string_view to_string(SimMethod m);
// Accepts the short names and "linear_regression" / "et_regression".
SimMethod parse_sim_method(std::string_view s);

inline constexpr double kDefaultNoiseFraction = 0.1;
inline constexpr Timestamp kSecondsPerDay = 86400;

struct SimConfig {
  SimMethod method = SimMethod::interpolation;
  // Unset: kDefaultNoiseFraction times the std of the plot's measured GPR values.
  std::optional<double> noise_sigma;
  std::uint64_t seed = 0;
  bool use_spectrum_features = false;
  // When false, interpolation only spans GPR knots of the same UTC day.
  bool bridge_gaps = true;
  Timestamp time_tolerance_s = kDefaultTimeToleranceS;
  // Used by et_regression; its seed is replaced by derive_seed(seed, streams::kSimForest).
  ForestParams forest;

  void validate() const;
};

// Piecewise-linear interpolation through (xs, ys); queries outside
// [xs.front(), xs.back()] take the nearest endpoint value.
double interp1(std::span<const double> xs, std::span<const double> ys, double xq);
std::vector<double> interp1(std::span<const double> xs, std::span<const double> ys, std::span<const double> xq);

// values[i] + N(0, sigma^2) drawn from a stream seeded with `seed`.
std::vector<double> add_gaussian_noise(std::span<const double> values, double sigma, std::uint64_t seed);

struct SimulationResult {
  Dataset dataset;
  SkipReport skipped;
  // Noise sigma applied per plot (interpolation method only).
  std::map<int, double> noise_sigma;
};

// Measured rows are passed through unchanged; one simulated_gpr row is added
// per TDR sample that was not matched to a GPR profile and has a frame.
SimulationResult simulate_gpr(const Dataset& measured, std::span<const TdrSample> tdr_samples,
                              std::span<const HyperspectralFrame> frames, const SimConfig& cfg);

// Returns only the simulated_tdr rows: spectrum features, simulated theta
// target, one row per non-probe cell of every profile that has a frame.
SimulationResult simulate_tdr(const Dataset& measured, std::span<const GprProfile> profiles,
                              std::span<const HyperspectralFrame> frames, const SimConfig& cfg);

}  // namespace soilfusion
