#pragma once

// Measurement types of a field campaign and assembly of the measured dataset.
//
// A campaign consists of hyperspectral frames (one raw 125-band spectrum per
// 10 cm cell along the profile line), GPR profiles (soil-moisture variation
// at 1 cm spacing) and TDR samples (soil moisture at 5 cm depth, one probe
// cell per plot). Assembly fuses them into rows of
//   [trimmed spectrum (115 bands), resampled GPR variation] -> TDR theta.

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace soilfusion {

using Timestamp = std::int64_t;  // seconds since epoch

inline constexpr std::size_t kRawBandCount = 125;
inline constexpr std::size_t kTrimLeading = 5;
inline constexpr std::size_t kTrimTrailing = 5;
inline constexpr std::size_t kSpectrumBandCount = kRawBandCount - kTrimLeading - kTrimTrailing;
inline constexpr int kCellCount = 10;      // 10 cm cells on a 1 m profile line
inline constexpr int kCellWidthCm = 10;
inline constexpr int kProfileLengthCm = kCellCount * kCellWidthCm;
inline constexpr int kTdrDepthCm = 5;
inline constexpr Timestamp kDefaultTimeToleranceS = 600;

inline constexpr std::string_view kGprFeatureName = "gpr_dtheta";
inline constexpr std::string_view kTargetName = "theta";

struct RawSpectrum {
  std::vector<double> bands;  // 125 values
};

struct Spectrum {
  std::vector<double> bands;  // 115 values, raw bands 5..119
};

struct HyperspectralFrame {
  int plot_id = 0;
  Timestamp timestamp = 0;
  std::map<int, RawSpectrum> pixels;  // cell index 0..9 -> spectrum
};

struct GprProfile {
  int plot_id = 0;
  Timestamp timestamp = 0;
  std::vector<int> positions_cm;
  std::vector<double> delta_theta;
};

struct TdrSample {
  int plot_id = 0;
  Timestamp timestamp = 0;
  int depth_cm = kTdrDepthCm;
  int position_index = 0;
  double theta = 0.0;
};

enum class Provenance { measured, simulated_gpr, simulated_tdr };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view s);

struct Datapoint {
  int plot_id = 0;
  Timestamp timestamp = 0;
  int position_index = 0;
  std::vector<double> features;
  double target = 0.0;
  Provenance provenance = Provenance::measured;
  // GPR variation the row was derived from when it is not itself a feature
  // (TDR simulation). Not serialized to dataset.csv.
  std::optional<double> source_delta_theta;
};

// Fused rows sharing one feature schema.
struct Dataset {
  std::vector<std::string> schema;  // feature column names
  std::string target_name{kTargetName};
  std::vector<Datapoint> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  std::size_t feature_count() const { return schema.size(); }

  // Index of the GPR feature column, if present.
  std::optional<std::size_t> gpr_column() const;

  // Row-major n x d copy of the features, and the target vector.
  std::vector<double> feature_matrix() const;
  std::vector<double> targets() const;

  // Throws SchemaError when a row's feature length differs from the schema or
  // a target is non-finite.
  void validate() const;
};

// Schema names "b005".."b119", optionally followed by "gpr_dtheta".
std::vector<std::string> spectrum_schema(bool with_gpr);

// Rows ordered by (plot, timestamp, position, provenance).
void sort_rows(std::vector<Datapoint>& rows);

// Validation of single records. `record` names the offending row in messages.
void validate(const RawSpectrum& s, std::string_view record = {});
void validate(const GprProfile& p);
void validate(const TdrSample& s, std::string_view record = {});
void validate(const HyperspectralFrame& f);

// Drops the first five and the last five bands.
Spectrum trim_spectrum(const RawSpectrum& raw, std::string_view record = {});

// Mean GPR variation of each 10 cm cell [10k, 10k+9].
std::array<double, kCellCount> resample_profile(const GprProfile& profile);

struct SkipEntry {
  int plot_id = 0;
  Timestamp timestamp = 0;
  int position_index = 0;
  std::string reason;
};

struct SkipReport {
  std::vector<SkipEntry> entries;
  std::size_t count() const { return entries.size(); }
  void add(int plot, Timestamp t, int position, std::string reason) {
    entries.push_back({plot, t, position, std::move(reason)});
  }
};

struct AssemblyResult {
  Dataset dataset;
  SkipReport skipped;
};

// Index into `times` of the entry closest to `t` within `tolerance`; ties go
// to the earlier time, then to the lower index. `times` need not be sorted.
std::optional<std::size_t> nearest_in_time(std::span<const Timestamp> times, Timestamp t, Timestamp tolerance);

// Distinct TDR probe cells per plot.
std::map<int, std::vector<int>> probe_positions(std::span<const TdrSample> tdr);

// Nearest frame of `plot_id` within tolerance of `t` that has a pixel at
// `position_index`.
const HyperspectralFrame* find_frame(std::span<const HyperspectralFrame> frames, int plot_id, int position_index,
                                     Timestamp t, Timestamp tolerance);

// One row per (GPR profile, probe cell of its plot) for which both a TDR
// sample and a frame exist within `time_tolerance_s` of the profile time.
// Rows carry the profile timestamp. Misses are reported, not thrown.
AssemblyResult assemble_measured_dataset(std::span<const HyperspectralFrame> frames,
                                         std::span<const GprProfile> profiles, std::span<const TdrSample> tdr_samples,
                                         Timestamp time_tolerance_s = kDefaultTimeToleranceS);

}  // namespace soilfusion
