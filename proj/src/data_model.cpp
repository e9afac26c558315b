#include "soilfusion/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

#include "soilfusion/error.hpp"

namespace soilfusion {

namespace {

std::string where(std::string_view record) {
  return record.empty() ? std::string{} : " (" + std::string(record) + ")";
}

std::string profile_label(const GprProfile& p) {
  return "plot " + std::to_string(p.plot_id) + ", t=" + std::to_string(p.timestamp);
}

std::size_t cell_of(int position_cm) { return static_cast<std::size_t>(position_cm / kCellWidthCm); }

}  // namespace

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::measured:
      return "measured";
    case Provenance::simulated_gpr:
      return "simulated_gpr";
    case Provenance::simulated_tdr:
      return "simulated_tdr";
  }
  return "measured";
}

Provenance parse_provenance(std::string_view s) {
  if (s == "measured") return Provenance::measured;
  if (s == "simulated_gpr") return Provenance::simulated_gpr;
  if (s == "simulated_tdr") return Provenance::simulated_tdr;
  throw SchemaError("unknown provenance '" + std::string(s) + "'");
}

std::optional<std::size_t> Dataset::gpr_column() const {
  const auto it = std::find(schema.begin(), schema.end(), kGprFeatureName);
  if (it == schema.end()) return std::nullopt;
  return static_cast<std::size_t>(it - schema.begin());
}

std::vector<double> Dataset::feature_matrix() const {
  std::vector<double> x;
  x.reserve(rows.size() * schema.size());
  for (const auto& r : rows) x.insert(x.end(), r.features.begin(), r.features.end());
  return x;
}

std::vector<double> Dataset::targets() const {
  std::vector<double> y;
  y.reserve(rows.size());
  for (const auto& r : rows) y.push_back(r.target);
  return y;
}

void Dataset::validate() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.features.size() != schema.size()) {
      throw SchemaError("row " + std::to_string(i) + " has " + std::to_string(r.features.size()) +
                        " features, schema has " + std::to_string(schema.size()));
    }
    if (!std::isfinite(r.target)) throw SchemaError("row " + std::to_string(i) + " has a non-finite target");
    for (double v : r.features) {
      if (!std::isfinite(v)) throw SchemaError("row " + std::to_string(i) + " has a non-finite feature");
    }
  }
}

std::vector<std::string> spectrum_schema(bool with_gpr) {
  std::vector<std::string> names;
  names.reserve(kSpectrumBandCount + 1);
  for (std::size_t b = kTrimLeading; b < kRawBandCount - kTrimTrailing; ++b) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "b%03zu", b);
    names.emplace_back(buf);
  }
  if (with_gpr) names.emplace_back(kGprFeatureName);
  return names;
}

void sort_rows(std::vector<Datapoint>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const Datapoint& a, const Datapoint& b) {
    return std::tuple(a.plot_id, a.timestamp, a.position_index, a.provenance) <
           std::tuple(b.plot_id, b.timestamp, b.position_index, b.provenance);
  });
}

void validate(const RawSpectrum& s, std::string_view record) {
  if (s.bands.size() != kRawBandCount) {
    throw SchemaError("raw spectrum has " + std::to_string(s.bands.size()) + " bands, expected " +
                      std::to_string(kRawBandCount) + where(record));
  }
  for (double v : s.bands) {
    if (!std::isfinite(v)) throw SchemaError("raw spectrum has a non-finite band" + where(record));
  }
}

void validate(const GprProfile& p) {
  if (p.positions_cm.size() != p.delta_theta.size()) {
    throw SchemaError("GPR profile position/value length mismatch (" + profile_label(p) + ")");
  }
  for (std::size_t i = 0; i < p.positions_cm.size(); ++i) {
    const int pos = p.positions_cm[i];
    if (pos < 0 || pos >= kProfileLengthCm) {
      throw SchemaError("GPR position " + std::to_string(pos) + " outside [0, 99] (" + profile_label(p) + ")");
    }
    if (i > 0 && pos <= p.positions_cm[i - 1]) {
      throw SchemaError("GPR positions not strictly increasing (" + profile_label(p) + ")");
    }
    if (!std::isfinite(p.delta_theta[i])) throw SchemaError("non-finite GPR value (" + profile_label(p) + ")");
  }
}

void validate(const TdrSample& s, std::string_view record) {
  if (s.depth_cm != kTdrDepthCm) {
    throw SchemaError("TDR depth " + std::to_string(s.depth_cm) + " cm, expected 5" + where(record));
  }
  if (s.position_index < 0 || s.position_index >= kCellCount) {
    throw SchemaError("TDR position index out of [0, 9]" + where(record));
  }
  if (!std::isfinite(s.theta) || s.theta < 0.0) throw SchemaError("TDR theta must be finite and >= 0" + where(record));
}

void validate(const HyperspectralFrame& f) {
  const std::string label = "frame plot " + std::to_string(f.plot_id) + ", t=" + std::to_string(f.timestamp);
  if (f.timestamp < 0) throw SchemaError("negative timestamp (" + label + ")");
  for (const auto& [pos, spec] : f.pixels) {
    if (pos < 0 || pos >= kCellCount) throw SchemaError("pixel position out of [0, 9] (" + label + ")");
    validate(spec, label + ", position " + std::to_string(pos));
  }
}

Spectrum trim_spectrum(const RawSpectrum& raw, std::string_view record) {
  validate(raw, record);
  return Spectrum{{raw.bands.begin() + kTrimLeading, raw.bands.end() - kTrimTrailing}};
}

std::array<double, kCellCount> resample_profile(const GprProfile& profile) {
  validate(profile);
  std::array<double, kCellCount> sum{};
  std::array<int, kCellCount> count{};
  std::array<double, kCellCount> lo{}, hi{};
  for (std::size_t i = 0; i < profile.positions_cm.size(); ++i) {
    const auto c = cell_of(profile.positions_cm[i]);
    const double v = profile.delta_theta[i];
    sum[c] += v;
    lo[c] = count[c] == 0 ? v : std::min(lo[c], v);
    hi[c] = count[c] == 0 ? v : std::max(hi[c], v);
    ++count[c];
  }
  std::array<double, kCellCount> out{};
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (count[c] == 0) {
      throw ResamplingError("no GPR samples in cell " + std::to_string(c) + " (" + profile_label(profile) + ")");
    }
    // Rounding can push the mean of equal values just outside their range.
    out[c] = std::clamp(sum[c] / count[c], lo[c], hi[c]);
  }
  return out;
}

std::optional<std::size_t> nearest_in_time(std::span<const Timestamp> times, Timestamp t, Timestamp tolerance) {
  std::optional<std::size_t> best;
  Timestamp best_gap = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Timestamp gap = times[i] > t ? times[i] - t : t - times[i];
    if (gap > tolerance) continue;
    if (!best || gap < best_gap || (gap == best_gap && times[i] < times[*best])) {
      best = i;
      best_gap = gap;
    }
  }
  return best;
}

std::map<int, std::vector<int>> probe_positions(std::span<const TdrSample> tdr) {
  std::map<int, std::set<int>> seen;
  for (const auto& s : tdr) seen[s.plot_id].insert(s.position_index);
  std::map<int, std::vector<int>> out;
  for (const auto& [plot, cells] : seen) out[plot] = {cells.begin(), cells.end()};
  return out;
}

const HyperspectralFrame* find_frame(std::span<const HyperspectralFrame> frames, int plot_id, int position_index,
                                     Timestamp t, Timestamp tolerance) {
  const HyperspectralFrame* best = nullptr;
  Timestamp best_gap = 0;
  for (const auto& f : frames) {
    if (f.plot_id != plot_id || !f.pixels.contains(position_index)) continue;
    const Timestamp gap = f.timestamp > t ? f.timestamp - t : t - f.timestamp;
    if (gap > tolerance) continue;
    if (!best || gap < best_gap || (gap == best_gap && f.timestamp < best->timestamp)) {
      best = &f;
      best_gap = gap;
    }
  }
  return best;
}

AssemblyResult assemble_measured_dataset(std::span<const HyperspectralFrame> frames,
                                         std::span<const GprProfile> profiles, std::span<const TdrSample> tdr_samples,
                                         Timestamp time_tolerance_s) {
  if (time_tolerance_s <= 0) throw ConfigError("time tolerance must be positive");

  // TDR timestamps grouped by (plot, cell), keeping sample indices alongside.
  std::map<std::pair<int, int>, std::pair<std::vector<Timestamp>, std::vector<std::size_t>>> tdr_index;
  for (std::size_t i = 0; i < tdr_samples.size(); ++i) {
    auto& [times, idx] = tdr_index[{tdr_samples[i].plot_id, tdr_samples[i].position_index}];
    times.push_back(tdr_samples[i].timestamp);
    idx.push_back(i);
  }
  const auto probes = probe_positions(tdr_samples);

  AssemblyResult out;
  out.dataset.schema = spectrum_schema(true);
  for (const auto& profile : profiles) {
    const auto probe_it = probes.find(profile.plot_id);
    if (probe_it == probes.end()) {
      out.skipped.add(profile.plot_id, profile.timestamp, -1, "no TDR probe in plot");
      continue;
    }
    std::optional<std::array<double, kCellCount>> cells;
    for (int pos : probe_it->second) {
      const auto& [times, idx] = tdr_index.at({profile.plot_id, pos});
      const auto hit = nearest_in_time(times, profile.timestamp, time_tolerance_s);
      if (!hit) {
        out.skipped.add(profile.plot_id, profile.timestamp, pos, "no TDR sample within tolerance");
        continue;
      }
      const auto* frame = find_frame(frames, profile.plot_id, pos, profile.timestamp, time_tolerance_s);
      if (!frame) {
        out.skipped.add(profile.plot_id, profile.timestamp, pos, "no hyperspectral frame within tolerance");
        continue;
      }
      if (!cells) cells = resample_profile(profile);
      const TdrSample& tdr = tdr_samples[idx[*hit]];
      Datapoint row;
      row.plot_id = profile.plot_id;
      row.timestamp = profile.timestamp;
      row.position_index = pos;
      row.features = trim_spectrum(frame->pixels.at(pos)).bands;
      row.features.push_back((*cells)[static_cast<std::size_t>(pos)]);
      row.target = tdr.theta;
      row.provenance = Provenance::measured;
      out.dataset.rows.push_back(std::move(row));
    }
  }
  sort_rows(out.dataset.rows);
  return out;
}

}  // namespace soilfusion
