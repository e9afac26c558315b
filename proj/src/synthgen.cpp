#include "soilfusion/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "soilfusion/csv.hpp"
#include "soilfusion/error.hpp"
#include "soilfusion/rng.hpp"

namespace soilfusion {

namespace {

constexpr std::string_view kManifestFormat = "soilfusion.campaign";
constexpr int kManifestVersion = 1;
constexpr Timestamp kDefaultStart = 1502179200;  // 2017-08-08 08:00 UTC
constexpr Timestamp kDefaultGprPeriod = 7200;

// Generator stream ids (distinct from the library's evaluation streams).
constexpr std::uint64_t kPhaseStream = 100;
constexpr std::uint64_t kTdrNoiseStream = 200;
constexpr std::uint64_t kBandNoiseStream = 300;
constexpr std::uint64_t kCouplingNoiseStream = 400;
constexpr std::uint64_t kFineNoiseStream = 500;

constexpr std::uint64_t plot_stream(std::uint64_t base, std::size_t plot) { return base * 1000 + plot; }

Timestamp day_of(Timestamp t) { return t >= 0 ? t / 86400 : (t - 86399) / 86400; }

double cell_center_cm(int cell) { return cell * kCellWidthCm + kCellWidthCm / 2.0; }

// Spatial phases of one plot, drawn once from the campaign seed.
struct PlotField {
  double phase_a = 0.0;
  double phase_b = 0.0;
  double phase_h = 0.0;

  PlotField(const CampaignConfig& cfg, std::size_t plot) {
    Rng rng(derive_seed(cfg.seed, plot_stream(kPhaseStream, plot)));
    const double two_pi = 2.0 * std::numbers::pi;
    phase_a = two_pi * rng.uniform();
    phase_b = two_pi * rng.uniform();
    phase_h = two_pi * rng.uniform();
  }

  double theta(const CampaignConfig& cfg, const PlotSpec& spec, double x_cm, Timestamp t) const {
    const double u = 2.0 * std::numbers::pi * x_cm / kProfileLengthCm;
    double v = spec.base_mm + spec.spatial_amplitude_mm * (std::sin(u + phase_a) + 0.5 * std::sin(2.0 * u + phase_b));
    const double h = 1.0 + cfg.infiltration_heterogeneity * std::sin(u + phase_h);
    for (std::size_t e = 0; e < spec.irrigation_times.size(); ++e) {
      const double dt = static_cast<double>(t - spec.irrigation_times[e]);
      if (dt <= 0.0) continue;
      v += spec.irrigation_mm[e] * h * (1.0 - std::exp(-dt / cfg.rise_tau_s)) * std::exp(-dt / cfg.drydown_tau_s);
    }
    return v;
  }
};

// TDR sampling times: each day with GPR profiles is covered from its first
// GPR time through `tdr_tail_samples` periods after its last one.
std::vector<Timestamp> tdr_schedule(const CampaignConfig& cfg, const PlotSpec& spec) {
  std::map<Timestamp, std::pair<Timestamp, Timestamp>> days;
  for (Timestamp t : spec.gpr_times) {
    auto [it, fresh] = days.try_emplace(day_of(t), t, t);
    if (!fresh) {
      it->second.first = std::min(it->second.first, t);
      it->second.second = std::max(it->second.second, t);
    }
  }
  std::vector<Timestamp> out;
  for (const auto& [day, span] : days) {
    const Timestamp end = span.second + cfg.tdr_tail_samples * cfg.tdr_period_s;
    for (Timestamp t = span.first; t <= end; t += cfg.tdr_period_s) out.push_back(t);
  }
  return out;
}

std::vector<double> standardized(std::vector<double> v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double& x : v) {
    x -= mean;
    ss += x * x;
  }
  const double sd = std::sqrt(ss / n);
  for (double& x : v) x = sd > 0.0 ? x / sd : 0.0;
  return v;
}

// coupling * z + sqrt(1 - coupling^2) * e with e orthogonal to z and of unit
// variance, so pearson(result, z) == coupling whenever z is non-constant.
std::vector<double> mix_with_coupling(const std::vector<double>& theta_series, double coupling, Rng& rng) {
  const auto z = standardized(theta_series);
  std::vector<double> e(z.size());
  for (auto& x : e) x = rng.normal();
  double em = 0.0;
  for (double x : e) em += x;
  em /= static_cast<double>(e.size());
  double ez = 0.0, zz = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    e[i] -= em;
    ez += e[i] * z[i];
    zz += z[i] * z[i];
  }
  if (zz > 0.0) {
    for (std::size_t i = 0; i < e.size(); ++i) e[i] -= ez / zz * z[i];
  }
  e = standardized(std::move(e));
  const double rest = std::sqrt(std::max(0.0, 1.0 - coupling * coupling));
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = coupling * z[i] + rest * e[i];
  return out;
}

nlohmann::json spectrum_to_json(const SpectrumModel& s) {
  return {{"line_start", s.line_start},       {"line_end", s.line_end},
          {"dip_first_band", s.dip_first_band}, {"dip_last_band", s.dip_last_band},
          {"dip_per_mm", s.dip_per_mm},       {"band_noise_sigma", s.band_noise_sigma}};
}

}  // namespace

double SpectrumModel::reflectance(std::size_t band, double theta) const {
  const double frac = static_cast<double>(band) / static_cast<double>(kRawBandCount - 1);
  double r = line_start + (line_end - line_start) * frac;
  if (band >= dip_first_band && band <= dip_last_band && dip_last_band > dip_first_band) {
    const double w = std::sin(std::numbers::pi * static_cast<double>(band - dip_first_band) /
                              static_cast<double>(dip_last_band - dip_first_band));
    r -= dip_per_mm * theta * w;
  }
  return r;
}

CampaignConfig CampaignConfig::defaults() {
  CampaignConfig cfg;
  const Timestamp d0 = kDefaultStart;
  const Timestamp d1 = kDefaultStart + 86400;
  std::vector<Timestamp> gpr;
  for (Timestamp day : {d0, d1}) {
    for (int k = 0; k < 5; ++k) gpr.push_back(day + k * kDefaultGprPeriod);
  }
  cfg.tdr_period_s = kDefaultGprPeriod / 10;
  const Timestamp h = 3600;
  cfg.plots = {
      {4, gpr, 0.95, 19.5, 0.8, {d0 - h / 2, d1 + 3 * h}, {6.0, 5.0}},
      {5, gpr, 0.93, 20.5, 0.8, {d0 + 3 * h, d1 - h / 2}, {6.0, 4.0}},
      {3, gpr, 0.65, 19.0, 0.8, {d0 - h / 2, d1 + 5 * h}, {4.0, 6.0}},
      {6, gpr, 0.0, 21.0, 0.8, {d0 + 5 * h}, {5.0}},
  };
  return cfg;
}

void CampaignConfig::validate() const {
  if (plots.empty()) throw ConfigError("campaign needs at least one plot");
  if (tdr_period_s <= 0) throw ConfigError("TDR period must be positive");
  if (tdr_tail_samples < 0) throw ConfigError("TDR tail samples must be non-negative");
  if (!(rise_tau_s > 0.0) || !(drydown_tau_s > 0.0)) throw ConfigError("time constants must be positive");
  if (!(time_tolerance_s > 0)) throw ConfigError("time tolerance must be positive");
  for (double s : {tdr_noise_sigma, gpr_fine_noise_sigma, spectrum.band_noise_sigma}) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("noise levels must be finite and non-negative");
  }
  if (spectrum.dip_first_band > spectrum.dip_last_band || spectrum.dip_last_band >= kRawBandCount) {
    throw ConfigError("absorption dip band range invalid");
  }
  for (std::size_t p = 0; p < plots.size(); ++p) {
    const auto& s = plots[p];
    const std::string label = "plot " + std::to_string(p + 1);
    if (!(s.coupling >= -1.0 && s.coupling <= 1.0)) throw ConfigError(label + ": coupling must lie in [-1, 1]");
    if (s.probe_position_index < 0 || s.probe_position_index >= kCellCount) {
      throw ConfigError(label + ": probe position index out of [0, 9]");
    }
    if (s.gpr_times.empty()) throw ConfigError(label + ": no GPR times");
    for (std::size_t i = 1; i < s.gpr_times.size(); ++i) {
      if (s.gpr_times[i] <= s.gpr_times[i - 1]) throw ConfigError(label + ": GPR times must be strictly increasing");
    }
    if (s.gpr_times.front() < 0) throw ConfigError(label + ": negative timestamp");
    if (s.irrigation_times.size() != s.irrigation_mm.size()) {
      throw ConfigError(label + ": irrigation times and amounts differ in length");
    }
  }
}

nlohmann::json to_json(const CampaignConfig& cfg) {
  nlohmann::json plots = nlohmann::json::array();
  for (const auto& p : cfg.plots) {
    plots.push_back({{"probe_position_index", p.probe_position_index},
                     {"gpr_times", p.gpr_times},
                     {"coupling", p.coupling},
                     {"base_mm", p.base_mm},
                     {"spatial_amplitude_mm", p.spatial_amplitude_mm},
                     {"irrigation_times", p.irrigation_times},
                     {"irrigation_mm", p.irrigation_mm}});
  }
  return {{"plots", plots},
          {"tdr_period_s", cfg.tdr_period_s},
          {"tdr_tail_samples", cfg.tdr_tail_samples},
          {"rise_tau_s", cfg.rise_tau_s},
          {"drydown_tau_s", cfg.drydown_tau_s},
          {"infiltration_heterogeneity", cfg.infiltration_heterogeneity},
          {"tdr_noise_sigma", cfg.tdr_noise_sigma},
          {"gpr_fine_noise_sigma", cfg.gpr_fine_noise_sigma},
          {"dtheta_scale", cfg.dtheta_scale},
          {"spectrum", spectrum_to_json(cfg.spectrum)},
          {"time_tolerance_s", cfg.time_tolerance_s},
          {"seed", cfg.seed}};
}

CampaignConfig campaign_from_json(const nlohmann::json& j) {
  try {
    CampaignConfig cfg;
    cfg.plots.clear();
    for (const auto& jp : j.at("plots")) {
      PlotSpec p;
      p.probe_position_index = jp.at("probe_position_index").get<int>();
      p.gpr_times = jp.at("gpr_times").get<std::vector<Timestamp>>();
      p.coupling = jp.at("coupling").get<double>();
      p.base_mm = jp.at("base_mm").get<double>();
      p.spatial_amplitude_mm = jp.at("spatial_amplitude_mm").get<double>();
      p.irrigation_times = jp.at("irrigation_times").get<std::vector<Timestamp>>();
      p.irrigation_mm = jp.at("irrigation_mm").get<std::vector<double>>();
      cfg.plots.push_back(std::move(p));
    }
    cfg.tdr_period_s = j.at("tdr_period_s").get<Timestamp>();
    cfg.tdr_tail_samples = j.at("tdr_tail_samples").get<int>();
    cfg.rise_tau_s = j.at("rise_tau_s").get<double>();
    cfg.drydown_tau_s = j.at("drydown_tau_s").get<double>();
    cfg.infiltration_heterogeneity = j.at("infiltration_heterogeneity").get<double>();
    cfg.tdr_noise_sigma = j.at("tdr_noise_sigma").get<double>();
    cfg.gpr_fine_noise_sigma = j.at("gpr_fine_noise_sigma").get<double>();
    cfg.dtheta_scale = j.at("dtheta_scale").get<double>();
    const auto& s = j.at("spectrum");
    cfg.spectrum.line_start = s.at("line_start").get<double>();
    cfg.spectrum.line_end = s.at("line_end").get<double>();
    cfg.spectrum.dip_first_band = s.at("dip_first_band").get<std::size_t>();
    cfg.spectrum.dip_last_band = s.at("dip_last_band").get<std::size_t>();
    cfg.spectrum.dip_per_mm = s.at("dip_per_mm").get<double>();
    cfg.spectrum.band_noise_sigma = s.at("band_noise_sigma").get<double>();
    cfg.time_tolerance_s = j.at("time_tolerance_s").get<Timestamp>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed campaign config: ") + e.what());
  }
}

double campaign_theta(const CampaignConfig& cfg, std::size_t plot, double x_cm, Timestamp t) {
  return PlotField(cfg, plot).theta(cfg, cfg.plots.at(plot), x_cm, t);
}

GeneratedCampaign generate_campaign(const CampaignConfig& cfg) {
  cfg.validate();
  GeneratedCampaign out;
  nlohmann::json per_plot = nlohmann::json::array();

  for (std::size_t p = 0; p < cfg.plots.size(); ++p) {
    const auto& spec = cfg.plots[p];
    const int plot_id = static_cast<int>(p + 1);
    const PlotField field(cfg, p);
    auto theta_at = [&](int cell, Timestamp t) { return field.theta(cfg, spec, cell_center_cm(cell), t); };

    // TDR at the probe cell.
    const auto tdr_times = tdr_schedule(cfg, spec);
    Rng tdr_rng(derive_seed(cfg.seed, plot_stream(kTdrNoiseStream, p)));
    std::vector<Timestamp> plot_tdr_times;
    std::vector<double> plot_tdr_theta;
    for (Timestamp t : tdr_times) {
      TdrSample s;
      s.plot_id = plot_id;
      s.timestamp = t;
      s.position_index = spec.probe_position_index;
      double v = theta_at(spec.probe_position_index, t);
      if (cfg.tdr_noise_sigma > 0.0) v += cfg.tdr_noise_sigma * tdr_rng.normal();
      s.theta = std::max(0.0, v);
      out.tdr.push_back(s);
      plot_tdr_times.push_back(t);
      plot_tdr_theta.push_back(s.theta);
    }

    // Frames at every TDR and GPR time.
    std::set<Timestamp> frame_times(tdr_times.begin(), tdr_times.end());
    frame_times.insert(spec.gpr_times.begin(), spec.gpr_times.end());
    Rng band_rng(derive_seed(cfg.seed, plot_stream(kBandNoiseStream, p)));
    for (Timestamp t : frame_times) {
      HyperspectralFrame f;
      f.plot_id = plot_id;
      f.timestamp = t;
      for (int c = 0; c < kCellCount; ++c) {
        const double theta = theta_at(c, t);
        RawSpectrum raw;
        raw.bands.resize(kRawBandCount);
        for (std::size_t b = 0; b < kRawBandCount; ++b) {
          raw.bands[b] = cfg.spectrum.reflectance(b, theta) + cfg.spectrum.band_noise_sigma * band_rng.normal();
        }
        f.pixels.emplace(c, std::move(raw));
      }
      out.frames.push_back(std::move(f));
    }

    // GPR variation per cell across the plot's GPR times. The probe cell is
    // coupled to what the TDR reports at those times.
    const std::size_t n_gpr = spec.gpr_times.size();
    std::vector<std::vector<double>> cell_values(kCellCount);
    for (int c = 0; c < kCellCount; ++c) {
      std::vector<double> series;
      for (Timestamp t : spec.gpr_times) {
        if (c == spec.probe_position_index) {
          const auto hit = nearest_in_time(plot_tdr_times, t, cfg.time_tolerance_s);
          series.push_back(hit ? plot_tdr_theta[*hit] : theta_at(c, t));
        } else {
          series.push_back(theta_at(c, t));
        }
      }
      Rng mix_rng(derive_seed(cfg.seed, plot_stream(kCouplingNoiseStream, p) * 100 + static_cast<std::uint64_t>(c)));
      auto mixed = mix_with_coupling(series, spec.coupling, mix_rng);
      for (auto& v : mixed) v *= cfg.dtheta_scale;
      cell_values[static_cast<std::size_t>(c)] = std::move(mixed);
    }
    Rng fine_rng(derive_seed(cfg.seed, plot_stream(kFineNoiseStream, p)));
    for (std::size_t k = 0; k < n_gpr; ++k) {
      GprProfile profile;
      profile.plot_id = plot_id;
      profile.timestamp = spec.gpr_times[k];
      for (int c = 0; c < kCellCount; ++c) {
        std::vector<double> fine(kCellWidthCm);
        double mean = 0.0;
        for (auto& v : fine) {
          v = cfg.gpr_fine_noise_sigma * fine_rng.normal();
          mean += v;
        }
        mean /= kCellWidthCm;
        for (int i = 0; i < kCellWidthCm; ++i) {
          profile.positions_cm.push_back(c * kCellWidthCm + i);
          profile.delta_theta.push_back(cell_values[static_cast<std::size_t>(c)][k] + fine[static_cast<std::size_t>(i)] -
                                        mean);
        }
      }
      out.profiles.push_back(std::move(profile));
    }

    // Expected counts by direct enumeration of the schedule.
    std::set<std::size_t> covered;
    std::size_t measured = 0;
    for (Timestamp t : spec.gpr_times) {
      const auto hit = nearest_in_time(plot_tdr_times, t, cfg.time_tolerance_s);
      bool has_frame = false;
      for (Timestamp ft : frame_times) has_frame = has_frame || std::llabs(ft - t) <= cfg.time_tolerance_s;
      if (hit && has_frame) {
        ++measured;
        covered.insert(*hit);
      }
    }
    out.expected.measured_rows += measured;
    out.expected.simulated_gpr_rows += plot_tdr_times.size() - covered.size();
    out.expected.simulated_tdr_rows += measured > 0 ? n_gpr * (kCellCount - 1) : 0;

    per_plot.push_back({{"plot_id", plot_id},
                        {"target_coupling", spec.coupling},
                        {"probe_position_index", spec.probe_position_index},
                        {"n_gpr_profiles", n_gpr},
                        {"n_tdr_samples", plot_tdr_times.size()},
                        {"n_frames", frame_times.size()},
                        {"expected_measured_rows", measured},
                        {"spatial_phases", {field.phase_a, field.phase_b, field.phase_h}}});
  }

  out.manifest = {{"format", kManifestFormat},
                  {"version", kManifestVersion},
                  {"config", to_json(cfg)},
                  {"plots", per_plot},
                  {"expected_counts",
                   {{"measured_rows", out.expected.measured_rows},
                    {"simulated_gpr_rows", out.expected.simulated_gpr_rows},
                    {"simulated_tdr_rows", out.expected.simulated_tdr_rows}}},
                  {"files", {csv::kHsiFile, csv::kGprFile, csv::kTdrFile, "manifest.json"}}};
  return out;
}

std::vector<std::pair<std::string, std::string>> campaign_files(const GeneratedCampaign& c) {
  return {{std::string(csv::kHsiFile), csv::format_hsi(c.frames)},
          {std::string(csv::kGprFile), csv::format_gpr(c.profiles)},
          {std::string(csv::kTdrFile), csv::format_tdr(c.tdr)},
          {"manifest.json", c.manifest.dump(2) + "\n"}};
}

}  // namespace soilfusion
