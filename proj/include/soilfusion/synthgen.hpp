#pragma once

// Deterministic synthetic field campaigns.
//
// Soil moisture per plot is a base level plus a smooth spatial field plus
// irrigation pulses that rise over `rise_tau_s` and dry down over
// `drydown_tau_s`:
//   theta(x, t) = base + spatial(x) + sum_e amount_e * h(x) * (1 - exp(-dt/rise)) * exp(-dt/dry)
// TDR samples theta at the probe cell centre every `tdr_period_s` during each
// measurement day. The camera records all ten cells at every TDR and GPR time.
//
// The GPR variation of cell c at the plot's GPR times is
//   scale * (coupling * z + sqrt(1 - coupling^2) * e)
// where z is the standardized theta series of that cell and e is Gaussian
// noise made orthogonal to z and standardized, so the sample correlation of
// the two series equals `coupling` exactly. The 1 cm profile adds zero-mean
// fine-scale noise within each cell, which resampling averages out.
//
// Reflectance follows a linear soil line with an absorption dip whose depth
// grows linearly with theta:
//   r(b, theta) = line(b) - dip_per_mm * theta * sin(pi * (b - first) / (last - first))
// for raw bands first..last, plus i.i.d. band noise.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "soilfusion/data_model.hpp"

namespace soilfusion {

struct SpectrumModel {
  double line_start = 0.16;  // reflectance at raw band 0
  double line_end = 0.38;    // reflectance at raw band 124
  std::size_t dip_first_band = 65;  // raw indices; 60..90 after trimming
  std::size_t dip_last_band = 95;
  double dip_per_mm = 0.004;
  double band_noise_sigma = 0.035;

  // Noise-free reflectance of raw band `band` at soil moisture `theta`.
  double reflectance(std::size_t band, double theta) const;
};

struct PlotSpec {
  int probe_position_index = 4;
  std::vector<Timestamp> gpr_times;
  double coupling = 0.0;  // target pearson(GPR variation, theta)
  double base_mm = 20.0;
  double spatial_amplitude_mm = 0.8;
  std::vector<Timestamp> irrigation_times;
  std::vector<double> irrigation_mm;
};

struct CampaignConfig {
  std::vector<PlotSpec> plots;
  Timestamp tdr_period_s = 720;
  // TDR samples taken after the last GPR time of each day.
  int tdr_tail_samples = 9;
  double rise_tau_s = 1200.0;
  double drydown_tau_s = 21600.0;
  double infiltration_heterogeneity = 0.2;  // relative amplitude of h(x) - 1
  double tdr_noise_sigma = 0.0;
  double gpr_fine_noise_sigma = 0.05;
  double dtheta_scale = 1.0;
  SpectrumModel spectrum;
  Timestamp time_tolerance_s = kDefaultTimeToleranceS;  // used for expected counts
  std::uint64_t seed = 0;

  // Four plots, two measurement days with five GPR profiles two hours apart,
  // couplings {0.95, 0.93, 0.65, 0.0}.
  static CampaignConfig defaults();

  void validate() const;
};

nlohmann::json to_json(const CampaignConfig& cfg);
CampaignConfig campaign_from_json(const nlohmann::json& j);

struct CampaignCounts {
  std::size_t measured_rows = 0;
  std::size_t simulated_gpr_rows = 0;  // TDR samples not matched to a GPR profile
  std::size_t simulated_tdr_rows = 0;  // non-probe cells of every profile
};

struct GeneratedCampaign {
  std::vector<HyperspectralFrame> frames;
  std::vector<GprProfile> profiles;
  std::vector<TdrSample> tdr;
  CampaignCounts expected;
  nlohmann::json manifest;
};

// Noise-free soil moisture of cfg.plots[plot] at position `x_cm` and time `t`.
double campaign_theta(const CampaignConfig& cfg, std::size_t plot, double x_cm, Timestamp t);

GeneratedCampaign generate_campaign(const CampaignConfig& cfg);

// File name -> content for hsi.csv, gpr.csv, tdr.csv and manifest.json.
std::vector<std::pair<std::string, std::string>> campaign_files(const GeneratedCampaign& c);

}  // namespace soilfusion
