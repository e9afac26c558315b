#include <doctest.h>

#include "oracles.hpp"
#include "soilfusion/csv.hpp"
#include "soilfusion/error.hpp"
#include "soilfusion/evaluation.hpp"
#include "soilfusion/io.hpp"
#include "soilfusion/synthgen.hpp"

using namespace soilfusion;

namespace {

// One plot per coupling, `n` hourly GPR profiles each.
CampaignConfig long_campaign(const std::vector<double>& couplings, int n) {
  CampaignConfig cfg = CampaignConfig::defaults();
  const PlotSpec proto = cfg.plots.front();
  cfg.plots.clear();
  for (std::size_t i = 0; i < couplings.size(); ++i) {
    PlotSpec p = proto;
    p.coupling = couplings[i];
    p.probe_position_index = static_cast<int>(i % kCellCount);
    p.gpr_times.clear();
    for (int k = 0; k < n; ++k) p.gpr_times.push_back(1502179200 + 3600LL * k);
    p.irrigation_times.clear();
    p.irrigation_mm.clear();
    for (int k = 0; k < n; k += 13) {
      p.irrigation_times.push_back(1502179200 + 3600LL * k + 1800 * static_cast<Timestamp>(i));
      p.irrigation_mm.push_back(3.0 + static_cast<double>(k % 5));
    }
    cfg.plots.push_back(p);
  }
  return cfg;
}

// Measured rows as the command line would assemble them from the files.
Dataset assembled_from_files(const GeneratedCampaign& gen, const oracle::TempDir& tmp) {
  io::OutputSet out(tmp.path());
  for (auto& [name, content] : campaign_files(gen)) out.add(name, content);
  out.commit();
  const auto c = csv::load_campaign(tmp.path());
  return assemble_measured_dataset(c.frames, c.profiles, c.tdr).dataset;
}

}  // namespace

TEST_CASE("default campaign shape") {
  const auto cfg = CampaignConfig::defaults();
  REQUIRE(cfg.plots.size() == 4);
  CHECK(cfg.plots[0].coupling == 0.95);
  CHECK(cfg.plots[1].coupling == 0.93);
  CHECK(cfg.plots[2].coupling == 0.65);
  CHECK(cfg.plots[3].coupling == 0.0);

  const auto gen = generate_campaign(cfg);
  CHECK(gen.profiles.size() == 40);
  CHECK(gen.tdr.size() == 400);
  CHECK(gen.expected.measured_rows + gen.expected.simulated_gpr_rows >= 400);
  for (const auto& p : gen.profiles) CHECK_NOTHROW(validate(p));
  for (const auto& s : gen.tdr) CHECK_NOTHROW(validate(s));
  for (const auto& f : gen.frames) CHECK_NOTHROW(validate(f));

  oracle::TempDir tmp("synth_default");
  const auto measured = assembled_from_files(gen, tmp);
  CHECK(measured.size() == gen.expected.measured_rows);
  CHECK(gen.manifest.at("expected_counts").at("measured_rows").get<std::size_t>() == measured.size());
}

TEST_CASE("exact coupling without noise") {
  auto cfg = long_campaign({1.0, -1.0}, 12);
  cfg.spectrum.band_noise_sigma = 0.0;
  cfg.gpr_fine_noise_sigma = 0.0;
  oracle::TempDir tmp("synth_exact");
  const auto measured = assembled_from_files(generate_campaign(cfg), tmp);
  const auto c = correlate_plots(measured);
  CHECK(std::fabs(c.per_plot.at(1) - 1.0) <= 1e-9);
  CHECK(std::fabs(c.per_plot.at(2) + 1.0) <= 1e-9);
}

TEST_CASE("uncoupled plots show no correlation") {
  oracle::TempDir tmp("synth_null");
  const auto measured = assembled_from_files(generate_campaign(long_campaign({0.0, 0.0}, 200)), tmp);
  const auto c = correlate_plots(measured);
  CHECK(c.n_per_plot.at(1) == 200);
  CHECK(std::fabs(c.per_plot.at(1)) < 0.15);
  CHECK(std::fabs(c.per_plot.at(2)) < 0.15);
}

TEST_CASE("configured couplings are reproduced") {
  const std::vector<double> couplings{0.9, 0.5, 0.2, -0.4};
  oracle::TempDir tmp("synth_coupling");
  const auto measured = assembled_from_files(generate_campaign(long_campaign(couplings, 100)), tmp);
  const auto c = correlate_plots(measured);
  for (std::size_t i = 0; i < couplings.size(); ++i) {
    CHECK(std::fabs(c.per_plot.at(static_cast<int>(i) + 1) - couplings[i]) <= 0.1);
  }
}

TEST_CASE("same seed gives identical files") {
  const auto cfg = CampaignConfig::defaults();
  const auto a = campaign_files(generate_campaign(cfg));
  const auto b = campaign_files(generate_campaign(cfg));
  CHECK(a == b);
  REQUIRE(a.size() == 4);
  auto other = cfg;
  other.seed = 1;
  const auto c = campaign_files(generate_campaign(other));
  CHECK(a[0].second != c[0].second);
}

TEST_CASE("spectra darken monotonically with moisture in the absorption bands") {
  const SpectrumModel m;
  for (std::size_t b = m.dip_first_band + 1; b < m.dip_last_band; ++b) {
    double prev = m.reflectance(b, 0.0);
    for (double theta = 1.0; theta <= 40.0; theta += 1.0) {
      const double r = m.reflectance(b, theta);
      CHECK(r < prev);
      prev = r;
    }
  }
  CHECK(m.reflectance(10, 5.0) == m.reflectance(10, 30.0));
}

TEST_CASE("campaign config json round trip and validation") {
  const auto cfg = CampaignConfig::defaults();
  const auto j = to_json(cfg);
  CHECK(to_json(campaign_from_json(j)) == j);

  auto bad = cfg;
  bad.plots[0].coupling = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.plots[1].probe_position_index = 10;
  CHECK_THROWS_AS(generate_campaign(bad), ConfigError);
  bad = cfg;
  bad.plots.clear();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(campaign_from_json(nlohmann::json{{"plots", 3}}), Error);
}

TEST_CASE("campaign_theta responds to irrigation") {
  const auto cfg = CampaignConfig::defaults();
  const auto& p = cfg.plots[1];
  const Timestamp t = p.irrigation_times.front();
  const double before = campaign_theta(cfg, 1, 55.0, t - 60);
  const double after = campaign_theta(cfg, 1, 55.0, t + 3600);
  CHECK(after > before + 1.0);
}
