#include <doctest.h>

#include <numeric>

#include "oracles.hpp"
#include "soilfusion/csv.hpp"
#include "soilfusion/data_model.hpp"
#include "soilfusion/error.hpp"
#include "soilfusion/io.hpp"
#include "soilfusion/rng.hpp"

using namespace soilfusion;

namespace {

RawSpectrum ramp_spectrum(double offset = 0.0) {
  RawSpectrum raw;
  for (std::size_t b = 0; b < kRawBandCount; ++b) raw.bands.push_back(static_cast<double>(b) + offset);
  return raw;
}

GprProfile full_profile(int plot, Timestamp t, double value) {
  GprProfile p;
  p.plot_id = plot;
  p.timestamp = t;
  for (int x = 0; x < kProfileLengthCm; ++x) {
    p.positions_cm.push_back(x);
    p.delta_theta.push_back(value);
  }
  return p;
}

HyperspectralFrame frame_at(int plot, Timestamp t, int cell) {
  HyperspectralFrame f;
  f.plot_id = plot;
  f.timestamp = t;
  f.pixels[cell] = ramp_spectrum();
  return f;
}

}  // namespace

TEST_CASE("trim_spectrum keeps bands 5 through 119") {
  const auto out = trim_spectrum(ramp_spectrum());
  REQUIRE(out.bands.size() == 115);
  CHECK(out.bands.front() == 5.0);
  CHECK(out.bands.back() == 119.0);

  RawSpectrum flat{std::vector<double>(125, 0.3)};
  const auto f = trim_spectrum(flat);
  CHECK(f.bands.size() == 115);
  CHECK(std::all_of(f.bands.begin(), f.bands.end(), [](double v) { return v == 0.3; }));

  RawSpectrum short_raw{std::vector<double>(124, 0.3)};
  CHECK_THROWS_AS(trim_spectrum(short_raw, "hsi.csv:7"), SchemaError);
  try {
    trim_spectrum(short_raw, "hsi.csv:7");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("hsi.csv:7") != std::string::npos);
  }
}

TEST_CASE("trim_spectrum inverts embedding into the middle bands") {
  Rng rng(11);
  std::vector<double> inner(115);
  for (auto& v : inner) v = rng.uniform();
  RawSpectrum raw{std::vector<double>(125, -1.0)};
  std::copy(inner.begin(), inner.end(), raw.bands.begin() + 5);
  CHECK(trim_spectrum(raw).bands == inner);
}

TEST_CASE("resample_profile averages 10 cm cells") {
  const auto flat = resample_profile(full_profile(1, 0, 2.0));
  for (double v : flat) CHECK(v == 2.0);

  GprProfile ramp = full_profile(1, 0, 0.0);
  std::iota(ramp.delta_theta.begin(), ramp.delta_theta.end(), 0.0);
  const auto cells = resample_profile(ramp);
  for (int k = 0; k < kCellCount; ++k) CHECK(cells[static_cast<std::size_t>(k)] == doctest::Approx(10.0 * k + 4.5).epsilon(1e-15));

  GprProfile half;
  half.plot_id = 3;
  half.timestamp = 77;
  for (int x = 0; x < 50; ++x) {
    half.positions_cm.push_back(x);
    half.delta_theta.push_back(1.0);
  }
  CHECK_THROWS_AS(resample_profile(half), ResamplingError);
  try {
    resample_profile(half);
  } catch (const ResamplingError& e) {
    CHECK(std::string(e.what()).find("cell 5") != std::string::npos);
  }
}

TEST_CASE("resample_profile stays within each cell's sample range") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    GprProfile p;
    for (int x = 0; x < kProfileLengthCm; ++x) {
      if (x % 10 != 0 && rng.uniform() < 0.5) continue;  // sparse but never empty
      p.positions_cm.push_back(x);
      p.delta_theta.push_back(rng.normal() * 3.0);
    }
    const auto cells = resample_profile(p);
    for (int c = 0; c < kCellCount; ++c) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t i = 0; i < p.positions_cm.size(); ++i) {
        if (p.positions_cm[i] / 10 == c) {
          lo = std::min(lo, p.delta_theta[i]);
          hi = std::max(hi, p.delta_theta[i]);
        }
      }
      CHECK(cells[static_cast<std::size_t>(c)] >= lo);
      CHECK(cells[static_cast<std::size_t>(c)] <= hi);
    }
  }
}

TEST_CASE("assemble_measured_dataset matches within tolerance") {
  const std::vector<HyperspectralFrame> frames{frame_at(1, 100, 4)};
  const std::vector<GprProfile> profiles{full_profile(1, 100, 0.7)};
  std::vector<TdrSample> tdr{{1, 103, 5, 4, 21.5}};

  auto res = assemble_measured_dataset(frames, profiles, tdr, 10);
  REQUIRE(res.dataset.size() == 1);
  const auto& row = res.dataset.rows.front();
  CHECK(row.features.size() == 116);
  CHECK(row.features.back() == 0.7);
  CHECK(row.features.front() == 5.0);
  CHECK(row.target == 21.5);
  CHECK(row.provenance == Provenance::measured);
  CHECK(row.timestamp == 100);
  CHECK(res.skipped.count() == 0);

  tdr.front().timestamp = 200;
  res = assemble_measured_dataset(frames, profiles, tdr, 10);
  CHECK(res.dataset.size() == 0);
  CHECK(res.skipped.count() == 1);

  CHECK_THROWS_AS(assemble_measured_dataset(frames, profiles, tdr, 0), ConfigError);
}

TEST_CASE("assemble_measured_dataset picks the nearest TDR sample") {
  const std::vector<HyperspectralFrame> frames{frame_at(2, 1000, 3)};
  const std::vector<GprProfile> profiles{full_profile(2, 1000, 0.1)};
  const std::vector<TdrSample> tdr{{2, 1200, 5, 3, 30.0}, {2, 990, 5, 3, 20.0}, {2, 1005, 5, 3, 25.0}};
  const auto res = assemble_measured_dataset(frames, profiles, tdr, 600);
  REQUIRE(res.dataset.size() == 1);
  CHECK(res.dataset.rows.front().target == 25.0);
}

TEST_CASE("nearest_in_time breaks ties toward the earlier time") {
  const std::vector<Timestamp> times{110, 90, 90};
  CHECK(nearest_in_time(times, 100, 50) == std::optional<std::size_t>{1});
  CHECK(nearest_in_time(times, 100, 5) == std::nullopt);
  CHECK(nearest_in_time(times, 95, 50) == std::optional<std::size_t>{1});
}

TEST_CASE("validation rejects malformed records") {
  CHECK_THROWS_AS(validate(TdrSample{1, 0, 10, 4, 20.0}), SchemaError);
  CHECK_THROWS_AS(validate(TdrSample{1, 0, 5, 10, 20.0}), SchemaError);
  CHECK_NOTHROW(validate(TdrSample{1, 0, 5, 9, 20.0}));

  GprProfile p = full_profile(1, 0, 1.0);
  std::swap(p.positions_cm[3], p.positions_cm[4]);
  CHECK_THROWS_AS(validate(p), SchemaError);

  Dataset ds;
  ds.schema = spectrum_schema(false);
  ds.rows.push_back({1, 0, 0, std::vector<double>(3, 0.0), 1.0, Provenance::measured, {}});
  CHECK_THROWS_AS(ds.validate(), SchemaError);
}

TEST_CASE("schema names and GPR column") {
  const auto s = spectrum_schema(true);
  REQUIRE(s.size() == 116);
  CHECK(s.front() == "b005");
  CHECK(s[114] == "b119");
  CHECK(s.back() == "gpr_dtheta");
  Dataset ds;
  ds.schema = s;
  CHECK(ds.gpr_column() == std::optional<std::size_t>{115});
  ds.schema = spectrum_schema(false);
  CHECK_FALSE(ds.gpr_column().has_value());
}

TEST_CASE("csv round trips") {
  const std::vector<TdrSample> tdr{{1, 1502179200, 5, 4, 19.25}, {2, 1502179920, 5, 5, 21.5}};
  CHECK(csv::format_tdr(csv::parse_tdr(csv::format_tdr(tdr))) == csv::format_tdr(tdr));
  const auto back = csv::parse_tdr(csv::format_tdr(tdr));
  REQUIRE(back.size() == 2);
  CHECK(back[1].theta == 21.5);
  CHECK(back[0].position_index == 4);

  const std::vector<GprProfile> gpr{full_profile(1, 50, 0.5), full_profile(2, 60, -0.25)};
  const auto gpr_back = csv::parse_gpr(csv::format_gpr(gpr));
  REQUIRE(gpr_back.size() == 2);
  CHECK(gpr_back[1].delta_theta[17] == -0.25);
  CHECK(gpr_back[0].positions_cm.size() == 100);

  const std::vector<HyperspectralFrame> frames{frame_at(1, 50, 2)};
  const auto hsi_back = csv::parse_hsi(csv::format_hsi(frames));
  REQUIRE(hsi_back.size() == 1);
  CHECK(hsi_back[0].pixels.at(2).bands[124] == 124.0);

  Dataset ds;
  ds.schema = spectrum_schema(true);
  Datapoint r;
  r.plot_id = 3;
  r.timestamp = 99;
  r.position_index = 2;
  r.features.assign(116, 0.1);
  r.features.back() = -1.0 / 3.0;
  r.target = 0.1 + 0.2;
  r.provenance = Provenance::simulated_gpr;
  ds.rows.push_back(r);
  const auto text = csv::format_dataset(ds);
  const auto ds_back = csv::parse_dataset(text);
  REQUIRE(ds_back.size() == 1);
  CHECK(ds_back.rows[0].features.back() == -1.0 / 3.0);  // shortest round trip is exact
  CHECK(ds_back.rows[0].target == 0.1 + 0.2);
  CHECK(ds_back.rows[0].provenance == Provenance::simulated_gpr);
  CHECK(csv::format_dataset(ds_back) == text);
}

TEST_CASE("csv parsers reject bad headers and values") {
  CHECK_THROWS_AS(csv::parse_tdr("plot,timestamp\n1,2\n"), SchemaError);
  CHECK_THROWS_AS(csv::parse_tdr("plot_id,timestamp,depth_cm,position_index,theta\n1,2,5,4,abc\n"), Error);
}

TEST_CASE("format helpers") {
  CHECK(io::format_fixed(-0.0000001, 6) == "0.000000");
  CHECK(io::format_fixed(1.5, 2) == "1.50");
  CHECK(io::parse_double(io::format_shortest(0.1), "x") == 0.1);
  CHECK_THROWS_AS(io::parse_double("1.5x", "x"), Error);
}

TEST_CASE("OutputSet writes nothing until commit") {
  oracle::TempDir tmp("outset");
  io::OutputSet set(tmp.path() / "sub");
  set.add("a.txt", "alpha");
  set.add("b.txt", "beta");
  CHECK_FALSE(std::filesystem::exists(tmp.path() / "sub" / "a.txt"));
  set.commit();
  CHECK(io::read_file(tmp.path() / "sub" / "a.txt") == "alpha");
  CHECK(io::read_file(tmp.path() / "sub" / "b.txt") == "beta");
}
