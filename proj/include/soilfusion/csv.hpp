#pragma once

// Flat CSV formats of a campaign (tdr.csv, gpr.csv, hsi.csv) and of fused
// datasets (dataset.csv). All files: UTF-8, one header row, comma delimiter,
// '.' decimal separator, '\n' line endings.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "soilfusion/data_model.hpp"

namespace soilfusion::csv {

inline constexpr std::string_view kTdrFile = "tdr.csv";
inline constexpr std::string_view kGprFile = "gpr.csv";
inline constexpr std::string_view kHsiFile = "hsi.csv";
inline constexpr std::string_view kDatasetFile = "dataset.csv";

std::vector<TdrSample> parse_tdr(std::string_view text, std::string_view source = kTdrFile);
// Rows sharing (plot_id, timestamp) form one profile, ordered by position.
std::vector<GprProfile> parse_gpr(std::string_view text, std::string_view source = kGprFile);
// Rows sharing (plot_id, timestamp) form one frame.
std::vector<HyperspectralFrame> parse_hsi(std::string_view text, std::string_view source = kHsiFile);
Dataset parse_dataset(std::string_view text, std::string_view source = kDatasetFile);

// Campaign files are written with `decimals` fixed digits.
std::string format_tdr(std::span<const TdrSample> samples, int decimals = 6);
std::string format_gpr(std::span<const GprProfile> profiles, int decimals = 6);
std::string format_hsi(std::span<const HyperspectralFrame> frames, int decimals = 6);
// Datasets are written with shortest round-trip numbers.
std::string format_dataset(const Dataset& ds);

struct Campaign {
  std::vector<HyperspectralFrame> frames;
  std::vector<GprProfile> profiles;
  std::vector<TdrSample> tdr;
};

Campaign load_campaign(const std::filesystem::path& dir);

}  // namespace soilfusion::csv
