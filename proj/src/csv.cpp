#include "soilfusion/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <utility>

#include "soilfusion/error.hpp"
#include "soilfusion/io.hpp"

namespace soilfusion::csv {

namespace {

using io::parse_double;
using io::parse_int;

// Iterates data lines after checking the header. Blank lines are ignored and
// a trailing '\r' is stripped.
template <typename Fn>
void for_each_row(std::string_view text, std::string_view source, const std::vector<std::string>& header, Fn&& fn) {
  std::size_t line_no = 0;
  bool seen_header = false;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = io::split(line, ',');
    const std::string label = std::string(source) + ":" + std::to_string(line_no);
    if (!seen_header) {
      if (fields.size() != header.size() || !std::equal(fields.begin(), fields.end(), header.begin())) {
        throw SchemaError("unexpected header in " + std::string(source));
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != header.size()) {
      throw SchemaError("expected " + std::to_string(header.size()) + " columns, got " +
                        std::to_string(fields.size()) + " (" + label + ")");
    }
    fn(fields, label);
  }
  if (!seen_header) throw SchemaError("missing header in " + std::string(source));
}

std::vector<std::string> raw_band_header() {
  std::vector<std::string> h{"plot_id", "timestamp", "position_index"};
  for (std::size_t b = 0; b < kRawBandCount; ++b) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "band_%03zu", b);
    h.emplace_back(buf);
  }
  return h;
}

std::vector<std::string> dataset_header(const std::vector<std::string>& schema) {
  std::vector<std::string> h{"plot_id", "timestamp", "position_index", "provenance"};
  h.insert(h.end(), schema.begin(), schema.end());
  h.emplace_back(kTargetName);
  return h;
}

int as_int(std::string_view s, std::string_view label) { return static_cast<int>(parse_int(s, label)); }

void join(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  out += '\n';
}

}  // namespace

std::vector<TdrSample> parse_tdr(std::string_view text, std::string_view source) {
  std::vector<TdrSample> out;
  for_each_row(text, source, {"plot_id", "timestamp", "depth_cm", "position_index", "theta"},
               [&](const auto& f, const std::string& label) {
                 TdrSample s;
                 s.plot_id = as_int(f[0], label);
                 s.timestamp = parse_int(f[1], label);
                 s.depth_cm = as_int(f[2], label);
                 s.position_index = as_int(f[3], label);
                 s.theta = parse_double(f[4], label);
                 validate(s, label);
                 out.push_back(s);
               });
  return out;
}

std::vector<GprProfile> parse_gpr(std::string_view text, std::string_view source) {
  std::map<std::pair<int, Timestamp>, std::vector<std::pair<int, double>>> grouped;
  for_each_row(text, source, {"plot_id", "timestamp", "position_cm", "delta_theta"},
               [&](const auto& f, const std::string& label) {
                 const int plot = as_int(f[0], label);
                 const Timestamp t = parse_int(f[1], label);
                 grouped[{plot, t}].emplace_back(as_int(f[2], label), parse_double(f[3], label));
               });
  std::vector<GprProfile> out;
  for (auto& [key, samples] : grouped) {
    std::stable_sort(samples.begin(), samples.end(), [](auto& a, auto& b) { return a.first < b.first; });
    GprProfile p;
    p.plot_id = key.first;
    p.timestamp = key.second;
    for (const auto& [pos, v] : samples) {
      p.positions_cm.push_back(pos);
      p.delta_theta.push_back(v);
    }
    validate(p);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<HyperspectralFrame> parse_hsi(std::string_view text, std::string_view source) {
  std::map<std::pair<int, Timestamp>, HyperspectralFrame> grouped;
  for_each_row(text, source, raw_band_header(), [&](const auto& f, const std::string& label) {
    const int plot = as_int(f[0], label);
    const Timestamp t = parse_int(f[1], label);
    const int pos = as_int(f[2], label);
    RawSpectrum spec;
    spec.bands.reserve(kRawBandCount);
    for (std::size_t b = 0; b < kRawBandCount; ++b) spec.bands.push_back(parse_double(f[3 + b], label));
    auto& frame = grouped[{plot, t}];
    frame.plot_id = plot;
    frame.timestamp = t;
    if (!frame.pixels.emplace(pos, std::move(spec)).second) {
      throw SchemaError("duplicate pixel position " + std::to_string(pos) + " (" + label + ")");
    }
  });
  std::vector<HyperspectralFrame> out;
  out.reserve(grouped.size());
  for (auto& [key, frame] : grouped) {
    validate(frame);
    out.push_back(std::move(frame));
  }
  return out;
}

Dataset parse_dataset(std::string_view text, std::string_view source) {
  // The header decides whether the GPR column is present.
  const auto first_line = text.substr(0, text.find('\n'));
  const bool with_gpr = first_line.find(kGprFeatureName) != std::string_view::npos;
  Dataset ds;
  ds.schema = spectrum_schema(with_gpr);
  const std::size_t d = ds.schema.size();
  for_each_row(text, source, dataset_header(ds.schema), [&](const auto& f, const std::string& label) {
    Datapoint row;
    row.plot_id = as_int(f[0], label);
    row.timestamp = parse_int(f[1], label);
    row.position_index = as_int(f[2], label);
    row.provenance = parse_provenance(f[3]);
    row.features.reserve(d);
    for (std::size_t j = 0; j < d; ++j) row.features.push_back(parse_double(f[4 + j], label));
    row.target = parse_double(f[4 + d], label);
    ds.rows.push_back(std::move(row));
  });
  ds.validate();
  return ds;
}

std::string format_tdr(std::span<const TdrSample> samples, int decimals) {
  std::string out = "plot_id,timestamp,depth_cm,position_index,theta\n";
  for (const auto& s : samples) {
    join(out, {std::to_string(s.plot_id), std::to_string(s.timestamp), std::to_string(s.depth_cm),
               std::to_string(s.position_index), io::format_fixed(s.theta, decimals)});
  }
  return out;
}

std::string format_gpr(std::span<const GprProfile> profiles, int decimals) {
  std::string out = "plot_id,timestamp,position_cm,delta_theta\n";
  for (const auto& p : profiles) {
    const auto plot = std::to_string(p.plot_id);
    const auto t = std::to_string(p.timestamp);
    for (std::size_t i = 0; i < p.positions_cm.size(); ++i) {
      join(out, {plot, t, std::to_string(p.positions_cm[i]), io::format_fixed(p.delta_theta[i], decimals)});
    }
  }
  return out;
}

std::string format_hsi(std::span<const HyperspectralFrame> frames, int decimals) {
  std::string out;
  join(out, raw_band_header());
  for (const auto& f : frames) {
    for (const auto& [pos, spec] : f.pixels) {
      out += std::to_string(f.plot_id);
      out += ',';
      out += std::to_string(f.timestamp);
      out += ',';
      out += std::to_string(pos);
      for (double v : spec.bands) {
        out += ',';
        out += io::format_fixed(v, decimals);
      }
      out += '\n';
    }
  }
  return out;
}

std::string format_dataset(const Dataset& ds) {
  ds.validate();
  if (ds.schema != spectrum_schema(ds.gpr_column().has_value())) {
    throw SchemaError("dataset.csv requires the b005..b119[,gpr_dtheta] schema");
  }
  std::string out;
  join(out, dataset_header(ds.schema));
  for (const auto& r : ds.rows) {
    out += std::to_string(r.plot_id);
    out += ',';
    out += std::to_string(r.timestamp);
    out += ',';
    out += std::to_string(r.position_index);
    out += ',';
    out += to_string(r.provenance);
    for (double v : r.features) {
      out += ',';
      out += io::format_shortest(v);
    }
    out += ',';
    out += io::format_shortest(r.target);
    out += '\n';
  }
  return out;
}

Campaign load_campaign(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("input directory not found: " + dir.string());
  Campaign c;
  c.tdr = parse_tdr(io::read_file(dir / kTdrFile));
  c.profiles = parse_gpr(io::read_file(dir / kGprFile));
  c.frames = parse_hsi(io::read_file(dir / kHsiFile));
  return c;
}

}  // namespace soilfusion::csv
