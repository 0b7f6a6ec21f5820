#pragma once

// Configuration files, CSV/snapshot output and parameter sweeps behind the
// command-line tool.

#include <array>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rfa/simulation.hpp"
#include "rfa/svg.hpp"

namespace rfa {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline double number_field(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError("field '" + path + "': expected a number, got " + std::string(j.type_name()));
  return j.get<double>();
}

inline void read_numbers(const json& obj, const std::string& prefix, std::map<std::string, double*> fields) {
  if (!obj.is_object()) throw ConfigError("field '" + prefix + "': expected an object");
  for (const auto& [key, value] : obj.items()) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError("field '" + prefix + "." + key + "': unknown field");
    *it->second = number_field(value, prefix + "." + key);
  }
}

inline std::vector<double> number_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError("field '" + path + "': expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number_field(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::string string_field(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError("field '" + path + "': expected a string");
  return j.get<std::string>();
}

}  // namespace detail

/// Parses a JSON run configuration. Every field is optional. Lengths are in
/// metres, times in seconds, temperatures in degC.
inline SimulationConfig parse_config(std::string_view text) {
  using detail::json;
  json j;
  try {
    j = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("malformed config: top level must be an object");

  SimulationConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "method") {
      const auto m = detail::string_field(v, key);
      if (m == "BE") c.method = Method::BE;
      else if (m == "HBE") c.method = Method::HBE;
      else throw ConfigError("field 'method': expected \"BE\" or \"HBE\", got \"" + m + "\"");
    } else if (key == "applied_voltage") {
      c.applied_voltage = detail::number_field(v, key);
    } else if (key == "convection_ratio") {
      c.convection_ratio = detail::number_field(v, key);
    } else if (key == "dt") {
      c.dt = detail::number_field(v, key);
    } else if (key == "t_end") {
      c.t_end = detail::number_field(v, key);
    } else if (key == "edge_length") {
      c.edge_length = detail::number_field(v, key);
    } else if (key == "solver_tol") {
      c.solver_tol = detail::number_field(v, key);
    } else if (key == "lumped_mass") {
      if (!v.is_boolean()) throw ConfigError("field 'lumped_mass': expected true or false");
      c.lumped_mass = v.get<bool>();
    } else if (key == "probe_depths") {
      c.probe_depths = detail::number_list(v, key);
      if (c.probe_depths.size() != 3) throw ConfigError("field 'probe_depths': expected exactly 3 depths");
    } else if (key == "lesion_threshold") {
      c.lesion_threshold = detail::number_field(v, key);
    } else if (key == "output_stride") {
      if (!v.is_number_integer()) throw ConfigError("field 'output_stride': expected an integer");
      c.output_stride = v.get<int>();
    } else if (key == "tau") {
      c.tau = detail::number_field(v, key);
    } else if (key == "interface") {
      const auto s = detail::string_field(v, key);
      if (s == "bath") c.interface = InterfaceModel::ConvectiveBath;
      else if (s == "contact") c.interface = InterfaceModel::ContactConductance;
      else throw ConfigError("field 'interface': expected \"bath\" or \"contact\"");
    } else if (key == "onset") {
      const auto s = detail::string_field(v, key);
      if (s == "ramp") c.onset = SourceOnset::Ramp;
      else if (s == "impulse") c.onset = SourceOnset::Impulse;
      else throw ConfigError("field 'onset': expected \"ramp\" or \"impulse\"");
    } else if (key == "snapshot_times") {
      c.snapshot_times = detail::number_list(v, key);
    } else if (key == "geometry") {
      auto& g = c.geometry;
      detail::read_numbers(v, key,
                           {{"electrode_length", &g.electrode_length},
                            {"electrode_radius", &g.electrode_radius},
                            {"insertion_depth", &g.insertion_depth},
                            {"tissue_thickness", &g.tissue_thickness},
                            {"tissue_radius", &g.tissue_radius},
                            {"blood_depth", &g.blood_depth},
                            {"model_depth", &g.model_depth}});
    } else if (key == "boundary") {
      auto& b = c.boundary;
      detail::read_numbers(v, key,
                           {{"h_electrode", &b.h_electrode},
                            {"h_muscle", &b.h_muscle},
                            {"T_blood", &b.T_blood},
                            {"T_outer", &b.T_outer},
                            {"T_initial", &b.T_initial}});
    } else {
      throw ConfigError("field '" + key + "': unknown field");
    }
  }
  try {
    c.check();
    check(c.geometry);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return c;
}

inline SimulationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Output files

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

/// Writes through a temporary in the same directory and renames it into place.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline constexpr std::array<std::string_view, 17> kRunColumns{
    "t_s",           "method",          "voltage_V",         "conv_ratio",         "lesion_area_mm2",
    "lesion_volume_mm3", "T_max_C",     "r_max_mm",          "z_max_mm",           "T_probe_1p3_C",
    "T_probe_2p6_C", "T_probe_5p2_C",   "E_stored_muscle_J", "E_stored_blood_J",   "E_stored_electrode_J",
    "E_joule_muscle_J", "E_joule_blood_J"};

inline constexpr std::array<std::string_view, 10> kSummaryColumns{
    "group",          "voltage_V",       "conv_ratio", "crossover_time_s", "peak_diff_ratio", "t_peak_diff_s",
    "lesion_volume_be_120s_mm3", "lesion_volume_hbe_120s_mm3", "T_max_be_120s_C", "T_max_hbe_120s_C"};

template <std::size_t N>
std::string csv_header(const std::array<std::string_view, N>& cols) {
  std::string s;
  for (std::size_t i = 0; i < N; ++i) {
    if (i) s += ',';
    s += cols[i];
  }
  return s + '\n';
}

inline std::string run_csv_row(const SimulationConfig& c, const TimeSeriesRecord& r) {
  auto E = [&](const std::array<double, kRegionCount>& a, Region g) { return fmt(a[static_cast<int>(g)]); };
  std::string s = fmt(r.t) + ',' + std::string(to_string(c.method)) + ',' + fmt(c.applied_voltage) + ',' +
                  fmt(c.convection_ratio) + ',' + fmt(r.lesion_area * 1e6) + ',' + fmt(r.lesion_volume * 1e9) + ',' +
                  fmt(r.T_max) + ',' + fmt(r.T_max_location.r * 1e3) + ',' + fmt(r.T_max_location.z * 1e3);
  for (std::size_t i = 0; i < 3; ++i) s += ',' + (i < r.probe_T.size() ? fmt(r.probe_T[i]) : std::string("nan"));
  s += ',' + E(r.E_stored, Region::Muscle) + ',' + E(r.E_stored, Region::Blood) + ',' +
       E(r.E_stored, Region::Electrode) + ',' + E(r.E_joule, Region::Muscle) + ',' + E(r.E_joule, Region::Blood);
  return s + '\n';
}

/// Run CSV; a failed run ends with a "# truncated" marker row.
inline std::string run_csv(const SimulationConfig& c, const RunResult& res) {
  std::string s = csv_header(kRunColumns);
  for (const auto& r : res.records) s += run_csv_row(c, r);
  if (!res.ok()) s += "# truncated: " + *res.failed_stage + ": " + res.error + '\n';
  return s;
}

/// Nodal field as "index value" lines, aligned with the mesh file's node numbering.
inline std::string nodal_field_text(std::span<const double> values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += std::to_string(i) + ' ' + fmt(values[i]) + '\n';
  return s;
}

inline std::string time_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%gs", t);
  return buf;
}

// ---------------------------------------------------------------------------
// Plots

namespace detail {

template <class F>
svg::Series series_of(const std::vector<TimeSeriesRecord>& recs, const std::string& name, F f, std::string color,
                      bool dashed = false) {
  svg::Series s;
  s.name = name;
  s.color = std::move(color);
  s.dashed = dashed;
  for (const auto& r : recs) {
    s.x.push_back(r.t);
    s.y.push_back(f(r));
  }
  return s;
}

}  // namespace detail

/// Named SVG documents for one run.
inline std::vector<std::pair<std::string, std::string>> run_plots(const SimulationConfig& c, const RunResult& res) {
  const auto& p = svg::palette();
  const std::string tag = std::string(to_string(c.method)) + ", " + fmt(c.applied_voltage) + " V, ratio " +
                          fmt(c.convection_ratio);
  std::vector<std::pair<std::string, std::string>> out;
  {
    svg::Chart ch{"Lesion volume (" + tag + ")", "t (s)", "volume (mm^3)", {}};
    ch.series.push_back(detail::series_of(res.records, "lesion", [](auto& r) { return r.lesion_volume * 1e9; }, p[0]));
    out.emplace_back("lesion", svg::render(ch));
  }
  {
    svg::Chart ch{"Temperatures (" + tag + ")", "t (s)", "T (degC)", {}};
    ch.series.push_back(detail::series_of(res.records, "T max", [](auto& r) { return r.T_max; }, p[0]));
    for (std::size_t i = 0; i < c.probe_depths.size(); ++i)
      ch.series.push_back(detail::series_of(
          res.records, fmt(c.probe_depths[i] * 1e3) + " mm",
          [i](auto& r) { return i < r.probe_T.size() ? r.probe_T[i] : std::numeric_limits<double>::quiet_NaN(); }, p[(i + 1) % p.size()]));
    out.emplace_back("temperature", svg::render(ch));
  }
  {
    svg::Chart ch{"Energy (" + tag + ")", "t (s)", "energy (J)", {}};
    ch.series.push_back(detail::series_of(res.records, "stored, muscle", [](auto& r) { return r.E_stored[1]; }, p[0]));
    ch.series.push_back(
        detail::series_of(res.records, "stored, electrode", [](auto& r) { return r.E_stored[0]; }, p[2]));
    ch.series.push_back(detail::series_of(res.records, "Joule, muscle", [](auto& r) { return r.E_joule[1]; }, p[0], true));
    ch.series.push_back(detail::series_of(res.records, "Joule, blood", [](auto& r) { return r.E_joule[2]; }, p[1], true));
    out.emplace_back("energy", svg::render(ch));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepGroup { Convection, Voltage };

inline std::string_view to_string(SweepGroup g) { return g == SweepGroup::Convection ? "convection" : "voltage"; }

struct SweepSpec {
  SweepGroup group = SweepGroup::Convection;
  std::vector<double> ratios{0.0, 0.1, 0.25, 0.5, 1.0, 1.5};
  std::vector<double> voltages{25.0, 30.0, 35.0, 40.0};
  double fixed_voltage = 30.0;
  double fixed_ratio = 1.0;

  void check() const {
    const auto& v = group == SweepGroup::Convection ? ratios : voltages;
    if (v.empty()) throw std::invalid_argument("sweep: value list is empty");
    for (double x : v)
      if (!(x >= 0)) throw std::invalid_argument("sweep: values must be >= 0");
  }
};

struct SweepPoint {
  double voltage = 0.0;
  double ratio = 0.0;
  [[nodiscard]] std::string label() const { return "V" + fmt(voltage) + "_r" + fmt(ratio); }
};

inline std::vector<SweepPoint> sweep_points(const SweepSpec& s) {
  std::vector<SweepPoint> out;
  if (s.group == SweepGroup::Convection)
    for (double r : s.ratios) out.push_back({s.fixed_voltage, r});
  else
    for (double v : s.voltages) out.push_back({v, s.fixed_ratio});
  return out;
}

struct PointResult {
  SweepPoint point;
  SimulationConfig be_config, hbe_config;
  RunResult be, hbe;
  std::optional<ComparisonSeries> comparison;
  std::string error;  // empty when both runs completed
};

/// Runs fn(0..n-1) on up to `jobs` threads. Exceptions are rethrown after all work ends.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Every (point, method) pair of the sweep, on top of `base`.
inline std::vector<PointResult> run_sweep(const SweepSpec& spec, const SimulationConfig& base, int jobs = 1) {
  spec.check();
  const auto points = sweep_points(spec);
  std::vector<PointResult> out(points.size());
  std::vector<std::optional<PreparedModel>> models(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i].point = points[i];
    SimulationConfig c = base;
    c.applied_voltage = points[i].voltage;
    c.convection_ratio = points[i].ratio;
    c.method = Method::BE;
    out[i].be_config = c;
    c.method = Method::HBE;
    out[i].hbe_config = c;
  }
  parallel_for(points.size(), jobs, [&](std::size_t i) {
    try {
      out[i].be_config.check();
      models[i] = prepare_model(out[i].be_config);
    } catch (const std::exception& e) {
      out[i].error = std::string("model setup: ") + e.what();
    }
  });
  parallel_for(2 * points.size(), jobs, [&](std::size_t k) {
    const std::size_t i = k / 2;
    if (!models[i]) return;
    if (k % 2 == 0)
      out[i].be = run_prepared(out[i].be_config, *models[i]);
    else
      out[i].hbe = run_prepared(out[i].hbe_config, *models[i]);
  });
  for (auto& p : out) {
    if (!p.error.empty()) continue;
    if (!p.be.ok()) p.error = "BE " + *p.be.failed_stage + ": " + p.be.error;
    else if (!p.hbe.ok()) p.error = "HBE " + *p.hbe.failed_stage + ": " + p.hbe.error;
    else p.comparison = compare_series(p.be.records, p.hbe.records);
  }
  return out;
}

/// One row per point; failed points carry nan cells and a comment line.
inline std::string summary_csv(SweepGroup group, const std::vector<PointResult>& results) {
  std::string s = csv_header(kSummaryColumns);
  for (const auto& p : results) {
    s += std::string(to_string(group)) + ',' + fmt(p.point.voltage) + ',' + fmt(p.point.ratio) + ',';
    if (!p.comparison) {
      s += "nan,nan,nan,nan,nan,nan,nan\n# " + p.point.label() + " failed: " + p.error + '\n';
      continue;
    }
    const auto& c = *p.comparison;
    const auto& b = p.be.records.back();
    const auto& h = p.hbe.records.back();
    s += (c.crossover_time ? fmt(*c.crossover_time) : std::string("nan")) + ',' + fmt(c.peak_ratio) + ',' +
         fmt(c.t_peak) + ',' + fmt(b.lesion_volume * 1e9) + ',' + fmt(h.lesion_volume * 1e9) + ',' + fmt(b.T_max) +
         ',' + fmt(h.T_max) + '\n';
  }
  return s;
}

inline std::vector<std::pair<std::string, std::string>> sweep_plots(SweepGroup group,
                                                                    const std::vector<PointResult>& results) {
  const auto& pal = svg::palette();
  const std::string what = group == SweepGroup::Convection ? "convection ratio" : "voltage";
  auto name = [&](const PointResult& p) {
    return group == SweepGroup::Convection ? "ratio " + fmt(p.point.ratio) : fmt(p.point.voltage) + " V";
  };
  svg::Chart lesion{"Lesion volume by " + what + " (solid BE, dashed HBE)", "t (s)", "volume (mm^3)", {}};
  svg::Chart tmax{"Max temperature by " + what + " (solid BE, dashed HBE)", "t (s)", "T max (degC)", {}};
  svg::Chart ratio{"Lesion volume difference ratio by " + what, "t (s)", "|V_BE - V_HBE| / V_BE", {}};
  svg::Chart energy{"Cumulative Joule energy by " + what + " (solid muscle, dashed blood)", "t (s)", "energy (J)", {}};
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& p = results[i];
    if (!p.comparison) continue;
    const auto& col = pal[i % pal.size()];
    const std::string n = name(p);
    lesion.series.push_back(detail::series_of(p.be.records, n + " BE", [](auto& r) { return r.lesion_volume * 1e9; }, col));
    lesion.series.push_back(
        detail::series_of(p.hbe.records, n + " HBE", [](auto& r) { return r.lesion_volume * 1e9; }, col, true));
    tmax.series.push_back(detail::series_of(p.be.records, n + " BE", [](auto& r) { return r.T_max; }, col));
    tmax.series.push_back(detail::series_of(p.hbe.records, n + " HBE", [](auto& r) { return r.T_max; }, col, true));
    svg::Series rs;
    rs.name = n;
    rs.color = col;
    for (std::size_t k = 0; k < p.comparison->t.size(); ++k)
      if (p.comparison->t[k] >= 5.0) {
        rs.x.push_back(p.comparison->t[k]);
        rs.y.push_back(p.comparison->difference_ratio[k]);
      }
    ratio.series.push_back(std::move(rs));
    energy.series.push_back(
        detail::series_of(p.be.records, n + " muscle", [](auto& r) { return r.E_joule[1]; }, col));
    energy.series.push_back(
        detail::series_of(p.be.records, n + " blood", [](auto& r) { return r.E_joule[2]; }, col, true));
  }
  return {{"lesion", svg::render(lesion)},
          {"tmax", svg::render(tmax)},
          {"diff_ratio", svg::render(ratio)},
          {"energy", svg::render(energy)}};
}

}  // namespace rfa
