#include <gtest/gtest.h>

#include <filesystem>

#include "rfa/experiment.hpp"

using namespace rfa;

namespace {

std::string config_error(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& s, std::string_view part) { return s.find(part) != std::string::npos; }

SimulationConfig quick() {
  SimulationConfig c;
  c.edge_length = 0.4e-3;
  c.t_end = 2.0;
  c.dt = 0.5;
  return c;
}

}  // namespace

TEST(Config, EmptyObjectGivesDefaults) {
  const auto c = parse_config("{}");
  EXPECT_EQ(c.method, Method::BE);
  EXPECT_EQ(c.applied_voltage, 30.0);
  EXPECT_EQ(c.convection_ratio, 1.0);
  EXPECT_EQ(c.dt, 0.1);
  EXPECT_EQ(c.t_end, 120.0);
  EXPECT_EQ(c.lesion_threshold, 50.0);
  EXPECT_EQ(c.probe_depths, (std::vector<double>{1.3e-3, 2.6e-3, 5.2e-3}));
  EXPECT_EQ(c.steps(), 1200);
}

TEST(Config, ReadsNestedFieldsAndComments) {
  const auto c = parse_config(R"({
    // hyperbolic run at a lower ratio
    "method": "HBE", "convection_ratio": 0.25, "tau": 8,
    "boundary": {"h_muscle": 30000}, "geometry": {"insertion_depth": 2.0e-3},
    "interface": "contact", "onset": "impulse", "lumped_mass": true, "output_stride": 5
  })");
  EXPECT_EQ(c.method, Method::HBE);
  EXPECT_EQ(c.convection_ratio, 0.25);
  EXPECT_EQ(c.relaxation_time(), 8.0);
  EXPECT_EQ(c.boundary.h_muscle, 30000.0);
  EXPECT_EQ(c.geometry.insertion_depth, 2.0e-3);
  EXPECT_EQ(c.interface, InterfaceModel::ContactConductance);
  EXPECT_EQ(c.onset, SourceOnset::Impulse);
  EXPECT_TRUE(c.lumped_mass);
  EXPECT_EQ(c.output_stride, 5);
}

TEST(Config, ErrorsNameTheLineOrField) {
  EXPECT_TRUE(contains(config_error("{\n\"dt\": 0.1,\n\"t_end\": ,\n}"), "line 3"));
  EXPECT_TRUE(contains(config_error(R"({"dt": "fast"})"), "field 'dt'"));
  EXPECT_TRUE(contains(config_error(R"({"colour": 1})"), "field 'colour': unknown field"));
  EXPECT_TRUE(contains(config_error(R"({"boundary": {"h": 1}})"), "field 'boundary.h'"));
  EXPECT_TRUE(contains(config_error(R"({"method": "FE"})"), "field 'method'"));
  EXPECT_TRUE(contains(config_error(R"({"probe_depths": [1e-3]})"), "exactly 3"));
  EXPECT_TRUE(contains(config_error(R"({"dt": -1})"), "dt must be > 0"));
  EXPECT_TRUE(contains(config_error(R"({"lesion_threshold": 30})"), "lesion_threshold"));
  EXPECT_TRUE(contains(config_error(R"({"geometry": {"insertion_depth": 0.02}})"), "insertion_depth"));
  EXPECT_TRUE(contains(config_error("[1, 2]"), "top level"));
}

TEST(Csv, HeaderIsExact) {
  EXPECT_EQ(csv_header(kRunColumns),
            "t_s,method,voltage_V,conv_ratio,lesion_area_mm2,lesion_volume_mm3,T_max_C,r_max_mm,z_max_mm,"
            "T_probe_1p3_C,T_probe_2p6_C,T_probe_5p2_C,E_stored_muscle_J,E_stored_blood_J,E_stored_electrode_J,"
            "E_joule_muscle_J,E_joule_blood_J\n");
  EXPECT_EQ(csv_header(kSummaryColumns),
            "group,voltage_V,conv_ratio,crossover_time_s,peak_diff_ratio,t_peak_diff_s,lesion_volume_be_120s_mm3,"
            "lesion_volume_hbe_120s_mm3,T_max_be_120s_C,T_max_hbe_120s_C\n");
}

TEST(Run, ZeroVoltageStaysAtBodyTemperature) {
  SimulationConfig c = quick();
  c.applied_voltage = 0.0;
  for (Method m : {Method::BE, Method::HBE}) {
    c.method = m;
    const auto r = run_transient(c);
    ASSERT_TRUE(r.ok()) << r.error;
    ASSERT_EQ(r.records.size(), 4u);
    for (const auto& x : r.records) {
      EXPECT_NEAR(x.T_max, 37.0, 1e-9);
      EXPECT_EQ(x.lesion_volume, 0.0);
    }
  }
}

TEST(Run, DefaultRecordCountAndStride) {
  SimulationConfig c;
  c.edge_length = 0.4e-3;
  const auto r = run_transient(c);
  ASSERT_EQ(r.records.size(), 1200u);
  EXPECT_NEAR(r.records.front().t, 0.1, 1e-12);
  EXPECT_EQ(r.records.back().t, 120.0);
  c.output_stride = 7;
  c.t_end = 2.0;
  const auto s = run_transient(c);
  ASSERT_EQ(s.records.size(), 3u);  // steps 7, 14 and the last one
  EXPECT_NEAR(s.records.back().t, 2.0, 1e-12);
}

TEST(Run, RerunsAreByteIdentical) {
  const SimulationConfig c = quick();
  EXPECT_EQ(run_csv(c, run_transient(c)), run_csv(c, run_transient(c)));
}

TEST(Run, MeshFailureIsReportedWithTruncationMarker) {
  SimulationConfig c = quick();
  c.edge_length = 5e-3;
  const auto r = run_transient(c);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(*r.failed_stage, "mesh");
  const auto csv = run_csv(c, r);
  EXPECT_EQ(csv.rfind(csv_header(kRunColumns), 0), 0u);
  EXPECT_TRUE(contains(csv, "# truncated: mesh: "));
}

TEST(Run, SnapshotsAtRequestedTimes) {
  SimulationConfig c = quick();
  c.snapshot_times = {1.0, 0.0};
  const auto r = run_transient(c);
  ASSERT_EQ(r.snapshots.size(), 2u);
  EXPECT_EQ(r.snapshots[0].t, 0.0);
  EXPECT_EQ(r.snapshots[1].t, 1.0);
  EXPECT_EQ(r.snapshots[1].T.size(), r.mesh.nodes.size());
  const auto text = nodal_field_text(r.snapshots[1].T);
  EXPECT_EQ(text.rfind("0 ", 0), 0u);
  EXPECT_EQ(time_tag(1.0), "1s");
  EXPECT_EQ(time_tag(2.5), "2.5s");
}

TEST(Sweep, ParallelRunsMatchSerialByteForByte) {
  SweepSpec spec;
  spec.group = SweepGroup::Voltage;
  spec.voltages = {25.0, 35.0};
  const SimulationConfig base = quick();
  const auto serial = run_sweep(spec, base, 1);
  const auto parallel = run_sweep(spec, base, 2);
  ASSERT_EQ(serial.size(), 2u);
  EXPECT_EQ(summary_csv(spec.group, serial), summary_csv(spec.group, parallel));
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(run_csv(serial[i].be_config, serial[i].be), run_csv(parallel[i].be_config, parallel[i].be));
    EXPECT_EQ(run_csv(serial[i].hbe_config, serial[i].hbe), run_csv(parallel[i].hbe_config, parallel[i].hbe));
  }
  EXPECT_EQ(serial[0].point.label(), "V25_r1");
  EXPECT_EQ(summary_csv(spec.group, serial).rfind(csv_header(kSummaryColumns), 0), 0u);
}

TEST(Sweep, FailedPointsAreMarked) {
  SweepSpec spec;
  spec.group = SweepGroup::Convection;
  spec.ratios = {1.0};
  SimulationConfig base = quick();
  base.edge_length = 5e-3;
  const auto res = run_sweep(spec, base, 1);
  ASSERT_FALSE(res[0].error.empty());
  EXPECT_TRUE(contains(summary_csv(spec.group, res), "nan,nan"));
  EXPECT_TRUE(contains(summary_csv(spec.group, res), "# V30_r1 failed:"));
}

TEST(Plots, SvgDocumentsContainCurves) {
  SweepSpec spec;
  spec.group = SweepGroup::Convection;
  spec.ratios = {0.5, 1.0};
  const auto res = run_sweep(spec, quick(), 2);
  const auto plots = sweep_plots(spec.group, res);
  ASSERT_FALSE(plots.empty());
  for (const auto& [name, doc] : plots) {
    EXPECT_EQ(doc.rfind("<svg", 0), 0u) << name;
    EXPECT_TRUE(contains(doc, "<polyline")) << name;
    EXPECT_TRUE(contains(doc, "</svg>")) << name;
  }
  const SimulationConfig c = quick();
  for (const auto& [name, doc] : run_plots(c, run_transient(c))) EXPECT_TRUE(contains(doc, "<polyline")) << name;
}

TEST(Plots, MarkupIsEscaped) {
  svg::Chart ch;
  ch.title = "a<b & c";
  ch.series.push_back({"s", {0, 1}, {0, 1}});
  const auto doc = svg::render(ch);
  EXPECT_TRUE(contains(doc, "a&lt;b &amp; c"));
}

TEST(Files, AtomicWriteReplacesContent) {
  const auto dir = std::filesystem::temp_directory_path() / "rfa_test_files";
  std::filesystem::remove_all(dir);
  write_atomic(dir / "x.txt", "one");
  write_atomic(dir / "x.txt", "two");
  std::ifstream in(dir / "x.txt");
  std::string s;
  in >> s;
  EXPECT_EQ(s, "two");
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++n;
  EXPECT_EQ(n, 1u);
  std::filesystem::remove_all(dir);
}
