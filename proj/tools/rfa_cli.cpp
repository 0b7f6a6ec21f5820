// Command-line front end: single runs, sweeps, validation and mesh inspection.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rfa/experiment.hpp"
#include "rfa/verification.hpp"

namespace fs = std::filesystem;
using namespace rfa;

namespace {

void write_plots(const fs::path& dir, const std::string& stem,
                 const std::vector<std::pair<std::string, std::string>>& plots) {
  for (const auto& [name, doc] : plots) write_atomic(dir / (stem + "_" + name + ".svg"), doc);
}

int cmd_run(const std::string& config_path, const fs::path& out, bool plots) {
  SimulationConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return 2;
  }
  const std::string stem = fs::path(config_path).stem().string();
  const RunResult res = run_transient(cfg);
  write_atomic(out / (stem + ".csv"), run_csv(cfg, res));
  if (!cfg.snapshot_times.empty() && !res.mesh.nodes.empty()) {
    std::ostringstream mesh;
    write_mesh(mesh, res.mesh);
    write_atomic(out / (stem + "_mesh.txt"), mesh.str());
    if (!res.potential.V.empty()) write_atomic(out / (stem + "_V.txt"), nodal_field_text(res.potential.V));
    for (const auto& s : res.snapshots)
      write_atomic(out / (stem + "_T_" + time_tag(s.t) + ".txt"), nodal_field_text(s.T));
  }
  if (plots && !res.records.empty()) write_plots(out, stem, run_plots(cfg, res));
  if (!res.ok()) {
    std::cerr << "run failed during " << *res.failed_stage << ": " << res.error << '\n';
    return 1;
  }
  std::cout << "wrote " << res.records.size() << " records to " << (out / (stem + ".csv")).string() << '\n';
  return 0;
}

int cmd_sweep(const std::string& group, int jobs, const fs::path& out, bool plots, const std::string& base_path) {
  SweepSpec spec;
  spec.group = group == "convection" ? SweepGroup::Convection : SweepGroup::Voltage;
  SimulationConfig base;
  if (!base_path.empty()) {
    try {
      base = load_config(base_path);
    } catch (const ConfigError& e) {
      std::cerr << base_path << ": " << e.what() << '\n';
      return 2;
    }
  }
  const auto results = run_sweep(spec, base, jobs);
  const std::string g(to_string(spec.group));
  int failures = 0;
  for (const auto& p : results) {
    const std::string stem = g + "_" + p.point.label();
    if (!p.be.records.empty() || !p.be.ok()) write_atomic(out / (stem + "_BE.csv"), run_csv(p.be_config, p.be));
    if (!p.hbe.records.empty() || !p.hbe.ok()) write_atomic(out / (stem + "_HBE.csv"), run_csv(p.hbe_config, p.hbe));
    if (!p.error.empty()) {
      ++failures;
      std::cerr << stem << " failed: " << p.error << '\n';
    }
  }
  write_atomic(out / (g + "_summary.csv"), summary_csv(spec.group, results));
  if (plots) write_plots(out, g, sweep_plots(spec.group, results));
  std::cout << "sweep " << g << ": " << results.size() - failures << "/" << results.size() << " points completed\n";
  return failures ? 1 : 0;
}

int cmd_validate() {
  int failed = 0;
  std::printf("%-52s %12s %12s  %s\n", "check", "measured", "required", "result");
  for (const auto& c : validation_suite()) {
    std::printf("%-52s %12.4g %12.4g  %s", c.name.c_str(), c.measured, c.required, c.pass ? "PASS" : "FAIL");
    if (!c.detail.empty()) std::printf("  (%s)", c.detail.c_str());
    std::printf("\n");
    failed += !c.pass;
  }
  return failed ? 1 : 0;
}

int cmd_mesh(bool info, const std::string& export_path, double edge_length) {
  const Mesh m = build_geometry(ModelGeometry{}, edge_length);
  if (info || export_path.empty()) {
    const auto q = mesh_quality(m);
    std::printf("nodes          %zu\n", q.node_count);
    std::printf("triangles      %zu\n", q.triangle_count);
    std::printf("min angle      %.2f deg\n", q.min_angle_deg);
    std::printf("max aspect     %.3f\n", q.max_aspect_ratio);
    for (int r = 0; r < kRegionCount; ++r)
      std::printf("volume %-9s %.6e m^3\n", std::string(to_string(static_cast<Region>(r))).c_str(), q.region_volume[r]);
    std::array<int, 5> edges{};
    for (const auto& e : m.edges) ++edges[static_cast<int>(e.tag)];
    for (int t = 0; t < 5; ++t)
      std::printf("edges %-24s %d\n", std::string(to_string(static_cast<BoundaryTag>(t))).c_str(), edges[t]);
  }
  if (!export_path.empty()) {
    std::ostringstream os;
    write_mesh(os, m);
    write_atomic(export_path, os.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Axisymmetric RF ablation simulator (parabolic vs hyperbolic bioheat)"};
  app.require_subcommand(1);

  std::string config, base_config, group, export_path;
  std::string out = "out";
  bool plots = false, info = false;
  int jobs = 1;
  double edge_length = kDefaultEdgeLength;

  auto* run = app.add_subcommand("run", "single transient run from a JSON config");
  run->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory");
  run->add_flag("--plots", plots, "write SVG plots");

  auto* sweep = app.add_subcommand("sweep", "BE/HBE comparison over a parameter group");
  sweep->add_option("--group", group, "convection or voltage")
      ->required()
      ->check(CLI::IsMember({"convection", "voltage"}));
  sweep->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out, "output directory");
  sweep->add_flag("--plots", plots, "write SVG plots");
  sweep->add_option("--config", base_config, "base config for every point")->check(CLI::ExistingFile);

  auto* validate = app.add_subcommand("validate", "solver checks against reference solutions");

  auto* mesh = app.add_subcommand("mesh", "build the default model mesh");
  mesh->add_flag("--info", info, "print mesh statistics");
  mesh->add_option("--export", export_path, "write the mesh file");
  mesh->add_option("--edge-length", edge_length, "target edge length at the electrode (m)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, out, plots);
    if (*sweep) return cmd_sweep(group, jobs, out, plots, base_config);
    if (*validate) return cmd_validate();
    if (*mesh) return cmd_mesh(info, export_path, edge_length);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
