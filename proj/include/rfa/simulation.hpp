#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfa/bioheat.hpp"
#include "rfa/electric.hpp"
#include "rfa/geometry.hpp"
#include "rfa/materials.hpp"
#include "rfa/postprocess.hpp"

namespace rfa {

struct SimulationConfig {
  Method method = Method::BE;
  double applied_voltage = 30.0;  // V
  double convection_ratio = 1.0;
  double dt = 0.1;      // s
  double t_end = 120.0;  // s
  double edge_length = kDefaultEdgeLength;
  double solver_tol = 1e-10;
  bool lumped_mass = false;
  std::vector<double> probe_depths{1.3e-3, 2.6e-3, 5.2e-3};
  double lesion_threshold = 50.0;  // degC
  int output_stride = 1;
  /// Relaxation time override; the material table's value when unset.
  std::optional<double> tau;
  InterfaceModel interface = InterfaceModel::ConvectiveBath;
  SourceOnset onset = SourceOnset::Ramp;
  ModelGeometry geometry;
  MaterialTable materials;
  BoundaryConditions boundary;
  /// Times at which nodal temperature snapshots are kept.
  std::vector<double> snapshot_times;

  [[nodiscard]] long steps() const { return std::lround(t_end / dt); }
  [[nodiscard]] double relaxation_time() const { return tau.value_or(materials.tau_muscle); }
  [[nodiscard]] BoundaryConditions effective_boundary() const {
    BoundaryConditions bc = boundary;
    bc.convection_ratio = convection_ratio;
    bc.interface = interface;
    return bc;
  }

  void check() const {
    auto need = [](bool ok, const char* what) {
      if (!ok) throw std::invalid_argument(std::string("invalid config: ") + what);
    };
    need(dt > 0, "dt must be > 0");
    need(t_end >= dt, "t_end must be >= dt");
    need(std::abs(steps() * dt - t_end) <= 1e-9 * t_end, "t_end must be a whole number of steps");
    need(lesion_threshold > 37.0, "lesion_threshold must be > 37");
    need(applied_voltage >= 0, "applied_voltage must be >= 0");
    need(convection_ratio >= 0, "convection_ratio must be >= 0");
    need(solver_tol > 0, "solver_tol must be > 0");
    need(output_stride >= 1, "output_stride must be >= 1");
    need(!tau || *tau >= 0, "tau must be >= 0");
    for (double d : probe_depths) need(d >= 0 && d <= geometry.tissue_thickness, "probe depth outside the muscle");
    materials.check();
  }
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> T;  // nodal
};

struct RunResult {
  Mesh mesh;
  std::vector<TimeSeriesRecord> records;
  std::vector<Snapshot> snapshots;
  PotentialField potential;
  JouleSource joule;
  /// Stage that aborted the run; records up to that point are kept.
  std::optional<std::string> failed_stage;
  std::string error;
  [[nodiscard]] bool ok() const { return !failed_stage; }
};

/// Everything a transient run needs that does not depend on the method.
struct PreparedModel {
  Mesh mesh;
  PotentialField potential;
  JouleSource joule;
};

inline PreparedModel prepare_model(const SimulationConfig& cfg) {
  PreparedModel m;
  m.mesh = build_geometry(cfg.geometry, cfg.edge_length);
  m.potential = solve_potential(m.mesh, cfg.materials.sigma(), cfg.applied_voltage);
  m.joule = joule_heat(m.mesh, m.potential, cfg.materials.sigma());
  return m;
}

namespace detail {

inline TimeSeriesRecord make_record(const SimulationConfig& cfg, const ThermalOperators& ops,
                                    const std::vector<Probe>& probes, const JouleSource& joule,
                                    const ThermalState& s) {
  const Mesh& mesh = *ops.mesh;
  const auto T = ops.nodal(s.T);
  TimeSeriesRecord r;
  r.t = s.t;
  const auto lesion = lesion_metrics(mesh, T, cfg.lesion_threshold);
  r.lesion_area = lesion.area;
  r.lesion_volume = lesion.volume;
  const auto mx = max_temperature(mesh, T);
  r.T_max = mx.value;
  r.T_max_location = mx.location;
  for (const auto& p : probes) r.probe_T.push_back(p(T));
  r.E_stored = region_energy(mesh, ops.dofs, s.T, ops.rho_c, cfg.boundary.T_initial);
  for (int i = 0; i < kRegionCount; ++i) r.E_joule[i] = joule.region_power[i] * s.t;
  return r;
}

}  // namespace detail

/// Steps one method on a prepared model. `on_record` sees every emitted record.
inline RunResult run_prepared(const SimulationConfig& cfg, const PreparedModel& model,
                              const std::function<void(const TimeSeriesRecord&)>& on_record = {}) {
  RunResult res;
  res.mesh = model.mesh;
  res.potential = model.potential;
  res.joule = model.joule;
  std::string stage = "thermal assembly";
  try {
    const ThermalOperators ops = build_thermal_operators(res.mesh, cfg.materials, cfg.effective_boundary(),
                                                         res.joule, cfg.lumped_mass);
    stage = "probe location";
    std::vector<Probe> probes;
    for (double d : cfg.probe_depths) probes.emplace_back(res.mesh, cfg.geometry.axis_point_at_depth(d));

    stage = "factorization";
    StepOptions opt{cfg.solver_tol, cfg.onset};
    std::optional<BeIntegrator> be;
    std::optional<HbeIntegrator> hbe;
    ThermalState s = initial_state(ops, cfg.method, cfg.boundary.T_initial);
    if (cfg.method == Method::BE) {
      be.emplace(ops, cfg.dt, opt);
    } else {
      hbe.emplace(ops, cfg.dt, cfg.relaxation_time(), opt);
      s = hbe->initial_state(s.T);
    }

    std::size_t next_snapshot = 0;
    auto snapshots = cfg.snapshot_times;
    std::sort(snapshots.begin(), snapshots.end());
    auto take_snapshots = [&] {
      while (next_snapshot < snapshots.size() && snapshots[next_snapshot] <= s.t + 0.5 * cfg.dt) {
        res.snapshots.push_back({s.t, ops.nodal(s.T)});
        ++next_snapshot;
      }
    };
    take_snapshots();

    const long n = cfg.steps();
    for (long k = 1; k <= n; ++k) {
      stage = "time step " + std::to_string(k);
      s = be ? be->step(s) : hbe->step(s);
      s.t = k * cfg.dt;  // no drift from repeated addition
      if (k % cfg.output_stride == 0 || k == n) {
        res.records.push_back(detail::make_record(cfg, ops, probes, res.joule, s));
        if (on_record) on_record(res.records.back());
      }
      take_snapshots();
    }
  } catch (const std::exception& e) {
    res.failed_stage = stage;
    res.error = e.what();
  }
  return res;
}

/// Builds the mesh, solves the potential once and steps the chosen method to t_end.
inline RunResult run_transient(const SimulationConfig& cfg,
                               const std::function<void(const TimeSeriesRecord&)>& on_record = {}) {
  cfg.check();
  RunResult res;
  PreparedModel model;
  try {
    model.mesh = build_geometry(cfg.geometry, cfg.edge_length);
  } catch (const std::exception& e) {
    res.failed_stage = "mesh";
    res.error = e.what();
    return res;
  }
  try {
    model.potential = solve_potential(model.mesh, cfg.materials.sigma(), cfg.applied_voltage);
    model.joule = joule_heat(model.mesh, model.potential, cfg.materials.sigma());
  } catch (const std::exception& e) {
    res.mesh = std::move(model.mesh);
    res.failed_stage = "electric field";
    res.error = e.what();
    return res;
  }
  return run_prepared(cfg, model, on_record);
}

}  // namespace rfa
