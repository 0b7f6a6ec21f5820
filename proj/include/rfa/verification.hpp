#pragma once

// FEM-versus-reference checks shared by the `validate` command and the
// acceptance suite.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rfa/bioheat.hpp"
#include "rfa/oracles.hpp"
#include "rfa/simulation.hpp"

namespace rfa {

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double required = 0.0;
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// 1D problems on a thin axisymmetric strip

/// Strip r in [0, width] x z in [0, length] of one material. The face z = 0 is
/// held at `T_outer`; z = length is held too when `far_end_fixed`, otherwise
/// insulated. The radial face is insulated.
struct StripModel {
  Mesh mesh;
  MaterialTable materials;
  BoundaryConditions bc;
  JouleSource joule;
};

inline StripModel make_strip(const Oracle1DConfig& c, double T_fixed, bool far_end_fixed, int nz) {
  StripModel s;
  const double width = c.length / nz;
  RectSides sides;
  sides.r_min = BoundaryTag::Axis;
  sides.r_max = BoundaryTag::MuscleBloodInterface;
  sides.z_min = BoundaryTag::OuterGroundAndThermal;
  sides.z_max = far_end_fixed ? BoundaryTag::OuterGroundAndThermal : BoundaryTag::MuscleBloodInterface;
  s.mesh = rect_mesh(0.0, width, 0.0, c.length, 1, nz, Region::Muscle, sides);
  s.materials[Region::Muscle] = {c.density, c.specific_heat, c.conductivity, 1.0};
  s.materials.tau_muscle = c.tau;
  s.bc.convection_ratio = 0.0;
  s.bc.T_outer = T_fixed;
  s.bc.T_initial = c.T_initial;
  s.joule.Q.assign(s.mesh.triangles.size(), 0.0);
  for (std::size_t e = 0; e < s.mesh.triangles.size(); ++e) {
    const auto& t = s.mesh.triangles[e];
    const double zc = (s.mesh.nodes[t.v[0]].z + s.mesh.nodes[t.v[1]].z + s.mesh.nodes[t.v[2]].z) / 3.0;
    if (zc >= c.source_from && zc <= c.source_end()) s.joule.Q[e] = c.source;
    const double p = s.joule.Q[e] * revolved_volume(s.mesh, t);
    s.joule.region_power[static_cast<int>(Region::Muscle)] += p;
    s.joule.total_power += p;
  }
  return s;
}

/// Axis temperatures of a strip run at the requested times (which must be multiples of dt).
inline Table1D fem_strip(const Oracle1DConfig& c, Method method, int nz, double dt, double T_fixed,
                         bool far_end_fixed, SourceOnset onset = SourceOnset::Ramp) {
  const StripModel s = make_strip(c, T_fixed, far_end_fixed, nz);
  const ThermalOperators ops = build_thermal_operators(s.mesh, s.materials, s.bc, s.joule);
  StepOptions opt;
  opt.onset = onset;
  ThermalState st = initial_state(ops, method, c.T_initial);
  std::optional<BeIntegrator> be;
  std::optional<HbeIntegrator> hbe;
  if (method == Method::BE) {
    be.emplace(ops, dt, opt);
  } else {
    hbe.emplace(ops, dt, c.tau, opt);
    st = hbe->initial_state(st.T);
  }
  std::vector<int> axis;  // axis nodes ordered by z
  for (std::size_t i = 0; i < s.mesh.nodes.size(); ++i)
    if (s.mesh.nodes[i].r == 0.0) axis.push_back(static_cast<int>(i));
  std::sort(axis.begin(), axis.end(), [&](int a, int b) { return s.mesh.nodes[a].z < s.mesh.nodes[b].z; });

  Table1D tab;
  for (int i : axis) tab.x.push_back(s.mesh.nodes[i].z);
  std::vector<double> times(c.times);
  std::sort(times.begin(), times.end());
  auto emit = [&] {
    std::vector<double> row;
    for (int i : axis) row.push_back(st.T[i]);
    tab.T.push_back(std::move(row));
  };
  long k = 0;
  for (double t : times) {
    const long target = std::lround(t / dt);
    for (; k < target; ++k) st = be ? be->step(st) : hbe->step(st);
    tab.t.push_back(t);
    emit();
  }
  return tab;
}

/// Relative L2 difference of two tables on the first table's grid, over all
/// times after t = 0, measured on the rise above `base`.
inline double relative_l2(const Table1D& fem, const Table1D& ref, double base) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < fem.t.size(); ++k) {
    if (fem.t[k] == 0.0) continue;
    for (std::size_t i = 0; i < fem.x.size(); ++i) {
      const double r = ref.at(k, fem.x[i]);
      num += (fem.T[k][i] - r) * (fem.T[k][i] - r);
      den += (r - base) * (r - base);
    }
  }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline Oracle1DConfig muscle_slab(const MaterialTable& m = {}) {
  Oracle1DConfig c;
  const auto& mu = m[Region::Muscle];
  c.density = mu.density;
  c.specific_heat = mu.specific_heat;
  c.conductivity = mu.conductivity;
  c.tau = m.tau_muscle;
  return c;
}

/// Heated slab with cold ends against the Fourier series.
inline CheckResult check_slab_series(int nz = 100, double dt = 0.1) {
  Oracle1DConfig c = muscle_slab();
  c.tau = 0.0;
  c.length = 4e-3;
  c.source = 2e6;
  c.times = {5.0, 10.0, 20.0, 40.0};
  const Table1D ref = oracle_be_1d(c);
  const Table1D fem = fem_strip(c, Method::BE, nz, dt, 37.0, true);
  const double err = relative_l2(fem, ref, 37.0);
  return {"parabolic slab vs series (rel. L2)", err, 0.01, err < 0.01, ""};
}

/// Thermal front speed from half-amplitude crossings at two times.
struct FrontSpeed {
  double expected = 0.0;
  double oracle = 0.0;
  double fem = 0.0;
};

inline FrontSpeed measure_front_speed(int nz = 600, double dt = 0.01) {
  Oracle1DConfig c = muscle_slab();
  c.length = 3e-3;
  c.left = {SlabEnd::Kind::Temperature, 47.0};
  c.right = {SlabEnd::Kind::Insulated, 0.0};
  c.cells = 1200;
  // behind the front the jump stays above half the step while t < 2 tau ln 2
  c.times = {5.0, 15.0};
  FrontSpeed f;
  f.expected = c.wave_speed();
  const Table1D ref = oracle_hbe_1d(c);
  f.oracle = (front_position(ref, 1, 37.0, 10.0) - front_position(ref, 0, 37.0, 10.0)) / 10.0;
  const Table1D fem = fem_strip(c, Method::HBE, nz, dt, 47.0, false);
  f.fem = (front_position(fem, 1, 37.0, 10.0) - front_position(fem, 0, 37.0, 10.0)) / 10.0;
  return f;
}

// ---------------------------------------------------------------------------
// Manufactured solutions

struct ConvergenceStudy {
  std::vector<double> h;
  std::vector<double> error;  // relative L2 at t_end
  [[nodiscard]] double order() const {
    const std::size_t n = error.size();
    return std::log(error[n - 2] / error[n - 1]) / std::log(h[n - 2] / h[n - 1]);
  }
};

/// Implicit Euler on an all-Dirichlet rectangle of muscle for the given
/// manufactured solution, with dt shrinking like h^2.
template <class Expr>
ConvergenceStudy manufactured_convergence(Expr expr, double width, double length, std::vector<int> levels,
                                          double t_end, double dt_coarse, const Material& mat = {}) {
  const double rho_c = mat.rho_c() > 0 ? mat.rho_c() : MaterialTable{}[Region::Muscle].rho_c();
  const double k = mat.conductivity > 0 ? mat.conductivity : MaterialTable{}[Region::Muscle].conductivity;
  const auto ms = manufactured_solution(expr, rho_c, k);
  ConvergenceStudy study;
  for (int nz : levels) {
    const int nr = std::max(1, static_cast<int>(std::lround(nz * width / length)));
    RectSides sides{BoundaryTag::Axis, BoundaryTag::OuterGroundAndThermal, BoundaryTag::OuterGroundAndThermal,
                    BoundaryTag::OuterGroundAndThermal};
    const Mesh mesh = rect_mesh(0.0, width, 0.0, length, nr, nz, Region::Muscle, sides);
    const CoefficientMap unit{{Region::Muscle, 1.0}};
    const SparseMatrix M = assemble_mass(mesh, unit);
    const SparseMatrix C = M.scaled(rho_c);
    const SparseMatrix K = assemble_stiffness(mesh, CoefficientMap{{Region::Muscle, k}});
    const double ratio = static_cast<double>(levels.front()) / nz;
    const long steps = std::lround(t_end / (dt_coarse * ratio * ratio));
    const double dt = t_end / steps;
    std::vector<char> fixed(mesh.nodes.size(), 0);
    for (int i : nodes_with_tag(mesh, BoundaryTag::OuterGroundAndThermal)) fixed[i] = 1;
    const ConstrainedSystem sys(SparseMatrix::combine({{1.0 / dt, &C}, {1.0, &K}}), fixed);
    const SpdFactorization lu(sys.reduced());

    const std::size_t n = mesh.nodes.size();
    std::vector<double> T(n), q(n), u(n);
    for (std::size_t i = 0; i < n; ++i) T[i] = ms.exact(mesh.nodes[i].r, mesh.nodes[i].z, 0.0);
    for (long s = 1; s <= steps; ++s) {
      const double t = s * dt;
      for (std::size_t i = 0; i < n; ++i) {
        q[i] = ms.source(mesh.nodes[i].r, mesh.nodes[i].z, t);
        u[i] = ms.exact(mesh.nodes[i].r, mesh.nodes[i].z, t);
      }
      auto rhs = M * std::span<const double>(q);
      const auto ct = C * std::span<const double>(T);
      for (std::size_t i = 0; i < n; ++i) rhs[i] += ct[i] / dt;
      const auto x = lu.solve(sys.reduce_rhs(rhs, u), 1e-12);
      T = u;
      sys.expand(x, T);
    }
    std::vector<double> e(n), ref(n);
    for (std::size_t i = 0; i < n; ++i) {
      ref[i] = ms.exact(mesh.nodes[i].r, mesh.nodes[i].z, t_end);
      e[i] = T[i] - ref[i];
    }
    const double base = ms.exact(0.0, 0.0, t_end);
    for (double& v : ref) v -= base;
    const auto Me = M * std::span<const double>(e);
    const auto Mr = M * std::span<const double>(ref);
    study.h.push_back(length / nz);
    study.error.push_back(std::sqrt(dot(e, Me) / dot(ref, Mr)));
  }
  return study;
}

/// Default manufactured check: T* = 37 + sin(pi z / L) e^{-t} on a muscle slab.
inline CheckResult check_manufactured_order() {
  const double L = 0.01;
  auto expr = [L](auto r, auto z, auto t) {
    (void)r;
    return 37.0 + sin(z * (std::numbers::pi / L)) * exp(-t);
  };
  const auto study = manufactured_convergence(expr, 0.25 * L, L, {8, 16, 32, 64}, 1.0, 0.1);
  const double p = study.order();
  return {"manufactured solution convergence order", p, 1.8, p >= 1.8, ""};
}

// ---------------------------------------------------------------------------
// Full-model checks

/// Largest nodal |T_HBE(tau = 0) - T_BE| over a short default run.
inline double tau_zero_difference(const SimulationConfig& base, double t_end = 10.0, double tau = 0.0) {
  SimulationConfig cfg = base;
  cfg.t_end = t_end;
  const PreparedModel model = prepare_model(cfg);
  const ThermalOperators ops =
      build_thermal_operators(model.mesh, cfg.materials, cfg.effective_boundary(), model.joule, cfg.lumped_mass);
  const StepOptions opt{cfg.solver_tol, cfg.onset};
  const BeIntegrator be(ops, cfg.dt, opt);
  const HbeIntegrator hbe(ops, cfg.dt, tau, opt);
  ThermalState a = initial_state(ops, Method::BE, cfg.boundary.T_initial);
  ThermalState b = hbe.initial_state(initial_state(ops, Method::HBE, cfg.boundary.T_initial).T);
  double worst = 0.0;
  for (long k = 0; k < cfg.steps(); ++k) {
    a = be.step(a);
    b = hbe.step(b);
    for (std::size_t i = 0; i < a.T.size(); ++i) worst = std::max(worst, std::abs(a.T[i] - b.T[i]));
  }
  return worst;
}

struct BalanceSummary {
  double worst_relative_residual = 0.0;
  double min_temperature = 0.0;
};

/// Per-step energy residual of the parabolic scheme and the lowest temperature seen.
inline BalanceSummary energy_balance(const SimulationConfig& base, long steps) {
  const PreparedModel model = prepare_model(base);
  const ThermalOperators ops =
      build_thermal_operators(model.mesh, base.materials, base.effective_boundary(), model.joule, base.lumped_mass);
  const BeIntegrator be(ops, base.dt, {base.solver_tol, base.onset});
  ThermalState s = initial_state(ops, Method::BE, base.boundary.T_initial);
  BalanceSummary out;
  out.min_temperature = *std::min_element(s.T.begin(), s.T.end());
  for (long k = 0; k < steps; ++k) {
    ThermalState next = be.step(s);
    const auto e = step_energy_be(ops, s.T, next.T, base.dt);
    out.worst_relative_residual = std::max(out.worst_relative_residual, std::abs(e.residual()) / e.throughput());
    out.min_temperature = std::min(out.min_temperature, *std::min_element(next.T.begin(), next.T.end()));
    s = std::move(next);
  }
  return out;
}

/// Checks run by `validate`.
inline std::vector<CheckResult> validation_suite() {
  std::vector<CheckResult> out;
  {
    SimulationConfig cfg;
    const double d = tau_zero_difference(cfg);
    out.push_back({"tau = 0 equivalence, max |dT| over 10 s (K)", d, 1e-6, d < 1e-6, ""});
  }
  out.push_back(check_slab_series());
  {
    const auto f = measure_front_speed();
    const double rel = std::abs(f.fem - f.expected) / f.expected;
    out.push_back({"hyperbolic front speed, relative error", rel, 0.05, rel < 0.05,
                   "fem " + std::to_string(f.fem) + " m/s, expected " + std::to_string(f.expected) + " m/s"});
  }
  out.push_back(check_manufactured_order());
  {
    SimulationConfig cfg;
    const auto b = energy_balance(cfg, 100);
    out.push_back({"energy balance, worst relative residual per step", b.worst_relative_residual, 1e-6,
                   b.worst_relative_residual <= 1e-6, ""});
  }
  return out;
}

}  // namespace rfa
