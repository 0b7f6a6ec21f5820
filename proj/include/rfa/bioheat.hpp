#pragma once

// Transient thermal problem on the electrode/muscle (and, with contact
// conductance, blood) regions.
//
// Parabolic (Pennes/Fourier):   C dT/dt + K T = F
// Hyperbolic (relaxed flux):    tau Cm d2T/dt2 + C dT/dt + K T = F + tau dF_m/dt
//
// C is the rho*c capacity over every thermal region, Cm the same restricted
// to muscle elements (only the muscle relaxes), K conduction plus films and F
// the Joule and film loads. The parabolic scheme is implicit Euler. The
// hyperbolic scheme advances the relaxation term with constant-average-
// acceleration Newmark kinematics (beta = 1/4, gamma = 1/2) and keeps the
// capacity term as an implicit Euler difference, so tau = 0 gives exactly the
// parabolic step.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfa/electric.hpp"
#include "rfa/fem.hpp"
#include "rfa/materials.hpp"
#include "rfa/mesh.hpp"
#include "rfa/sparse.hpp"

namespace rfa {

struct ThermalOperators {
  const Mesh* mesh = nullptr;
  DofMap dofs;
  InterfaceModel interface = InterfaceModel::ConvectiveBath;
  SparseMatrix capacity;    // int rho c phi_i phi_j dV over thermal regions
  SparseMatrix relaxation;  // same, muscle only
  SparseMatrix conduction;  // int k grad phi_i . grad phi_j dV + films
  SparseMatrix film;        // film part of `conduction`
  std::vector<double> film_load;
  std::vector<double> source_load;         // Joule heat, every region
  std::vector<double> muscle_source_load;  // Joule heat, muscle only
  std::vector<char> prescribed;
  std::vector<double> prescribed_value;
  CoefficientMap rho_c;

  [[nodiscard]] int size() const { return dofs.count; }
  /// F = Joule + film loads.
  [[nodiscard]] std::vector<double> load() const {
    std::vector<double> f(source_load);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += film_load[i];
    return f;
  }
  /// Temperature at each mesh node as seen from the solid side.
  [[nodiscard]] std::vector<double> nodal(std::span<const double> T) const {
    return {T.begin(), T.begin() + static_cast<std::ptrdiff_t>(mesh->nodes.size())};
  }
};

inline ThermalOperators build_thermal_operators(const Mesh& mesh, const MaterialTable& materials,
                                                const BoundaryConditions& bc, const JouleSource& joule,
                                                bool lumped_mass = false) {
  materials.check();
  bc.check();
  if (joule.Q.size() != mesh.triangles.size()) throw std::invalid_argument("thermal operators: source/mesh mismatch");
  ThermalOperators ops;
  ops.mesh = &mesh;
  ops.interface = bc.interface;
  const bool contact = bc.interface == InterfaceModel::ContactConductance;
  ops.dofs = contact ? DofMap::split_blood(mesh, {BoundaryTag::ElectrodeBloodInterface, BoundaryTag::MuscleBloodInterface})
                     : DofMap::nodal(mesh);

  CoefficientMap rho_c = materials.rho_c();
  CoefficientMap k = materials.conductivity();
  if (!contact) {
    rho_c = CoefficientMap{{Region::Electrode, rho_c[Region::Electrode]}, {Region::Muscle, rho_c[Region::Muscle]}};
    k = CoefficientMap{{Region::Electrode, k[Region::Electrode]}, {Region::Muscle, k[Region::Muscle]}};
  }
  ops.rho_c = rho_c;
  ops.capacity = assemble_mass(mesh, rho_c, lumped_mass, ops.dofs);
  ops.relaxation =
      assemble_mass(mesh, CoefficientMap{{Region::Muscle, rho_c[Region::Muscle]}}, lumped_mass, ops.dofs);
  const SparseMatrix stiffness = assemble_stiffness(mesh, k, ops.dofs);

  const double he = bc.effective_h_electrode(), hm = bc.effective_h_muscle();
  if (contact) {
    const auto fe = assemble_contact(mesh, BoundaryTag::ElectrodeBloodInterface, he, ops.dofs, Region::Electrode);
    const auto fm = assemble_contact(mesh, BoundaryTag::MuscleBloodInterface, hm, ops.dofs, Region::Muscle);
    ops.film = SparseMatrix::combine({{1.0, &fe}, {1.0, &fm}});
    ops.film_load.assign(static_cast<std::size_t>(ops.dofs.count), 0.0);
  } else {
    const auto fe =
        assemble_robin(mesh, BoundaryTag::ElectrodeBloodInterface, he, bc.T_blood, ops.dofs, Region::Electrode);
    const auto fm = assemble_robin(mesh, BoundaryTag::MuscleBloodInterface, hm, bc.T_blood, ops.dofs, Region::Muscle);
    ops.film = SparseMatrix::combine({{1.0, &fe.matrix}, {1.0, &fm.matrix}});
    ops.film_load = fe.load;
    for (std::size_t i = 0; i < ops.film_load.size(); ++i) ops.film_load[i] += fm.load[i];
  }
  ops.conduction = SparseMatrix::combine({{1.0, &stiffness}, {1.0, &ops.film}});

  std::vector<double> q_thermal(joule.Q);
  std::vector<double> q_muscle(joule.Q.size(), 0.0);
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    const Region r = mesh.triangles[e].region;
    if (!rho_c.has(r)) q_thermal[e] = 0.0;
    if (r == Region::Muscle) q_muscle[e] = joule.Q[e];
  }
  ops.source_load = assemble_source(mesh, q_thermal, ops.dofs);
  ops.muscle_source_load = assemble_source(mesh, q_muscle, ops.dofs);

  ops.prescribed = unused_dofs(mesh, rho_c, ops.dofs);
  ops.prescribed_value.assign(static_cast<std::size_t>(ops.dofs.count), bc.T_initial);
  for (int d = 0; d < ops.dofs.count; ++d)
    if (ops.prescribed[d]) ops.prescribed_value[d] = bc.T_blood;
  for (int node : nodes_with_tag(mesh, BoundaryTag::OuterGroundAndThermal)) {
    for (int r = 0; r < kRegionCount; ++r) {
      const int d = ops.dofs.dof_of_node[r][node];
      ops.prescribed[d] = 1;
      ops.prescribed_value[d] = bc.T_outer;
    }
  }
  return ops;
}

struct ThermalState {
  Method method = Method::BE;
  double t = 0.0;
  long step = 0;
  std::vector<double> T;     // per dof, degC
  std::vector<double> Tdot;  // per dof, K/s (hyperbolic only)
  std::vector<double> Tddot;  // per dof, K/s^2 (hyperbolic only)
};

/// How the source switch-on at t = 0 enters the hyperbolic equation.
enum class SourceOnset {
  /// dT/dt(0) = 0 and the tau dQ/dt term is dropped; heating ramps up over ~tau.
  Ramp,
  /// tau dQ/dt realised as tau Q / dt on the first step.
  Impulse,
};

struct StepOptions {
  double tol = 1e-10;  // relative residual of each linear solve
  SourceOnset onset = SourceOnset::Ramp;
};

namespace detail {

inline double checked_step(double dt) {
  if (!(dt > 0)) throw std::invalid_argument("time step must be > 0");
  return dt;
}

inline double checked_tau(double tau) {
  if (!(tau >= 0)) throw std::invalid_argument("relaxation time must be >= 0");
  return tau;
}

}  // namespace detail

/// Implicit Euler for C dT/dt + K T = F.
class BeIntegrator {
 public:
  BeIntegrator(const ThermalOperators& ops, double dt, StepOptions opt = {})
      : ops_(&ops),
        dt_(detail::checked_step(dt)),
        opt_(opt),
        sys_(SparseMatrix::combine({{1.0 / dt, &ops.capacity}, {1.0, &ops.conduction}}), ops.prescribed),
        solver_(sys_.reduced()),
        load_(ops.load()) {}

  [[nodiscard]] double dt() const { return dt_; }

  [[nodiscard]] ThermalState step(const ThermalState& s) const {
    if (s.method != Method::BE) throw std::invalid_argument("BeIntegrator: state is not parabolic");
    std::vector<double> rhs = ops_->capacity * std::span<const double>(s.T);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = rhs[i] / dt_ + load_[i];
    ThermalState next = s;
    next.T = ops_->prescribed_value;
    const auto x = solver_.solve(sys_.reduce_rhs(rhs, next.T), opt_.tol);
    sys_.expand(x, next.T);
    next.t = s.t + dt_;
    next.step = s.step + 1;
    return next;
  }

 private:
  const ThermalOperators* ops_;
  double dt_;
  StepOptions opt_;
  ConstrainedSystem sys_;
  SpdFactorization solver_;
  std::vector<double> load_;
};

/// Newmark (beta = 1/4) on the relaxation term, implicit Euler on the capacity term.
/// The first step is a backward-Euler start from dT/dt = 0: starting Newmark
/// from the equation's initial acceleration excites an undamped mode that
/// keeps small tau from approaching the parabolic solution.
class HbeIntegrator {
 public:
  HbeIntegrator(const ThermalOperators& ops, double dt, double tau, StepOptions opt = {})
      : ops_(&ops),
        dt_(detail::checked_step(dt)),
        tau_(detail::checked_tau(tau)),
        opt_(opt),
        sys_(matrix(ops, dt_, tau_, 4.0), ops.prescribed),
        solver_(sys_.reduced()),
        load_(ops.load()) {
    if (tau > 0) {
      start_sys_.emplace(matrix(ops, dt, tau, 1.0), ops.prescribed);
      start_solver_.emplace(start_sys_->reduced());
    }
  }

  [[nodiscard]] double dt() const { return dt_; }
  [[nodiscard]] double tau() const { return tau_; }

  /// Quiescent start: T given, dT/dt = d2T/dt2 = 0.
  [[nodiscard]] ThermalState initial_state(std::span<const double> T0) const {
    ThermalState s;
    s.method = Method::HBE;
    s.T.assign(T0.begin(), T0.end());
    s.Tdot.assign(T0.size(), 0.0);
    s.Tddot.assign(T0.size(), 0.0);
    return s;
  }

  [[nodiscard]] ThermalState step(const ThermalState& s) const {
    if (s.method != Method::HBE) throw std::invalid_argument("HbeIntegrator: state is not hyperbolic");
    const bool start = s.step == 0 && tau_ > 0;
    const double a0 = (start ? 1.0 : 4.0) / (dt_ * dt_);
    std::vector<double> inertial(s.T.size());
    for (std::size_t i = 0; i < inertial.size(); ++i)
      inertial[i] = a0 * (s.T[i] + dt_ * s.Tdot[i]) + (start ? 0.0 : s.Tddot[i]);
    const auto r_inertial = ops_->relaxation * std::span<const double>(inertial);
    const auto r_capacity = ops_->capacity * std::span<const double>(s.T);
    std::vector<double> rhs(load_);
    const bool impulse = opt_.onset == SourceOnset::Impulse && s.step == 0;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      rhs[i] += tau_ * r_inertial[i] + r_capacity[i] / dt_;
      if (impulse) rhs[i] += tau_ * ops_->muscle_source_load[i] / dt_;
    }
    const ConstrainedSystem& sys = start ? *start_sys_ : sys_;
    const SpdFactorization& solver = start ? *start_solver_ : solver_;
    ThermalState next = s;
    next.T = ops_->prescribed_value;
    const auto x = solver.solve(sys.reduce_rhs(rhs, next.T), opt_.tol);
    sys.expand(x, next.T);
    for (std::size_t i = 0; i < next.T.size(); ++i) {
      if (ops_->prescribed[i]) {
        next.Tdot[i] = next.Tddot[i] = 0.0;
        continue;
      }
      if (start) {
        next.Tdot[i] = (next.T[i] - s.T[i]) / dt_;
        next.Tddot[i] = (next.Tdot[i] - s.Tdot[i]) / dt_;
      } else {
        next.Tddot[i] = a0 * (next.T[i] - s.T[i] - dt_ * s.Tdot[i]) - s.Tddot[i];
        next.Tdot[i] = s.Tdot[i] + 0.5 * dt_ * (s.Tddot[i] + next.Tddot[i]);
      }
    }
    next.t = s.t + dt_;
    next.step = s.step + 1;
    return next;
  }

 private:
  static SparseMatrix matrix(const ThermalOperators& ops, double dt, double tau, double inertia) {
    return SparseMatrix::combine(
        {{tau * inertia / (dt * dt), &ops.relaxation}, {1.0 / dt, &ops.capacity}, {1.0, &ops.conduction}});
  }

  const ThermalOperators* ops_;
  double dt_;
  double tau_;
  StepOptions opt_;
  ConstrainedSystem sys_;
  SpdFactorization solver_;
  std::vector<double> load_;
  std::optional<ConstrainedSystem> start_sys_;
  std::optional<SpdFactorization> start_solver_;
};

/// Uniform initial temperature with the prescribed values applied.
inline ThermalState initial_state(const ThermalOperators& ops, Method method, double T0) {
  ThermalState s;
  s.method = method;
  s.T.assign(static_cast<std::size_t>(ops.size()), T0);
  for (int d = 0; d < ops.size(); ++d)
    if (ops.prescribed[d]) s.T[d] = ops.prescribed_value[d];
  if (method == Method::HBE) {
    s.Tdot.assign(s.T.size(), 0.0);
    s.Tddot.assign(s.T.size(), 0.0);
  }
  return s;
}

/// One implicit Euler step. Factorizes on every call; use BeIntegrator in loops.
inline ThermalState step_be(const ThermalState& state, double dt, const ThermalOperators& ops,
                            StepOptions opt = {}) {
  return BeIntegrator(ops, dt, opt).step(state);
}

/// One hyperbolic step. Factorizes on every call; use HbeIntegrator in loops.
inline ThermalState step_hbe(const ThermalState& state, double dt, const ThermalOperators& ops, double tau,
                             StepOptions opt = {}) {
  return HbeIntegrator(ops, dt, tau, opt).step(state);
}

/// Energy bookkeeping of one implicit Euler step (joules over the step).
struct StepEnergy {
  double stored_change = 0.0;
  double joule_input = 0.0;
  double film_loss = 0.0;       // into the blood bath
  double dirichlet_loss = 0.0;  // through prescribed-temperature boundaries
  [[nodiscard]] double residual() const { return stored_change - (joule_input - film_loss - dirichlet_loss); }
  [[nodiscard]] double throughput() const {
    return std::abs(stored_change) + std::abs(joule_input) + std::abs(film_loss) + std::abs(dirichlet_loss);
  }
};

inline StepEnergy step_energy_be(const ThermalOperators& ops, std::span<const double> T0, std::span<const double> T1,
                                 double dt) {
  StepEnergy e;
  std::vector<double> dT(T0.size());
  for (std::size_t i = 0; i < dT.size(); ++i) dT[i] = T1[i] - T0[i];
  const auto c_dT = ops.capacity * std::span<const double>(dT);
  const auto kT = ops.conduction * T1;
  const auto fT = ops.film * T1;
  for (std::size_t i = 0; i < dT.size(); ++i) {
    e.stored_change += c_dT[i];
    e.joule_input += dt * ops.source_load[i];
    e.film_loss += dt * (fT[i] - ops.film_load[i]);
    if (ops.prescribed[i]) {
      // reaction needed to hold the prescribed value is heat leaving the domain
      const double reaction = c_dT[i] / dt + kT[i] - ops.source_load[i] - ops.film_load[i];
      e.dirichlet_loss -= dt * reaction;
    }
  }
  return e;
}

}  // namespace rfa
