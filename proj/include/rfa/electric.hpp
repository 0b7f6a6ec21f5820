#pragma once

// Quasi-static potential div(sigma grad V) = 0 on the tissue and blood, with
// the electrode treated as an equipotential at the applied voltage.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "rfa/fem.hpp"
#include "rfa/mesh.hpp"
#include "rfa/sparse.hpp"

namespace rfa {

struct PotentialField {
  std::vector<double> V;  // nodal, volts
  double applied_voltage = 0.0;
};

struct JouleSource {
  std::vector<double> Q;  // per element, W/m^3
  double total_power = 0.0;
  std::array<double, kRegionCount> region_power{};
};

/// Electrical conductivities of the conducting media; the electrode is excluded.
inline CoefficientMap conducting_media(const CoefficientMap& sigma) {
  CoefficientMap out;
  for (Region r : {Region::Muscle, Region::Blood})
    if (sigma.has(r)) out.set(r, sigma[r]);
  return out;
}

inline PotentialField solve_potential(const Mesh& mesh, const CoefficientMap& sigma, double applied_voltage,
                                      double tol = 1e-12) {
  if (!(applied_voltage >= 0.0)) throw std::invalid_argument("solve_potential: applied voltage must be >= 0");
  const CoefficientMap media = conducting_media(sigma);
  for (Region r : {Region::Muscle, Region::Blood})
    if (media.has(r) && !(media[r] > 0.0)) throw std::invalid_argument("solve_potential: sigma must be > 0");

  const int n = static_cast<int>(mesh.nodes.size());
  PotentialField field;
  field.applied_voltage = applied_voltage;
  field.V.assign(static_cast<std::size_t>(n), 0.0);

  const DofMap dofs = DofMap::nodal(mesh);
  std::vector<char> prescribed = unused_dofs(mesh, media, dofs);
  // nodes outside the conducting media are inside the electrode
  for (int i = 0; i < n; ++i)
    if (prescribed[i]) field.V[i] = applied_voltage;
  for (int i : nodes_with_tag(mesh, BoundaryTag::ElectrodeSurface)) {
    prescribed[i] = 1;
    field.V[i] = applied_voltage;
  }
  for (int i : nodes_with_tag(mesh, BoundaryTag::OuterGroundAndThermal)) {
    prescribed[i] = 1;
    field.V[i] = 0.0;
  }
  if (applied_voltage == 0.0) return field;

  const SparseMatrix K = assemble_stiffness(mesh, media, dofs);
  const ConstrainedSystem sys(K, prescribed);
  const std::vector<double> zero(static_cast<std::size_t>(n), 0.0);
  const auto rhs = sys.reduce_rhs(zero, field.V);
  const auto rep = solve_spd(sys.reduced(), rhs, tol);
  sys.expand(rep.x, field.V);
  return field;
}

/// Gradient of the P1 field on one element.
inline std::array<double, 2> element_gradient(const Mesh& mesh, const Triangle& t, std::span<const double> u) {
  const auto g = detail::p1_geometry(mesh.nodes[t.v[0]], mesh.nodes[t.v[1]], mesh.nodes[t.v[2]]);
  std::array<double, 2> grad{};
  for (int i = 0; i < 3; ++i) {
    grad[0] += g.dphi_dr[i] * u[t.v[i]];
    grad[1] += g.dphi_dz[i] * u[t.v[i]];
  }
  return grad;
}

/// Resistive heating sigma*|grad V|^2, constant per element.
inline JouleSource joule_heat(const Mesh& mesh, const PotentialField& field, const CoefficientMap& sigma) {
  if (field.V.size() != mesh.nodes.size()) throw std::invalid_argument("joule_heat: field/mesh mismatch");
  const CoefficientMap media = conducting_media(sigma);
  JouleSource src;
  src.Q.assign(mesh.triangles.size(), 0.0);
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    const auto& t = mesh.triangles[e];
    if (!media.has(t.region)) continue;
    const auto g = element_gradient(mesh, t, field.V);
    src.Q[e] = media[t.region] * (g[0] * g[0] + g[1] * g[1]);
    const double p = src.Q[e] * revolved_volume(mesh, t);
    src.region_power[static_cast<int>(t.region)] += p;
    src.total_power += p;
  }
  return src;
}

/// Power delivered through the electrode surface, from the discrete current
/// leaving the electrode nodes: sum_i V_i (K V)_i over the driven nodes.
inline double electrode_power(const Mesh& mesh, const PotentialField& field, const CoefficientMap& sigma) {
  const SparseMatrix K = assemble_stiffness(mesh, conducting_media(sigma));
  const auto current = K * std::span<const double>(field.V);
  double p = 0.0;
  for (int i : nodes_with_tag(mesh, BoundaryTag::ElectrodeSurface)) p += field.V[i] * current[i];
  return p;
}

}  // namespace rfa
