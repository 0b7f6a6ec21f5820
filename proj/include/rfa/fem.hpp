#pragma once

// Axisymmetric P1 finite-element assembly. Every integral carries the
// revolution weight 2*pi*r and is evaluated exactly (r is linear on each
// element, so the integrands are polynomials).

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfa/mesh.hpp"
#include "rfa/sparse.hpp"

namespace rfa {

/// Per-region scalar coefficient. Regions without a value are left out of assembly.
class CoefficientMap {
 public:
  CoefficientMap() = default;
  CoefficientMap(std::initializer_list<std::pair<Region, double>> values) {
    for (const auto& [r, v] : values) set(r, v);
  }
  CoefficientMap& set(Region r, double v) {
    value_[static_cast<int>(r)] = v;
    return *this;
  }
  [[nodiscard]] bool has(Region r) const { return value_[static_cast<int>(r)].has_value(); }
  [[nodiscard]] double operator[](Region r) const { return value_[static_cast<int>(r)].value(); }
  [[nodiscard]] CoefficientMap scaled(double s) const {
    CoefficientMap out = *this;
    for (auto& v : out.value_)
      if (v) *v *= s;
    return out;
  }

 private:
  std::array<std::optional<double>, kRegionCount> value_{};
};

/// Maps (node, region) to an unknown. The nodal map uses the node index for
/// every region; a split map gives blood its own copy of interface nodes.
struct DofMap {
  int count = 0;
  std::vector<int> node_of_dof;
  std::array<std::vector<int>, kRegionCount> dof_of_node;

  [[nodiscard]] int dof(int node, Region r) const { return dof_of_node[static_cast<int>(r)][node]; }
  [[nodiscard]] std::array<int, 3> dofs(const Triangle& t) const {
    return {dof(t.v[0], t.region), dof(t.v[1], t.region), dof(t.v[2], t.region)};
  }

  static DofMap nodal(const Mesh& m) {
    DofMap d;
    d.count = static_cast<int>(m.nodes.size());
    d.node_of_dof.resize(m.nodes.size());
    for (int i = 0; i < d.count; ++i) d.node_of_dof[i] = i;
    for (auto& v : d.dof_of_node) v = d.node_of_dof;
    return d;
  }

  /// Blood sees its own copy of every node on the listed interface tags.
  static DofMap split_blood(const Mesh& m, std::initializer_list<BoundaryTag> interfaces) {
    DofMap d = nodal(m);
    std::vector<char> on(m.nodes.size(), 0);
    for (const auto& e : m.edges)
      for (auto tag : interfaces)
        if (e.tag == tag) on[e.v[0]] = on[e.v[1]] = 1;
    auto& blood = d.dof_of_node[static_cast<int>(Region::Blood)];
    for (std::size_t i = 0; i < on.size(); ++i) {
      if (!on[i]) continue;
      blood[i] = d.count++;
      d.node_of_dof.push_back(static_cast<int>(i));
    }
    return d;
  }
};

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Element kernels

using ElementMatrix = std::array<std::array<double, 3>, 3>;

namespace detail {

struct P1Geometry {
  double area;                    // signed
  std::array<double, 3> dphi_dr;  // gradients of the barycentric shape functions
  std::array<double, 3> dphi_dz;
};

inline P1Geometry p1_geometry(const Point& a, const Point& b, const Point& c) {
  P1Geometry g{};
  g.area = signed_area(a, b, c);
  const std::array<Point, 3> p{a, b, c};
  for (int i = 0; i < 3; ++i) {
    const Point& pj = p[(i + 1) % 3];
    const Point& pk = p[(i + 2) % 3];
    g.dphi_dr[i] = (pj.z - pk.z) / (2.0 * g.area);
    g.dphi_dz[i] = (pk.r - pj.r) / (2.0 * g.area);
  }
  return g;
}

}  // namespace detail

/// Integral of grad(phi_i).grad(phi_j) * 2*pi*r over the triangle.
inline ElementMatrix element_stiffness(const Point& a, const Point& b, const Point& c) {
  const auto g = detail::p1_geometry(a, b, c);
  if (!(std::abs(g.area) > 0.0) || !std::isfinite(g.dphi_dr[0])) throw AssemblyError("degenerate triangle");
  const double w = 2.0 * std::numbers::pi * std::abs(g.area) * (a.r + b.r + c.r) / 3.0;
  ElementMatrix k{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k[i][j] = w * (g.dphi_dr[i] * g.dphi_dr[j] + g.dphi_dz[i] * g.dphi_dz[j]);
  return k;
}

/// Integral of phi_i * phi_j * 2*pi*r over the triangle.
inline ElementMatrix element_mass(const Point& a, const Point& b, const Point& c) {
  const double area = std::abs(signed_area(a, b, c));
  if (!(area > 0.0)) throw AssemblyError("degenerate triangle");
  const std::array<double, 3> r{a.r, b.r, c.r};
  // int phi_i phi_j phi_k dA = 2A * (multiplicity factorials) / 5!
  auto triple = [area](int i, int j, int k) {
    if (i == j && j == k) return area / 10.0;
    if (i == j || j == k || i == k) return area / 30.0;
    return area / 60.0;
  };
  ElementMatrix m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += r[k] * triple(i, j, k);
      m[i][j] = 2.0 * std::numbers::pi * s;
    }
  return m;
}

/// Integral of phi_i * 2*pi*r over the triangle.
inline std::array<double, 3> element_load(const Point& a, const Point& b, const Point& c) {
  const double area = std::abs(signed_area(a, b, c));
  const std::array<double, 3> r{a.r, b.r, c.r};
  std::array<double, 3> f{};
  for (int i = 0; i < 3; ++i)
    f[i] = 2.0 * std::numbers::pi * area * (2.0 * r[i] + r[(i + 1) % 3] + r[(i + 2) % 3]) / 12.0;
  return f;
}

/// Edge integrals of phi_i * phi_j * 2*pi*r and phi_i * 2*pi*r.
struct EdgeKernel {
  std::array<std::array<double, 2>, 2> mass;
  std::array<double, 2> load;
};

inline EdgeKernel edge_kernel(const Point& a, const Point& b) {
  const double len = distance(a, b);
  const double tp = 2.0 * std::numbers::pi;
  EdgeKernel k{};
  k.mass[0][0] = tp * len * (3.0 * a.r + b.r) / 12.0;
  k.mass[1][1] = tp * len * (a.r + 3.0 * b.r) / 12.0;
  k.mass[0][1] = k.mass[1][0] = tp * len * (a.r + b.r) / 12.0;
  k.load[0] = tp * len * (2.0 * a.r + b.r) / 6.0;
  k.load[1] = tp * len * (a.r + 2.0 * b.r) / 6.0;
  return k;
}

// ---------------------------------------------------------------------------
// Global assembly

inline SparseMatrix assemble_stiffness(const Mesh& mesh, const CoefficientMap& coeff, const DofMap& dofs) {
  std::vector<Triplet> t;
  t.reserve(9 * mesh.triangles.size());
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    const auto& tri = mesh.triangles[e];
    if (!coeff.has(tri.region)) continue;
    ElementMatrix k;
    try {
      k = element_stiffness(mesh.nodes[tri.v[0]], mesh.nodes[tri.v[1]], mesh.nodes[tri.v[2]]);
    } catch (const AssemblyError&) {
      throw AssemblyError("assemble_stiffness: degenerate triangle " + std::to_string(e));
    }
    const double c = coeff[tri.region];
    const auto d = dofs.dofs(tri);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t.push_back({d[i], d[j], c * k[i][j]});
  }
  return SparseMatrix::from_triplets(dofs.count, std::move(t));
}

inline SparseMatrix assemble_stiffness(const Mesh& mesh, const CoefficientMap& coeff) {
  return assemble_stiffness(mesh, coeff, DofMap::nodal(mesh));
}

/// Consistent mass, or its row-sum lumped diagonal when lumped is set.
inline SparseMatrix assemble_mass(const Mesh& mesh, const CoefficientMap& coeff, bool lumped, const DofMap& dofs) {
  std::vector<Triplet> t;
  t.reserve(9 * mesh.triangles.size());
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    const auto& tri = mesh.triangles[e];
    if (!coeff.has(tri.region)) continue;
    ElementMatrix m;
    try {
      m = element_mass(mesh.nodes[tri.v[0]], mesh.nodes[tri.v[1]], mesh.nodes[tri.v[2]]);
    } catch (const AssemblyError&) {
      throw AssemblyError("assemble_mass: degenerate triangle " + std::to_string(e));
    }
    const double c = coeff[tri.region];
    const auto d = dofs.dofs(tri);
    for (int i = 0; i < 3; ++i) {
      if (lumped) {
        t.push_back({d[i], d[i], c * (m[i][0] + m[i][1] + m[i][2])});
      } else {
        for (int j = 0; j < 3; ++j) t.push_back({d[i], d[j], c * m[i][j]});
      }
    }
  }
  return SparseMatrix::from_triplets(dofs.count, std::move(t));
}

inline SparseMatrix assemble_mass(const Mesh& mesh, const CoefficientMap& coeff, bool lumped = false) {
  return assemble_mass(mesh, coeff, lumped, DofMap::nodal(mesh));
}

struct RobinTerms {
  SparseMatrix matrix;
  std::vector<double> load;
};

/// Film h*(T - T_ref) on edges with the given tag, seen from `side`.
inline RobinTerms assemble_robin(const Mesh& mesh, BoundaryTag tag, double h, double t_ref, const DofMap& dofs,
                                 Region side) {
  if (!(h >= 0.0)) throw std::invalid_argument("assemble_robin: h must be >= 0");
  if (static_cast<int>(tag) < 0 || static_cast<int>(tag) >= kBoundaryTagCount)
    throw std::invalid_argument("assemble_robin: unknown boundary tag");
  RobinTerms out;
  out.load.assign(static_cast<std::size_t>(dofs.count), 0.0);
  std::vector<Triplet> t;
  if (h > 0.0) {
    for (const auto& e : mesh.edges) {
      if (e.tag != tag) continue;
      const auto k = edge_kernel(mesh.nodes[e.v[0]], mesh.nodes[e.v[1]]);
      const std::array<int, 2> d{dofs.dof(e.v[0], side), dofs.dof(e.v[1], side)};
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) t.push_back({d[i], d[j], h * k.mass[i][j]});
        out.load[d[i]] += h * t_ref * k.load[i];
      }
    }
  }
  out.matrix = SparseMatrix::from_triplets(dofs.count, std::move(t));
  return out;
}

inline RobinTerms assemble_robin(const Mesh& mesh, BoundaryTag tag, double h, double t_ref) {
  return assemble_robin(mesh, tag, h, t_ref, DofMap::nodal(mesh), Region::Muscle);
}

/// Two-sided film: flux h*(T_solid - T_blood) across interface edges, where
/// the solid side is `solid` and blood uses its own copy of the nodes.
inline SparseMatrix assemble_contact(const Mesh& mesh, BoundaryTag tag, double h, const DofMap& dofs, Region solid) {
  if (!(h >= 0.0)) throw std::invalid_argument("assemble_contact: h must be >= 0");
  std::vector<Triplet> t;
  if (h > 0.0) {
    for (const auto& e : mesh.edges) {
      if (e.tag != tag) continue;
      const auto k = edge_kernel(mesh.nodes[e.v[0]], mesh.nodes[e.v[1]]);
      const std::array<int, 2> s{dofs.dof(e.v[0], solid), dofs.dof(e.v[1], solid)};
      const std::array<int, 2> b{dofs.dof(e.v[0], Region::Blood), dofs.dof(e.v[1], Region::Blood)};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const double v = h * k.mass[i][j];
          t.push_back({s[i], s[j], v});
          t.push_back({b[i], b[j], v});
          t.push_back({s[i], b[j], -v});
          t.push_back({b[i], s[j], -v});
        }
    }
  }
  return SparseMatrix::from_triplets(dofs.count, std::move(t));
}

/// Load vector of a per-element constant source: F_i = sum_e q_e * int phi_i 2 pi r dA.
inline std::vector<double> assemble_source(const Mesh& mesh, std::span<const double> per_element, const DofMap& dofs) {
  std::vector<double> f(static_cast<std::size_t>(dofs.count), 0.0);
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    if (per_element[e] == 0.0) continue;
    const auto& tri = mesh.triangles[e];
    const auto w = element_load(mesh.nodes[tri.v[0]], mesh.nodes[tri.v[1]], mesh.nodes[tri.v[2]]);
    const auto d = dofs.dofs(tri);
    for (int i = 0; i < 3; ++i) f[d[i]] += per_element[e] * w[i];
  }
  return f;
}

/// Dofs that no element with a coefficient touches.
inline std::vector<char> unused_dofs(const Mesh& mesh, const CoefficientMap& coeff, const DofMap& dofs) {
  std::vector<char> unused(static_cast<std::size_t>(dofs.count), 1);
  for (const auto& tri : mesh.triangles) {
    if (!coeff.has(tri.region)) continue;
    for (int d : dofs.dofs(tri)) unused[d] = 0;
  }
  return unused;
}

}  // namespace rfa
