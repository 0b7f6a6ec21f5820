#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "rfa/detail/delaunay.hpp"
#include "rfa/mesh.hpp"

namespace rfa {

/// Cylindrical ablation model. All lengths in metres.
///
/// The r-z cross-section has z pointing down from the top of the model: blood
/// fills [0, blood_depth/2), the muscle slab spans the next tissue_thickness,
/// and blood fills the rest. The electrode is a cylinder capped by a
/// hemisphere of radius electrode_radius, on the axis, with the cap apex
/// insertion_depth below the muscle surface.
struct ModelGeometry {
  double electrode_length = 5.0e-3;
  double electrode_radius = 1.3e-3;
  double insertion_depth = 1.3e-3;
  double tissue_thickness = 8.0e-3;
  double tissue_radius = 20.0e-3;
  double blood_depth = 32.0e-3;
  double model_depth = 40.0e-3;

  [[nodiscard]] double muscle_top() const { return 0.5 * blood_depth; }
  [[nodiscard]] double muscle_bottom() const { return muscle_top() + tissue_thickness; }
  [[nodiscard]] double tip_apex() const { return muscle_top() + insertion_depth; }
  /// Centre of the hemispherical tip; snapped to the muscle surface when they coincide.
  [[nodiscard]] double cap_center() const {
    const double zc = tip_apex() - electrode_radius;
    return std::abs(zc - muscle_top()) <= 1e-12 * model_depth ? muscle_top() : zc;
  }
  [[nodiscard]] double electrode_top() const { return tip_apex() - electrode_length; }

  /// Axis point at the given depth below the muscle surface.
  [[nodiscard]] Point axis_point_at_depth(double depth) const { return {0.0, muscle_top() + depth}; }

  /// Volume of the electrode below the muscle surface.
  [[nodiscard]] double embedded_electrode_volume() const {
    const double a = electrode_radius;
    const double cylinder = std::numbers::pi * a * a * (insertion_depth - a);
    return cylinder + 2.0 / 3.0 * std::numbers::pi * a * a * a;
  }
  [[nodiscard]] double electrode_volume() const {
    const double a = electrode_radius;
    return std::numbers::pi * a * a * (electrode_length - a) + 2.0 / 3.0 * std::numbers::pi * a * a * a;
  }
  [[nodiscard]] double model_volume() const {
    return std::numbers::pi * tissue_radius * tissue_radius * model_depth;
  }

  /// Distance from p to the electrode body (zero inside).
  [[nodiscard]] double distance_to_electrode(const Point& p) const {
    const double a = electrode_radius, zc = cap_center();
    if (p.z > zc) return std::max(0.0, std::hypot(p.r, p.z - zc) - a);
    const double dr = std::max(0.0, p.r - a);
    const double dz = std::max(0.0, electrode_top() - p.z);
    return std::hypot(dr, dz);
  }
};

class GeometryError : public MeshError {
 public:
  using MeshError::MeshError;
};

/// Throws GeometryError naming the first violated constraint.
inline void check(const ModelGeometry& g) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw GeometryError("infeasible geometry: " + what);
  };
  need(g.electrode_length > 0, "electrode_length must be > 0");
  need(g.electrode_radius > 0, "electrode_radius must be > 0");
  need(g.insertion_depth > 0, "insertion_depth must be > 0");
  need(g.tissue_thickness > 0, "tissue_thickness must be > 0");
  need(g.tissue_radius > 0, "tissue_radius must be > 0");
  need(g.blood_depth > 0, "blood_depth must be > 0");
  need(g.model_depth > 0, "model_depth must be > 0");
  need(g.insertion_depth < g.tissue_thickness, "insertion_depth < tissue_thickness");
  need(g.electrode_length > g.insertion_depth, "electrode_length > insertion_depth");
  need(std::abs(g.tissue_thickness + g.blood_depth - g.model_depth) <= 1e-12 * g.model_depth,
       "tissue_thickness + blood_depth == model_depth");
  need(g.electrode_radius < g.tissue_radius, "electrode_radius < tissue_radius");
  need(g.insertion_depth >= g.electrode_radius, "insertion_depth >= electrode_radius (tip cap fully embedded)");
  need(g.electrode_length >= g.electrode_radius, "electrode_length >= electrode_radius (room for the tip cap)");
  need(g.electrode_top() > 0, "electrode must end below the top of the model");
}

struct MeshGrading {
  /// Edge length grows by this much per metre of distance from the electrode.
  double growth = 0.22;
  /// Largest edge length as a multiple of the target edge length.
  double max_factor = 9.0;
  double min_angle_deg = 26.0;
};

/// Target edge length at the electrode that lands the default geometry near 2.9k nodes.
inline constexpr double kDefaultEdgeLength = 0.135e-3;

namespace detail {

inline Pslg model_pslg(const ModelGeometry& g, double h) {
  constexpr auto bit = [](BoundaryTag t) { return static_cast<std::uint8_t>(1u << static_cast<int>(t)); };
  const std::uint8_t axis = bit(BoundaryTag::Axis);
  const std::uint8_t outer = bit(BoundaryTag::OuterGroundAndThermal);
  const std::uint8_t electrode = bit(BoundaryTag::ElectrodeSurface);
  const std::uint8_t electrode_blood = electrode | bit(BoundaryTag::ElectrodeBloodInterface);
  const std::uint8_t muscle_blood = bit(BoundaryTag::MuscleBloodInterface);

  const double R = g.tissue_radius, D = g.model_depth, a = g.electrode_radius;
  const double zt = g.muscle_top(), zb = g.muscle_bottom();
  const double ztop = g.electrode_top(), zc = g.cap_center(), zapex = g.tip_apex();

  Pslg p;
  p.r_min = 0;
  p.r_max = R;
  p.z_min = 0;
  p.z_max = D;
  auto pt = [&](double r, double z) {
    p.points.push_back({r, z});
    return static_cast<int>(p.points.size()) - 1;
  };
  auto seg = [&](int u, int v, std::uint8_t tags, int arc = -1) { p.segments.push_back({u, v, tags, arc}); };

  const int c00 = pt(0, 0), cR0 = pt(R, 0), cRD = pt(R, D), c0D = pt(0, D);
  const int e_top_axis = pt(0, ztop), e_top_rim = pt(a, ztop);
  const int e_surface = pt(a, zt);
  const int e_cap_start = (zc > zt) ? pt(a, zc) : e_surface;
  const int apex = pt(0, zapex);
  const int m_bottom_axis = pt(0, zb);
  const int m_top_outer = pt(R, zt), m_bottom_outer = pt(R, zb);

  // outer box
  seg(c00, cR0, outer);
  seg(cR0, m_top_outer, outer);
  seg(m_top_outer, m_bottom_outer, outer);
  seg(m_bottom_outer, cRD, outer);
  seg(c0D, cRD, outer);
  seg(c00, e_top_axis, axis);
  seg(e_top_axis, apex, axis);
  seg(apex, m_bottom_axis, axis);
  seg(m_bottom_axis, c0D, axis);
  // muscle slab faces
  seg(e_surface, m_top_outer, muscle_blood);
  seg(m_bottom_axis, m_bottom_outer, muscle_blood);
  // electrode
  seg(e_top_axis, e_top_rim, electrode_blood);
  seg(e_top_rim, e_surface, electrode_blood);
  if (e_cap_start != e_surface) seg(e_surface, e_cap_start, electrode);

  p.arcs.push_back({{0.0, zc}, a});
  const double arc_len = 0.5 * std::numbers::pi * a;
  const int pieces = std::max(2, static_cast<int>(std::ceil(arc_len / h)));
  int prev = e_cap_start;
  for (int k = 1; k < pieces; ++k) {
    const double theta = 0.5 * std::numbers::pi * k / pieces;  // 0 at the rim, pi/2 at the apex
    const int cur = pt(a * std::cos(theta), zc + a * std::sin(theta));
    seg(prev, cur, electrode, 0);
    prev = cur;
  }
  seg(prev, apex, electrode, 0);

  p.seeds.push_back({{0.5 * a, 0.5 * (ztop + zc)}, Region::Electrode});
  p.seeds.push_back({{0.5 * (a + R), 0.5 * (zt + zb)}, Region::Muscle});
  p.seeds.push_back({{0.5 * R, 0.5 * zt}, Region::Blood});
  p.seeds.push_back({{0.5 * R, 0.5 * (zb + D)}, Region::Blood});
  return p;
}

}  // namespace detail

/// Triangulates the model cross-section with edges of about target_edge_length
/// at the electrode, growing with distance from it.
inline Mesh build_geometry(const ModelGeometry& params, double target_edge_length = kDefaultEdgeLength,
                           const MeshGrading& grading = {}) {
  check(params);
  const double smallest_feature = std::min({params.electrode_radius, params.insertion_depth,
                                            params.tissue_thickness - params.insertion_depth,
                                            params.electrode_top()});
  if (!(target_edge_length > 0) || target_edge_length >= smallest_feature)
    throw GeometryError("meshing failure: target_edge_length must be positive and below the smallest feature (" +
                        std::to_string(smallest_feature) + " m)");
  const double h = target_edge_length;
  detail::RefineOptions opt;
  opt.min_angle_deg = grading.min_angle_deg;
  opt.size = [&params, h, grading](const Point& p) {
    return std::min(h * grading.max_factor, h + grading.growth * params.distance_to_electrode(p));
  };
  detail::ConformingMesher mesher(detail::model_pslg(params, h), opt);
  Mesh m = mesher.run();
  validate(m);
  return m;
}

}  // namespace rfa
