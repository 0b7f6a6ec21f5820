#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfa/fem.hpp"
#include "rfa/mesh.hpp"

namespace rfa {

struct LesionSize {
  double area = 0.0;    // m^2, r-z cross-section
  double volume = 0.0;  // m^3, revolved
};

namespace detail {

/// Sub-polygon of a triangle where the linear interpolant is >= threshold.
inline std::vector<Point> clip_above(const std::array<Point, 3>& p, const std::array<double, 3>& T, double threshold) {
  std::vector<Point> poly;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const bool in_i = T[i] >= threshold, in_j = T[j] >= threshold;
    if (in_i) poly.push_back(p[i]);
    if (in_i != in_j) {
      const double s = (threshold - T[i]) / (T[j] - T[i]);
      poly.push_back({p[i].r + s * (p[j].r - p[i].r), p[i].z + s * (p[j].z - p[i].z)});
    }
  }
  return poly;
}

/// Area and integral of r dA over a simple polygon (orientation-independent).
inline std::pair<double, double> polygon_moments(std::span<const Point> poly) {
  double area2 = 0.0, r_moment6 = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % poly.size()];
    const double cross = a.r * b.z - b.r * a.z;
    area2 += cross;
    r_moment6 += (a.r + b.r) * cross;
  }
  const double sign = area2 < 0 ? -1.0 : 1.0;
  return {sign * area2 / 2.0, sign * r_moment6 / 6.0};
}

}  // namespace detail

/// Extent of the region T >= threshold inside the muscle, computed exactly
/// for the piecewise-linear field.
inline LesionSize lesion_metrics(const Mesh& mesh, std::span<const double> T, double threshold) {
  LesionSize out;
  for (const auto& t : mesh.triangles) {
    if (t.region != Region::Muscle) continue;
    const std::array<double, 3> v{T[t.v[0]], T[t.v[1]], T[t.v[2]]};
    if (v[0] < threshold && v[1] < threshold && v[2] < threshold) continue;
    const std::array<Point, 3> p{mesh.nodes[t.v[0]], mesh.nodes[t.v[1]], mesh.nodes[t.v[2]]};
    const auto poly = detail::clip_above(p, v, threshold);
    if (poly.size() < 3) continue;
    const auto [area, r_moment] = detail::polygon_moments(poly);
    out.area += area;
    out.volume += 2.0 * std::numbers::pi * r_moment;
  }
  return out;
}

struct MaxTemperature {
  double value = 0.0;
  int node = -1;
  Point location;
};

/// Nodal maximum; ties go to the lowest node index.
inline MaxTemperature max_temperature(const Mesh& mesh, std::span<const double> T) {
  MaxTemperature m;
  m.value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    if (T[i] > m.value) {
      m.value = T[i];
      m.node = static_cast<int>(i);
    }
  if (m.node >= 0) m.location = mesh.nodes[m.node];
  return m;
}

class ProbeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// P1 interpolation weights of a fixed point, located once.
class Probe {
 public:
  Probe(const Mesh& mesh, Point at) : at_(at) {
    const double scale = [&] {
      double s = 0.0;
      for (const auto& p : mesh.nodes) s = std::max({s, p.r, std::abs(p.z)});
      return s;
    }();
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
      if (mesh.nodes[i] == at) {
        nodes_ = {static_cast<int>(i), static_cast<int>(i), static_cast<int>(i)};
        weights_ = {1.0, 0.0, 0.0};
        return;
      }
    const double eps = 1e-12 * scale * scale;
    for (const auto& t : mesh.triangles) {
      const Point& a = mesh.nodes[t.v[0]];
      const Point& b = mesh.nodes[t.v[1]];
      const Point& c = mesh.nodes[t.v[2]];
      const double area = signed_area(a, b, c);
      const double wa = signed_area(at, b, c), wb = signed_area(a, at, c), wc = signed_area(a, b, at);
      if (wa >= -eps && wb >= -eps && wc >= -eps) {
        nodes_ = t.v;
        weights_ = {wa / area, wb / area, wc / area};
        return;
      }
    }
    throw ProbeError("probe point (" + std::to_string(at.r) + ", " + std::to_string(at.z) + ") is outside the mesh");
  }

  [[nodiscard]] double operator()(std::span<const double> T) const {
    if (weights_[1] == 0.0 && weights_[2] == 0.0 && nodes_[0] == nodes_[1]) return T[nodes_[0]];
    return weights_[0] * T[nodes_[0]] + weights_[1] * T[nodes_[1]] + weights_[2] * T[nodes_[2]];
  }
  [[nodiscard]] Point location() const { return at_; }

 private:
  Point at_;
  std::array<int, 3> nodes_{};
  std::array<double, 3> weights_{};
};

inline double probe(const Mesh& mesh, std::span<const double> T, Point at) { return Probe(mesh, at)(T); }

/// Stored heat relative to T_ref, per region: sum over elements of rho c * int (T - T_ref) dV.
/// Regions without a rho_c entry report zero.
inline std::array<double, kRegionCount> region_energy(const Mesh& mesh, const DofMap& dofs, std::span<const double> T,
                                                      const CoefficientMap& rho_c, double T_ref = 37.0) {
  std::array<double, kRegionCount> e{};
  for (const auto& t : mesh.triangles) {
    if (!rho_c.has(t.region)) continue;
    const auto w = element_load(mesh.nodes[t.v[0]], mesh.nodes[t.v[1]], mesh.nodes[t.v[2]]);
    const auto d = dofs.dofs(t);
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += w[i] * (T[d[i]] - T_ref);
    e[static_cast<int>(t.region)] += rho_c[t.region] * s;
  }
  return e;
}

inline std::array<double, kRegionCount> region_energy(const Mesh& mesh, std::span<const double> T,
                                                      const CoefficientMap& rho_c, double T_ref = 37.0) {
  return region_energy(mesh, DofMap::nodal(mesh), T, rho_c, T_ref);
}

// ---------------------------------------------------------------------------
// Time series

struct TimeSeriesRecord {
  double t = 0.0;
  double lesion_area = 0.0;    // m^2
  double lesion_volume = 0.0;  // m^3
  double T_max = 0.0;
  Point T_max_location;
  std::vector<double> probe_T;
  std::array<double, kRegionCount> E_stored{};
  std::array<double, kRegionCount> E_joule{};  // cumulative
};

struct Crossing {
  double time = 0.0;
  int sign_changes = 0;
};

/// First sign change of a - b at or after t_min, linearly interpolated
/// between samples. Exact zeros do not count as a change of sign.
inline std::optional<Crossing> first_crossing(std::span<const double> t, std::span<const double> a,
                                              std::span<const double> b, double t_min) {
  std::optional<Crossing> out;
  int prev_sign = 0;
  double prev_t = 0.0, prev_d = 0.0;
  int changes = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_min) continue;
    const double d = a[i] - b[i];
    const int s = (d > 0) - (d < 0);
    if (s == 0) continue;
    if (prev_sign != 0 && s != prev_sign) {
      ++changes;
      if (!out) out = Crossing{prev_t + (t[i] - prev_t) * prev_d / (prev_d - d), 0};
    }
    prev_sign = s;
    prev_t = t[i];
    prev_d = d;
  }
  if (out) out->sign_changes = changes;
  return out;
}

inline int sign_changes(std::span<const double> t, std::span<const double> a, std::span<const double> b,
                        double t_min) {
  const auto c = first_crossing(t, a, b, t_min);
  return c ? c->sign_changes : 0;
}

struct ComparisonOptions {
  double crossover_after = 5.0;  // s
  double ratio_after = 30.0;     // s
};

struct ComparisonSeries {
  std::vector<double> t;
  std::vector<double> volume_be, volume_hbe;
  std::vector<double> T_max_be, T_max_hbe;
  /// |V_BE - V_HBE| / V_BE; NaN where V_BE == 0.
  std::vector<double> difference_ratio;
  std::optional<double> crossover_time;  // lesion volume
  int crossover_count = 0;
  std::optional<double> T_max_crossover_time;
  int T_max_crossover_count = 0;
  double peak_ratio = 0.0;
  double t_peak = std::numeric_limits<double>::quiet_NaN();
};

inline ComparisonSeries compare_series(std::span<const TimeSeriesRecord> be, std::span<const TimeSeriesRecord> hbe,
                                       ComparisonOptions opt = {}) {
  if (be.size() != hbe.size()) throw std::invalid_argument("compare_series: series lengths differ");
  ComparisonSeries c;
  for (std::size_t i = 0; i < be.size(); ++i) {
    if (std::abs(be[i].t - hbe[i].t) > 1e-9 * std::max(1.0, std::abs(be[i].t)))
      throw std::invalid_argument("compare_series: time grids differ at sample " + std::to_string(i));
    c.t.push_back(be[i].t);
    c.volume_be.push_back(be[i].lesion_volume);
    c.volume_hbe.push_back(hbe[i].lesion_volume);
    c.T_max_be.push_back(be[i].T_max);
    c.T_max_hbe.push_back(hbe[i].T_max);
    const double vb = be[i].lesion_volume;
    const double ratio =
        vb > 0.0 ? std::abs(vb - hbe[i].lesion_volume) / vb : std::numeric_limits<double>::quiet_NaN();
    c.difference_ratio.push_back(ratio);
    if (c.t.back() >= opt.ratio_after && vb > 0.0 && ratio > c.peak_ratio) {
      c.peak_ratio = ratio;
      c.t_peak = c.t.back();
    }
  }
  if (auto x = first_crossing(c.t, c.volume_be, c.volume_hbe, opt.crossover_after)) {
    c.crossover_time = x->time;
    c.crossover_count = x->sign_changes;
  }
  if (auto x = first_crossing(c.t, c.T_max_be, c.T_max_hbe, opt.crossover_after)) {
    c.T_max_crossover_time = x->time;
    c.T_max_crossover_count = x->sign_changes;
  }
  return c;
}

}  // namespace rfa
