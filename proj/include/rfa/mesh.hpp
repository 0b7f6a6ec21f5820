#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rfa {

enum class Region : std::uint8_t { Electrode = 0, Muscle = 1, Blood = 2 };
inline constexpr int kRegionCount = 3;

enum class BoundaryTag : std::uint8_t {
  Axis = 0,
  OuterGroundAndThermal = 1,
  ElectrodeSurface = 2,
  ElectrodeBloodInterface = 3,
  MuscleBloodInterface = 4,
};
inline constexpr int kBoundaryTagCount = 5;

inline std::string_view to_string(Region r) {
  switch (r) {
    case Region::Electrode: return "Electrode";
    case Region::Muscle: return "Muscle";
    case Region::Blood: return "Blood";
  }
  return "?";
}

inline std::string_view to_string(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::Axis: return "Axis";
    case BoundaryTag::OuterGroundAndThermal: return "OuterGroundAndThermal";
    case BoundaryTag::ElectrodeSurface: return "ElectrodeSurface";
    case BoundaryTag::ElectrodeBloodInterface: return "ElectrodeBloodInterface";
    case BoundaryTag::MuscleBloodInterface: return "MuscleBloodInterface";
  }
  return "?";
}

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point of the r-z half-plane. z grows downward from the top of the model.
struct Point {
  double r = 0.0;
  double z = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Triangle {
  std::array<int, 3> v{};
  Region region = Region::Muscle;
};

struct BoundaryEdge {
  std::array<int, 2> v{};
  BoundaryTag tag = BoundaryTag::Axis;
  /// Index into Mesh::arcs when the edge approximates a curved boundary, else -1.
  int arc = -1;
};

/// Circular boundary piece; edges referencing it are chords of this circle.
struct Arc {
  Point center;
  double radius = 0.0;
};

struct Mesh {
  std::vector<Point> nodes;
  std::vector<Triangle> triangles;
  std::vector<BoundaryEdge> edges;
  std::vector<Arc> arcs;

  [[nodiscard]] std::size_t node_count() const { return nodes.size(); }
  [[nodiscard]] std::size_t triangle_count() const { return triangles.size(); }
};

// ---------------------------------------------------------------------------
// Element geometry

inline double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.r - a.r) * (c.z - a.z) - (c.r - a.r) * (b.z - a.z));
}

inline double signed_area(const Mesh& m, const Triangle& t) {
  return signed_area(m.nodes[t.v[0]], m.nodes[t.v[1]], m.nodes[t.v[2]]);
}

/// Volume swept by revolving the triangle about the axis: 2*pi*area*mean(r).
/// Exact because r is linear over the element.
inline double revolved_volume(const Point& a, const Point& b, const Point& c) {
  const double mean_r = (a.r + b.r + c.r) / 3.0;
  return 2.0 * std::numbers::pi * std::abs(signed_area(a, b, c)) * mean_r;
}

inline double revolved_volume(const Mesh& m, const Triangle& t) {
  return revolved_volume(m.nodes[t.v[0]], m.nodes[t.v[1]], m.nodes[t.v[2]]);
}

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.r - b.r, a.z - b.z);
}

inline std::array<double, kRegionCount> region_volumes(const Mesh& m) {
  std::array<double, kRegionCount> vol{};
  for (const auto& t : m.triangles) vol[static_cast<int>(t.region)] += revolved_volume(m, t);
  return vol;
}

/// Nodes carrying at least one edge with the given tag, ascending.
inline std::vector<int> nodes_with_tag(const Mesh& m, BoundaryTag tag) {
  std::vector<char> on(m.nodes.size(), 0);
  for (const auto& e : m.edges)
    if (e.tag == tag) on[e.v[0]] = on[e.v[1]] = 1;
  std::vector<int> out;
  for (std::size_t i = 0; i < on.size(); ++i)
    if (on[i]) out.push_back(static_cast<int>(i));
  return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

/// Undirected edge -> list of (triangle index).
inline std::map<std::uint64_t, std::vector<int>> edge_triangles(const Mesh& m) {
  std::map<std::uint64_t, std::vector<int>> out;
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& v = m.triangles[t].v;
    for (int k = 0; k < 3; ++k) out[edge_key(v[k], v[(k + 1) % 3])].push_back(static_cast<int>(t));
  }
  return out;
}

}  // namespace detail

/// Checks every structural invariant of a Mesh; throws MeshError naming the first violation.
inline void validate(const Mesh& m) {
  const int n = static_cast<int>(m.nodes.size());
  if (n < 3 || m.triangles.empty()) throw MeshError("mesh: empty");
  for (int i = 0; i < n; ++i) {
    const auto& p = m.nodes[i];
    if (!std::isfinite(p.r) || !std::isfinite(p.z)) throw MeshError("mesh: non-finite node " + std::to_string(i));
    if (p.r < 0.0) throw MeshError("mesh: node " + std::to_string(i) + " has r < 0");
  }
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    for (int k : tri.v)
      if (k < 0 || k >= n) throw MeshError("mesh: triangle " + std::to_string(t) + " references bad node");
    if (!(signed_area(m, tri) > 0.0))
      throw MeshError("mesh: triangle " + std::to_string(t) + " has non-positive signed area");
  }
  const auto et = detail::edge_triangles(m);
  for (const auto& [key, tris] : et)
    if (tris.size() > 2) throw MeshError("mesh: non-manifold edge");

  std::vector<char> used(n, 0);
  for (const auto& t : m.triangles)
    for (int k : t.v) used[k] = 1;
  for (int i = 0; i < n; ++i)
    if (!used[i]) throw MeshError("mesh: orphan node " + std::to_string(i));

  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    const auto& be = m.edges[e];
    const auto it = et.find(detail::edge_key(be.v[0], be.v[1]));
    if (it == et.end())
      throw MeshError("mesh: boundary edge " + std::to_string(e) + " is not a triangle edge");
    if (be.arc >= static_cast<int>(m.arcs.size())) throw MeshError("mesh: edge references missing arc");
    const auto& tris = it->second;
    auto region_of = [&](int i) { return m.triangles[tris[i]].region; };
    switch (be.tag) {
      case BoundaryTag::Axis:
        if (m.nodes[be.v[0]].r != 0.0 || m.nodes[be.v[1]].r != 0.0)
          throw MeshError("mesh: Axis edge " + std::to_string(e) + " off the axis");
        [[fallthrough]];
      case BoundaryTag::OuterGroundAndThermal:
        if (tris.size() != 1) throw MeshError("mesh: exterior edge " + std::to_string(e) + " is interior");
        break;
      case BoundaryTag::ElectrodeSurface: {
        if (tris.size() == 1) break;  // exterior electrode face on synthetic meshes
        const bool a = region_of(0) == Region::Electrode, b = region_of(1) == Region::Electrode;
        if (a == b) throw MeshError("mesh: ElectrodeSurface edge " + std::to_string(e) + " does not bound the electrode");
        break;
      }
      case BoundaryTag::ElectrodeBloodInterface:
      case BoundaryTag::MuscleBloodInterface: {
        if (tris.size() == 1) break;  // exterior film on synthetic meshes
        const Region want = be.tag == BoundaryTag::ElectrodeBloodInterface ? Region::Electrode : Region::Muscle;
        const Region x = region_of(0), y = region_of(1);
        const bool ok = (x == want && y == Region::Blood) || (y == want && x == Region::Blood);
        if (!ok) throw MeshError("mesh: interface edge " + std::to_string(e) + " between wrong regions");
        break;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Quality

struct QualityReport {
  double min_angle_deg = 0.0;
  double max_aspect_ratio = 0.0;
  std::size_t node_count = 0;
  std::size_t triangle_count = 0;
  std::array<double, kRegionCount> region_volume{};
  [[nodiscard]] double total_volume() const {
    return region_volume[0] + region_volume[1] + region_volume[2];
  }
};

inline QualityReport mesh_quality(const Mesh& m) {
  QualityReport q;
  q.node_count = m.nodes.size();
  q.triangle_count = m.triangles.size();
  q.min_angle_deg = 180.0;
  for (const auto& t : m.triangles) {
    const Point& a = m.nodes[t.v[0]];
    const Point& b = m.nodes[t.v[1]];
    const Point& c = m.nodes[t.v[2]];
    const std::array<double, 3> len{distance(b, c), distance(c, a), distance(a, b)};
    for (int k = 0; k < 3; ++k) {
      const double opp = len[k], s1 = len[(k + 1) % 3], s2 = len[(k + 2) % 3];
      const double cosv = std::clamp((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2), -1.0, 1.0);
      q.min_angle_deg = std::min(q.min_angle_deg, std::acos(cosv) * 180.0 / std::numbers::pi);
    }
    // longest edge over the altitude onto it, normalised so an equilateral triangle scores 1
    const double area = std::abs(signed_area(a, b, c));
    const double longest = std::max({len[0], len[1], len[2]});
    const double aspect = longest * longest / (2.0 * area) * (std::sqrt(3.0) / 2.0);
    q.max_aspect_ratio = std::max(q.max_aspect_ratio, aspect);
    q.region_volume[static_cast<int>(t.region)] += revolved_volume(m, t);
  }
  return q;
}

// ---------------------------------------------------------------------------
// Uniform refinement

inline Point project_to_arc(const Arc& arc, const Point& p) {
  const double dr = p.r - arc.center.r, dz = p.z - arc.center.z;
  const double len = std::hypot(dr, dz);
  if (len == 0.0) return p;
  Point q{arc.center.r + arc.radius * dr / len, arc.center.z + arc.radius * dz / len};
  if (q.r < 0.0) q.r = 0.0;
  return q;
}

/// Splits every triangle into four through its edge midpoints. Midpoints of edges
/// lying on an arc are moved onto the arc.
inline Mesh refine(const Mesh& m) {
  validate(m);
  Mesh out;
  out.arcs = m.arcs;
  out.nodes = m.nodes;
  std::map<std::uint64_t, int> midpoint;
  std::map<std::uint64_t, int> edge_arc;
  for (const auto& e : m.edges)
    if (e.arc >= 0) edge_arc[detail::edge_key(e.v[0], e.v[1])] = e.arc;

  auto mid = [&](int a, int b) {
    const auto key = detail::edge_key(a, b);
    if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
    const Point& pa = m.nodes[a];
    const Point& pb = m.nodes[b];
    Point p{0.5 * (pa.r + pb.r), 0.5 * (pa.z + pb.z)};
    if (pa.r == 0.0 && pb.r == 0.0) p.r = 0.0;
    if (auto it = edge_arc.find(key); it != edge_arc.end()) p = project_to_arc(m.arcs[it->second], p);
    const int idx = static_cast<int>(out.nodes.size());
    out.nodes.push_back(p);
    midpoint.emplace(key, idx);
    return idx;
  };

  out.triangles.reserve(4 * m.triangles.size());
  for (const auto& t : m.triangles) {
    const int a = t.v[0], b = t.v[1], c = t.v[2];
    const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
    out.triangles.push_back({{a, ab, ca}, t.region});
    out.triangles.push_back({{ab, b, bc}, t.region});
    out.triangles.push_back({{ca, bc, c}, t.region});
    out.triangles.push_back({{ab, bc, ca}, t.region});
  }
  out.edges.reserve(2 * m.edges.size());
  for (const auto& e : m.edges) {
    const int c = mid(e.v[0], e.v[1]);
    out.edges.push_back({{e.v[0], c}, e.tag, e.arc});
    out.edges.push_back({{c, e.v[1]}, e.tag, e.arc});
  }
  validate(out);
  return out;
}

// ---------------------------------------------------------------------------
// Structured rectangle meshes (synthetic benchmarks)

/// Side tags for rect_mesh; an empty optional leaves that side untagged (natural condition).
struct RectSides {
  std::optional<BoundaryTag> r_min, r_max, z_min, z_max;
};

/// Structured mesh of [r0,r1]x[z0,z1] with every cell split along alternating
/// diagonals. `r_ratio` > 1 grades the radial spacing geometrically.
inline Mesh rect_mesh(double r0, double r1, double z0, double z1, int nr, int nz,
                      Region region = Region::Muscle, RectSides sides = {}, double r_ratio = 1.0) {
  if (!(r1 > r0) || !(z1 > z0) || r0 < 0.0 || nr < 1 || nz < 1 || !(r_ratio > 0.0))
    throw MeshError("rect_mesh: invalid extents or resolution");
  Mesh m;
  std::vector<double> rs(nr + 1);
  if (r_ratio == 1.0) {
    for (int i = 0; i <= nr; ++i) rs[i] = r0 + (r1 - r0) * i / nr;
  } else {
    for (int i = 0; i <= nr; ++i) rs[i] = r0 * std::pow(r_ratio, static_cast<double>(i) / nr);
  }
  rs.front() = r0;
  rs.back() = r1;
  auto id = [&](int i, int j) { return j * (nr + 1) + i; };
  for (int j = 0; j <= nz; ++j)
    for (int i = 0; i <= nr; ++i) m.nodes.push_back({rs[i], z0 + (z1 - z0) * j / nz});
  for (int j = 0; j < nz; ++j) {
    for (int i = 0; i < nr; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if ((i + j) % 2 == 0) {
        m.triangles.push_back({{a, b, c}, region});
        m.triangles.push_back({{a, c, d}, region});
      } else {
        m.triangles.push_back({{a, b, d}, region});
        m.triangles.push_back({{b, c, d}, region});
      }
    }
  }
  auto add_side = [&](std::optional<BoundaryTag> tag, auto&& endpoints, int count) {
    if (!tag) return;
    for (int k = 0; k < count; ++k) {
      const auto [a, b] = endpoints(k);
      m.edges.push_back({{a, b}, *tag, -1});
    }
  };
  add_side(sides.z_min, [&](int i) { return std::pair{id(i, 0), id(i + 1, 0)}; }, nr);
  add_side(sides.z_max, [&](int i) { return std::pair{id(i, nz), id(i + 1, nz)}; }, nr);
  add_side(sides.r_min, [&](int j) { return std::pair{id(0, j), id(0, j + 1)}; }, nz);
  add_side(sides.r_max, [&](int j) { return std::pair{id(nr, j), id(nr, j + 1)}; }, nz);
  return m;
}

// ---------------------------------------------------------------------------
// Plain-text mesh files
//
//   rfa-mesh <nodes> <triangles> <edges> <arcs>
//   arc <index> <center_r> <center_z> <radius>            (one per arc)
//   <index> <r> <z>                                       (nodes)
//   <index> <n1> <n2> <n3> <region>                       (triangles)
//   <index> <n1> <n2> <tag> [arc]                         (boundary edges)

inline void write_mesh(std::ostream& os, const Mesh& m) {
  os << "rfa-mesh " << m.nodes.size() << ' ' << m.triangles.size() << ' ' << m.edges.size() << ' '
     << m.arcs.size() << '\n';
  os << std::setprecision(17);
  for (std::size_t i = 0; i < m.arcs.size(); ++i)
    os << "arc " << i << ' ' << m.arcs[i].center.r << ' ' << m.arcs[i].center.z << ' ' << m.arcs[i].radius
       << '\n';
  for (std::size_t i = 0; i < m.nodes.size(); ++i) os << i << ' ' << m.nodes[i].r << ' ' << m.nodes[i].z << '\n';
  for (std::size_t i = 0; i < m.triangles.size(); ++i) {
    const auto& t = m.triangles[i];
    os << i << ' ' << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << to_string(t.region) << '\n';
  }
  for (std::size_t i = 0; i < m.edges.size(); ++i) {
    const auto& e = m.edges[i];
    os << i << ' ' << e.v[0] << ' ' << e.v[1] << ' ' << to_string(e.tag);
    if (e.arc >= 0) os << ' ' << e.arc;
    os << '\n';
  }
}

inline Mesh read_mesh(std::istream& is) {
  auto fail = [](std::size_t line, const std::string& what) {
    throw MeshError("mesh file line " + std::to_string(line) + ": " + what);
  };
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> std::istringstream {
    if (!std::getline(is, line)) fail(lineno + 1, "unexpected end of file");
    ++lineno;
    return std::istringstream(line);
  };
  Mesh m;
  std::size_t nn = 0, nt = 0, ne = 0, na = 0;
  {
    auto ss = next();
    std::string magic;
    if (!(ss >> magic >> nn >> nt >> ne >> na) || magic != "rfa-mesh") fail(lineno, "bad header");
  }
  for (std::size_t i = 0; i < na; ++i) {
    auto ss = next();
    std::string word;
    std::size_t idx = 0;
    Arc a;
    if (!(ss >> word >> idx >> a.center.r >> a.center.z >> a.radius) || word != "arc" || idx != i)
      fail(lineno, "bad arc record");
    m.arcs.push_back(a);
  }
  for (std::size_t i = 0; i < nn; ++i) {
    auto ss = next();
    std::size_t idx = 0;
    Point p;
    if (!(ss >> idx >> p.r >> p.z) || idx != i) fail(lineno, "bad node record");
    m.nodes.push_back(p);
  }
  auto parse_region = [&](const std::string& s) {
    for (int k = 0; k < kRegionCount; ++k)
      if (s == to_string(static_cast<Region>(k))) return static_cast<Region>(k);
    fail(lineno, "unknown region '" + s + "'");
    return Region::Muscle;
  };
  auto parse_tag = [&](const std::string& s) {
    for (int k = 0; k < kBoundaryTagCount; ++k)
      if (s == to_string(static_cast<BoundaryTag>(k))) return static_cast<BoundaryTag>(k);
    fail(lineno, "unknown boundary tag '" + s + "'");
    return BoundaryTag::Axis;
  };
  for (std::size_t i = 0; i < nt; ++i) {
    auto ss = next();
    std::size_t idx = 0;
    Triangle t;
    std::string region;
    if (!(ss >> idx >> t.v[0] >> t.v[1] >> t.v[2] >> region) || idx != i) fail(lineno, "bad triangle record");
    t.region = parse_region(region);
    m.triangles.push_back(t);
  }
  for (std::size_t i = 0; i < ne; ++i) {
    auto ss = next();
    std::size_t idx = 0;
    BoundaryEdge e;
    std::string tag;
    if (!(ss >> idx >> e.v[0] >> e.v[1] >> tag) || idx != i) fail(lineno, "bad edge record");
    e.tag = parse_tag(tag);
    if (!(ss >> e.arc)) e.arc = -1;
    m.edges.push_back(e);
  }
  validate(m);
  return m;
}

}  // namespace rfa
