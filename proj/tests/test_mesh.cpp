#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "rfa/geometry.hpp"
#include "rfa/mesh.hpp"

using namespace rfa;

namespace {

const Mesh& default_mesh() {
  static const Mesh m = build_geometry(ModelGeometry{});
  return m;
}

constexpr double pi = std::numbers::pi;

}  // namespace

TEST(Geometry, DefaultMeshIsValidAndTagged) {
  const Mesh& m = default_mesh();
  EXPECT_NO_THROW(validate(m));
  std::array<int, kBoundaryTagCount> tags{};
  for (const auto& e : m.edges) ++tags[static_cast<int>(e.tag)];
  for (int t = 0; t < kBoundaryTagCount; ++t) EXPECT_GT(tags[t], 0) << to_string(static_cast<BoundaryTag>(t));
  const auto vol = region_volumes(m);
  for (double v : vol) EXPECT_GT(v, 0.0);
}

TEST(Geometry, NodeCountNearReference) {
  const double n = static_cast<double>(default_mesh().nodes.size());
  EXPECT_NEAR(n, 2882.0, 0.3 * 2882.0);
}

TEST(Geometry, MuscleVolumeMatchesSlabMinusEmbeddedElectrode) {
  const ModelGeometry g;
  const double expected = pi * 0.020 * 0.020 * 0.008 - g.embedded_electrode_volume();
  EXPECT_LT(g.embedded_electrode_volume(), 0.01 * pi * 0.020 * 0.020 * 0.008);
  const double muscle = region_volumes(default_mesh())[static_cast<int>(Region::Muscle)];
  EXPECT_NEAR(muscle / expected, 1.0, 0.005);
}

TEST(Geometry, RegionVolumesPartitionTheModel) {
  const ModelGeometry g;
  const auto q = mesh_quality(default_mesh());
  EXPECT_NEAR(q.total_volume() / g.model_volume(), 1.0, 0.005);
  const double media = q.region_volume[1] + q.region_volume[2];
  EXPECT_NEAR(media / (g.model_volume() - g.electrode_volume()), 1.0, 0.005);
  double sum = 0.0;
  for (const auto& t : default_mesh().triangles) sum += revolved_volume(default_mesh(), t);
  EXPECT_NEAR(q.total_volume(), sum, 1e-10 * sum);
}

TEST(Geometry, QualityTargets) {
  const auto q = mesh_quality(default_mesh());
  EXPECT_GE(q.min_angle_deg, 20.0);
  EXPECT_GT(q.max_aspect_ratio, 1.0);
}

TEST(Geometry, Conformity) {
  const Mesh& m = default_mesh();
  const auto et = detail::edge_triangles(m);
  std::set<std::uint64_t> boundary;
  for (const auto& e : m.edges) boundary.insert(detail::edge_key(e.v[0], e.v[1]));
  for (const auto& [key, tris] : et) {
    if (tris.size() == 1) EXPECT_TRUE(boundary.count(key)) << "untagged exterior edge";
    EXPECT_LE(tris.size(), 2u);
  }
}

TEST(Geometry, InterfaceEdgesSeparateTheNamedRegions) {
  const Mesh& m = default_mesh();
  const auto et = detail::edge_triangles(m);
  for (const auto& e : m.edges) {
    const auto& tris = et.at(detail::edge_key(e.v[0], e.v[1]));
    if (e.tag == BoundaryTag::MuscleBloodInterface || e.tag == BoundaryTag::ElectrodeBloodInterface ||
        e.tag == BoundaryTag::ElectrodeSurface) {
      ASSERT_EQ(tris.size(), 2u) << to_string(e.tag);
    }
    if (e.tag == BoundaryTag::Axis) {
      EXPECT_EQ(m.nodes[e.v[0]].r, 0.0);
      EXPECT_EQ(m.nodes[e.v[1]].r, 0.0);
    }
  }
}

TEST(Geometry, TipCapNodesLieOnTheHemisphere) {
  const ModelGeometry g;
  const Mesh& m = default_mesh();
  int on_cap = 0;
  for (const auto& e : m.edges) {
    if (e.arc < 0) continue;
    for (int v : e.v) {
      const Point& p = m.nodes[v];
      EXPECT_NEAR(std::hypot(p.r, p.z - g.cap_center()), g.electrode_radius, 1e-12);
      ++on_cap;
    }
  }
  EXPECT_GT(on_cap, 0);
}

TEST(Geometry, ApexIsAMeshNodeOnTheAxis) {
  const ModelGeometry g;
  bool found = false;
  for (const auto& p : default_mesh().nodes) found |= (p.r == 0.0 && p.z == g.tip_apex());
  EXPECT_TRUE(found);
}

TEST(Geometry, HalvingEdgeLengthAddsNodes) {
  const Mesh coarse = build_geometry(ModelGeometry{}, 0.3e-3);
  const Mesh fine = build_geometry(ModelGeometry{}, 0.15e-3);
  EXPECT_GT(fine.nodes.size(), coarse.nodes.size());
}

TEST(Geometry, Deterministic) {
  std::ostringstream a, b;
  write_mesh(a, build_geometry(ModelGeometry{}, 0.3e-3));
  write_mesh(b, build_geometry(ModelGeometry{}, 0.3e-3));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Geometry, InfeasibleParametersNameTheConstraint) {
  auto message = [](ModelGeometry g) {
    try {
      check(g);
    } catch (const GeometryError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  ModelGeometry g;
  g.insertion_depth = 9e-3;
  EXPECT_NE(message(g).find("insertion_depth < tissue_thickness"), std::string::npos);
  g = {};
  g.blood_depth = 30e-3;
  EXPECT_NE(message(g).find("tissue_thickness + blood_depth == model_depth"), std::string::npos);
  g = {};
  g.electrode_radius = 25e-3;
  EXPECT_NE(message(g).find("electrode_radius < tissue_radius"), std::string::npos);
  g = {};
  g.electrode_length = 1.0e-3;
  EXPECT_NE(message(g).find("electrode_length > insertion_depth"), std::string::npos);
  EXPECT_THROW(build_geometry(ModelGeometry{}, 2e-3), GeometryError);
  EXPECT_THROW(build_geometry(ModelGeometry{}, 0.0), GeometryError);
}

TEST(Quality, SingleTriangleRevolvedVolume) {
  // right triangle with legs 1 at r-offset 1: int 2 pi r dA = 2 pi * (1/2) * (4/3)
  const Point a{1, 0}, b{2, 0}, c{1, 1};
  EXPECT_NEAR(revolved_volume(a, b, c), 2 * pi * 0.5 * 4.0 / 3.0, 1e-14);
}

TEST(Refine, QuadruplesTrianglesAndKeepsStraightVolumes) {
  RectSides s{BoundaryTag::Axis, BoundaryTag::OuterGroundAndThermal, BoundaryTag::OuterGroundAndThermal,
              BoundaryTag::MuscleBloodInterface};
  const Mesh m = rect_mesh(0.0, 1e-2, 0.0, 2e-2, 5, 7, Region::Muscle, s);
  const Mesh r = refine(m);
  EXPECT_EQ(r.triangles.size(), 4 * m.triangles.size());
  EXPECT_EQ(r.edges.size(), 2 * m.edges.size());
  const auto v0 = region_volumes(m), v1 = region_volumes(r);
  EXPECT_NEAR(v1[1], v0[1], 1e-12 * v0[1]);
}

TEST(Refine, CapVolumeConvergesUnderRefinement) {
  const ModelGeometry g;
  const Mesh coarse = build_geometry(g, 0.4e-3);
  const Mesh fine = refine(coarse);
  const double exact = g.electrode_volume();
  const double e0 = std::abs(region_volumes(coarse)[0] - exact);
  const double e1 = std::abs(region_volumes(fine)[0] - exact);
  EXPECT_LT(e1, e0);
}

TEST(MeshFile, RoundTripPreservesEverything) {
  const Mesh m = build_geometry(ModelGeometry{}, 0.4e-3);
  std::stringstream ss;
  write_mesh(ss, m);
  const Mesh back = read_mesh(ss);
  ASSERT_EQ(back.nodes.size(), m.nodes.size());
  ASSERT_EQ(back.triangles.size(), m.triangles.size());
  ASSERT_EQ(back.edges.size(), m.edges.size());
  for (std::size_t i = 0; i < m.nodes.size(); ++i) EXPECT_EQ(back.nodes[i], m.nodes[i]);
  for (std::size_t i = 0; i < m.triangles.size(); ++i) {
    EXPECT_EQ(back.triangles[i].v, m.triangles[i].v);
    EXPECT_EQ(back.triangles[i].region, m.triangles[i].region);
  }
  for (std::size_t i = 0; i < m.edges.size(); ++i) {
    EXPECT_EQ(back.edges[i].tag, m.edges[i].tag);
    EXPECT_EQ(back.edges[i].arc, m.edges[i].arc);
  }
}

TEST(MeshFile, RejectsBadInputWithLineNumber) {
  std::istringstream bad("rfa-mesh 3 1 0 0\n0 0 0\n1 1 0\n2 0 x\n");
  try {
    read_mesh(bad);
    FAIL() << "accepted a malformed file";
  } catch (const MeshError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST(Validate, RejectsBrokenMeshes) {
  Mesh m = rect_mesh(0, 1, 0, 1, 2, 2);
  std::swap(m.triangles[0].v[1], m.triangles[0].v[2]);
  EXPECT_THROW(validate(m), MeshError);

  Mesh axis = rect_mesh(0.5, 1, 0, 1, 2, 2, Region::Muscle, {BoundaryTag::Axis, {}, {}, {}});
  EXPECT_THROW(validate(axis), MeshError);

  Mesh orphan = rect_mesh(0, 1, 0, 1, 2, 2);
  orphan.nodes.push_back({3, 3});
  EXPECT_THROW(validate(orphan), MeshError);
}

TEST(RectMesh, RandomExtentsAreValid) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  std::uniform_int_distribution<int> n(1, 9);
  for (int k = 0; k < 50; ++k) {
    const double r0 = u(rng) - 0.1, z0 = u(rng);
    const Mesh m = rect_mesh(r0, r0 + u(rng), z0, z0 + u(rng), n(rng), n(rng));
    EXPECT_NO_THROW(validate(m));
  }
}
