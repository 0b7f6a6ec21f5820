#pragma once

// Conforming Delaunay refinement of a planar straight-line graph inside an
// axis-aligned box (Ruppert-style: encroached subsegments are split at their
// midpoint, bad triangles get their circumcentre). Subsegments that
// approximate an Arc are split at the arc point between their ends.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <vector>

#include "rfa/mesh.hpp"

namespace rfa::detail {

struct Segment {
  int a = 0;
  int b = 0;
  std::uint8_t tags = 0;  // bit k set <=> BoundaryTag(k)
  int arc = -1;
};

struct RegionSeed {
  Point at;
  Region region;
};

struct Pslg {
  double r_min = 0, r_max = 0, z_min = 0, z_max = 0;  // bounding box; corners are points 0..3
  std::vector<Point> points;
  std::vector<Segment> segments;
  std::vector<Arc> arcs;
  std::vector<RegionSeed> seeds;
};

struct RefineOptions {
  double min_angle_deg = 26.0;
  std::size_t max_points = 400000;
  std::function<double(const Point&)> size;  // target edge length at a point
};

class ConformingMesher {
 public:
  explicit ConformingMesher(Pslg g, RefineOptions opt) : g_(std::move(g)), opt_(std::move(opt)) {
    scale_ = std::max(g_.r_max - g_.r_min, g_.z_max - g_.z_min);
    const double b = std::sin(opt_.min_angle_deg * std::numbers::pi / 180.0);
    // circumradius / shortest edge bound equivalent to the angle target
    ratio_bound_ = 1.0 / (2.0 * b);
  }

  Mesh run() {
    bootstrap();
    for (std::size_t i = 4; i < g_.points.size(); ++i) {
      if (insert(g_.points[i]) != static_cast<int>(i)) throw MeshError("mesher: duplicate input vertex");
    }
    for (const auto& s : g_.segments) {
      segs_.push_back(s);
      queue_.push_back(static_cast<int>(segs_.size()) - 1);
    }
    refine();
    return extract();
  }

 private:
  struct Tri {
    std::array<int, 3> v{};
    Point cc;
    double r2 = 0;
    bool alive = true;
  };

  Pslg g_;
  RefineOptions opt_;
  double scale_ = 1;
  double ratio_bound_ = 1;
  std::vector<Point> pts_;
  std::vector<Tri> tris_;
  std::vector<Segment> segs_;
  std::vector<char> seg_alive_;
  std::deque<int> queue_;
  std::size_t live_ = 0;

  static Point circumcenter(const Point& a, const Point& b, const Point& c) {
    const double bx = b.r - a.r, by = b.z - a.z, cx = c.r - a.r, cy = c.z - a.z;
    const double d = 2.0 * (bx * cy - by * cx);
    const double b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
    return {a.r + (cy * b2 - by * c2) / d, a.z + (bx * c2 - cx * b2) / d};
  }

  void add_tri(int a, int b, int c) {
    Tri t;
    t.v = {a, b, c};
    t.cc = circumcenter(pts_[a], pts_[b], pts_[c]);
    const double dr = t.cc.r - pts_[a].r, dz = t.cc.z - pts_[a].z;
    t.r2 = dr * dr + dz * dz;
    tris_.push_back(t);
    ++live_;
  }

  void bootstrap() {
    for (int i = 0; i < 4; ++i) pts_.push_back(g_.points[i]);
    // corners are (rmin,zmin) (rmax,zmin) (rmax,zmax) (rmin,zmax)
    add_tri(0, 1, 2);
    add_tri(0, 2, 3);
  }

  bool inside_box(const Point& p) const {
    const double eps = 1e-12 * scale_;
    return p.r >= g_.r_min - eps && p.r <= g_.r_max + eps && p.z >= g_.z_min - eps && p.z <= g_.z_max + eps;
  }

  /// Bowyer-Watson insertion. Returns the new vertex index, or the index of a
  /// coincident existing vertex.
  int insert(Point p) {
    const double tol2 = 1e-20 * scale_ * scale_;
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      const double dr = pts_[i].r - p.r, dz = pts_[i].z - p.z;
      if (dr * dr + dz * dz < tol2) return static_cast<int>(i);
    }
    std::vector<int> cavity;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      const Tri& tri = tris_[t];
      if (!tri.alive) continue;
      const double dr = tri.cc.r - p.r, dz = tri.cc.z - p.z;
      if (dr * dr + dz * dz < tri.r2 * (1.0 - 1e-12)) cavity.push_back(static_cast<int>(t));
    }
    if (cavity.empty())
      throw MeshError("mesher: point outside triangulation (" + std::to_string(p.r) + ", " + std::to_string(p.z) + ")");
    std::map<std::uint64_t, int> directed;  // (u,v) -> count
    auto dkey = [](int u, int v) {
      return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) | static_cast<std::uint32_t>(v);
    };
    for (int t : cavity)
      for (int k = 0; k < 3; ++k) directed[dkey(tris_[t].v[k], tris_[t].v[(k + 1) % 3])] += 1;
    const int idx = static_cast<int>(pts_.size());
    pts_.push_back(p);
    std::vector<std::array<int, 2>> rim;
    for (int t : cavity) {
      for (int k = 0; k < 3; ++k) {
        const int u = tris_[t].v[k], v = tris_[t].v[(k + 1) % 3];
        if (directed.count(dkey(v, u)) == 0) rim.push_back({u, v});
      }
      tris_[t].alive = false;
      --live_;
    }
    const double area_eps = 1e-14 * scale_ * scale_;
    for (const auto& [u, v] : rim) {
      const double a = signed_area(pts_[u], pts_[v], p);
      if (a > area_eps) {
        add_tri(u, v, idx);
      } else if (a < -area_eps) {
        throw MeshError("mesher: cavity not star-shaped (numerical degeneracy)");
      }
      // |a| ~ 0: p lies on a hull edge, which is dropped
    }
    if (tris_.size() > 4 * live_ + 1024) compact();
    return idx;
  }

  void compact() {
    std::vector<Tri> keep;
    keep.reserve(live_);
    for (auto& t : tris_)
      if (t.alive) keep.push_back(t);
    tris_.swap(keep);
  }

  bool encroaches(const Point& p, const Segment& s) const {
    const Point& a = pts_[s.a];
    const Point& b = pts_[s.b];
    const double dot = (p.r - a.r) * (p.r - b.r) + (p.z - a.z) * (p.z - b.z);
    const double len2 = (a.r - b.r) * (a.r - b.r) + (a.z - b.z) * (a.z - b.z);
    return dot < -1e-10 * len2;
  }

  bool encroached(int s) const {
    const Segment& seg = segs_[s];
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      if (static_cast<int>(i) == seg.a || static_cast<int>(i) == seg.b) continue;
      if (encroaches(pts_[i], seg)) return true;
    }
    return false;
  }

  Point split_point(const Segment& s) const {
    const Point& a = pts_[s.a];
    const Point& b = pts_[s.b];
    Point m{0.5 * (a.r + b.r), 0.5 * (a.z + b.z)};
    if (a.r == 0.0 && b.r == 0.0) m.r = 0.0;
    if (a.r == b.r) m.r = a.r;
    if (a.z == b.z) m.z = a.z;
    if (s.arc >= 0) m = project_to_arc(g_.arcs[s.arc], m);
    return m;
  }

  void split(int s) {
    if (seg_alive_.size() < segs_.size()) seg_alive_.resize(segs_.size(), 1);
    if (!seg_alive_[s]) return;
    const Segment seg = segs_[s];
    const int m = insert(split_point(seg));
    if (m == seg.a || m == seg.b) throw MeshError("mesher: segment too short to split");
    seg_alive_[s] = 0;
    segs_.push_back({seg.a, m, seg.tags, seg.arc});
    segs_.push_back({m, seg.b, seg.tags, seg.arc});
    seg_alive_.resize(segs_.size(), 1);
    queue_.push_back(static_cast<int>(segs_.size()) - 2);
    queue_.push_back(static_cast<int>(segs_.size()) - 1);
    enqueue_encroached_by(pts_[m], m);
  }

  void enqueue_encroached_by(const Point& p, int self) {
    seg_alive_.resize(segs_.size(), 1);
    for (std::size_t s = 0; s < segs_.size(); ++s) {
      if (!seg_alive_[s] || segs_[s].a == self || segs_[s].b == self) continue;
      if (encroaches(p, segs_[s])) queue_.push_back(static_cast<int>(s));
    }
  }

  void drain_segments() {
    seg_alive_.resize(segs_.size(), 1);
    while (!queue_.empty()) {
      const int s = queue_.front();
      queue_.pop_front();
      if (!seg_alive_[s]) continue;
      if (encroached(s)) split(s);
      if (pts_.size() > opt_.max_points) throw MeshError("mesher: point budget exceeded");
    }
  }

  /// Badness > 1 means the triangle must be refined; larger is worse.
  double badness(const Tri& t) const {
    const Point& a = pts_[t.v[0]];
    const Point& b = pts_[t.v[1]];
    const Point& c = pts_[t.v[2]];
    const double la = distance(b, c), lb = distance(c, a), lc = distance(a, b);
    const double shortest = std::min({la, lb, lc});
    const double longest = std::max({la, lb, lc});
    const double shape = std::sqrt(t.r2) / shortest / ratio_bound_;
    const Point centroid{(a.r + b.r + c.r) / 3.0, (a.z + b.z + c.z) / 3.0};
    const double size = opt_.size ? longest / opt_.size(centroid) : 0.0;
    return std::max(shape, size);
  }

  void refine() {
    drain_segments();
    while (true) {
      int worst = -1;
      double worst_bad = 1.0;
      for (std::size_t t = 0; t < tris_.size(); ++t) {
        if (!tris_[t].alive) continue;
        const double bad = badness(tris_[t]);
        if (bad > worst_bad * (1.0 + 1e-12)) {
          worst_bad = bad;
          worst = static_cast<int>(t);
        }
      }
      if (worst < 0) return;
      const Point c = tris_[worst].cc;
      seg_alive_.resize(segs_.size(), 1);
      std::vector<int> hit;
      for (std::size_t s = 0; s < segs_.size(); ++s)
        if (seg_alive_[s] && encroaches(c, segs_[s])) hit.push_back(static_cast<int>(s));
      if (!hit.empty()) {
        for (int s : hit) split(s);
      } else if (inside_box(c)) {
        const int idx = insert(c);
        if (idx == static_cast<int>(pts_.size()) - 1) enqueue_encroached_by(c, idx);
      } else {
        const auto& v = tris_[worst].v;
        insert({(pts_[v[0]].r + pts_[v[1]].r + pts_[v[2]].r) / 3.0,
                (pts_[v[0]].z + pts_[v[1]].z + pts_[v[2]].z) / 3.0});
      }
      drain_segments();
      if (pts_.size() > opt_.max_points) throw MeshError("mesher: point budget exceeded");
    }
  }

  static bool contains(const Point& a, const Point& b, const Point& c, const Point& p) {
    return signed_area(a, b, p) >= 0 && signed_area(b, c, p) >= 0 && signed_area(c, a, p) >= 0;
  }

  Mesh extract() {
    compact();
    Mesh m;
    m.nodes = pts_;
    m.arcs = g_.arcs;
    for (const auto& t : tris_) m.triangles.push_back({t.v, Region::Muscle});
    const auto et = edge_triangles(m);

    std::map<std::uint64_t, int> seg_of_edge;
    seg_alive_.resize(segs_.size(), 1);
    for (std::size_t s = 0; s < segs_.size(); ++s) {
      if (!seg_alive_[s]) continue;
      const auto key = edge_key(segs_[s].a, segs_[s].b);
      if (et.find(key) == et.end()) throw MeshError("mesher: subsegment missing from triangulation");
      seg_of_edge[key] = static_cast<int>(s);
    }

    // flood fill regions, never crossing a subsegment
    std::vector<int> region(m.triangles.size(), -1);
    for (const auto& seed : g_.seeds) {
      int start = -1;
      for (std::size_t t = 0; t < m.triangles.size() && start < 0; ++t) {
        const auto& v = m.triangles[t].v;
        if (contains(m.nodes[v[0]], m.nodes[v[1]], m.nodes[v[2]], seed.at)) start = static_cast<int>(t);
      }
      if (start < 0) throw MeshError("mesher: region seed outside the mesh");
      if (region[start] >= 0) {
        if (region[start] != static_cast<int>(seed.region)) throw MeshError("mesher: conflicting region seeds");
        continue;
      }
      std::vector<int> stack{start};
      region[start] = static_cast<int>(seed.region);
      while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        const auto& v = m.triangles[t].v;
        for (int k = 0; k < 3; ++k) {
          const auto key = edge_key(v[k], v[(k + 1) % 3]);
          if (seg_of_edge.count(key)) continue;
          for (int nb : et.at(key)) {
            if (region[nb] < 0) {
              region[nb] = region[t];
              stack.push_back(nb);
            }
          }
        }
      }
    }
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
      if (region[t] < 0) throw MeshError("mesher: triangle not reached by any region seed");
      m.triangles[t].region = static_cast<Region>(region[t]);
    }

    for (const auto& [key, s] : seg_of_edge) {
      (void)key;
      const auto& seg = segs_[s];
      for (int k = 0; k < kBoundaryTagCount; ++k)
        if (seg.tags & (1u << k)) m.edges.push_back({{seg.a, seg.b}, static_cast<BoundaryTag>(k), seg.arc});
    }
    // deterministic edge order: by tag, then by node pair
    std::sort(m.edges.begin(), m.edges.end(), [](const BoundaryEdge& x, const BoundaryEdge& y) {
      if (x.tag != y.tag) return x.tag < y.tag;
      return std::minmax(x.v[0], x.v[1]) < std::minmax(y.v[0], y.v[1]);
    });
    return m;
  }
};

}  // namespace rfa::detail
