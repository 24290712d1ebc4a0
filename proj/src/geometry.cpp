#include "pushplan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pushplan::geometry {
namespace {

constexpr double kMinEdgeLength = 1e-9;
// Split planes move outward by the pusher radius plus 1 mm so adjacent
// regions keep a nonempty overlap band for mode transitions.
constexpr double kOverlapMargin = 1e-3;

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

bool segments_properly_intersect(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                 const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
  const double d1 = cross2(b - a, c - a);
  const double d2 = cross2(b - a, d - a);
  const double d3 = cross2(d - c, a - c);
  const double d4 = cross2(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace

std::vector<Face> build_faces(const std::vector<Eigen::Vector2d>& vertices) {
  const int n = static_cast<int>(vertices.size());
  if (n < 3) throw DegeneratePolygon("polygon needs at least 3 vertices");
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d e = vertices[(i + 1) % n] - vertices[i];
    if (e.norm() <= kMinEdgeLength)
      throw DegeneratePolygon("consecutive vertices coincide at index " + std::to_string(i));
  }
  // Simplicity: no two non-adjacent edges may cross.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_properly_intersect(vertices[i], vertices[(i + 1) % n],
                                      vertices[j], vertices[(j + 1) % n]))
        throw DegeneratePolygon("polygon is self-intersecting");
    }
  }

  std::vector<Face> faces(n);
  for (int i = 0; i < n; ++i) {
    Face& f = faces[i];
    f.index = i;
    f.q_start = vertices[i];
    f.q_end = vertices[(i + 1) % n];
    const Eigen::Vector2d e = f.q_end - f.q_start;
    f.length = e.norm();
    f.tangent = e / f.length;
    // CCW polygon: interior lies left of the edge, outward normal right.
    f.outward_normal = Eigen::Vector2d(f.tangent.y(), -f.tangent.x());
  }
  return faces;
}

SliderGeometry SliderGeometry::from_vertices(std::vector<Eigen::Vector2d> vertices) {
  const int n = static_cast<int>(vertices.size());
  if (n < 3) throw DegeneratePolygon("polygon needs at least 3 vertices");

  double area2 = 0.0;
  for (int i = 0; i < n; ++i) area2 += cross2(vertices[i], vertices[(i + 1) % n]);
  if (std::abs(area2) < 1e-12) throw DegeneratePolygon("polygon has zero area");
  if (area2 < 0.0) std::reverse(vertices.begin(), vertices.end());

  // Uniform-density centroid; the slider frame origin is the CoM.
  area2 = 0.0;
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d& p = vertices[i];
    const Eigen::Vector2d& q = vertices[(i + 1) % n];
    const double w = cross2(p, q);
    area2 += w;
    centroid += w * (p + q);
  }
  centroid /= 3.0 * area2;
  for (auto& v : vertices) v -= centroid;

  SliderGeometry g;
  g.faces_ = build_faces(vertices);
  g.vertices_ = std::move(vertices);
  g.characteristic_radius_ = 0.0;
  for (const auto& v : g.vertices_)
    g.characteristic_radius_ = std::max(g.characteristic_radius_, v.norm());
  return g;
}

SliderGeometry SliderGeometry::box(double width, double height) {
  const double hw = width / 2.0, hh = height / 2.0;
  return from_vertices({{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}});
}

SliderGeometry SliderGeometry::tee() {
  // Bar on top of a stem; CCW from the stem bottom-left.
  return from_vertices({{-0.06, 0.0},
                        {0.06, 0.0},
                        {0.06, 0.23},
                        {0.175, 0.23},
                        {0.175, 0.35},
                        {-0.175, 0.35},
                        {-0.175, 0.23},
                        {-0.06, 0.23}});
}

bool SliderGeometry::contains(const Eigen::Vector2d& p) const {
  // Ray cast along +x.
  bool inside = false;
  const int n = num_vertices();
  for (int i = 0, j = n - 1; i < n; j = i++) {
    const Eigen::Vector2d& a = vertices_[i];
    const Eigen::Vector2d& b = vertices_[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

double RegionDecomposition::gap(int face, const Eigen::Vector2d& p) const {
  const Face& f = faces_.at(face);
  return f.outward_normal.dot(p - f.q_start) - pusher_radius_;
}

std::pair<Eigen::Vector2d, double> RegionDecomposition::gap_coefficients(int face) const {
  const Face& f = faces_.at(face);
  return {f.outward_normal, -f.outward_normal.dot(f.q_start) - pusher_radius_};
}

bool RegionDecomposition::region_contains(int region, const Eigen::Vector2d& p,
                                          double tol) const {
  for (const auto& hs : regions_.at(region).halfspaces)
    if (!hs.contains(p, tol)) return false;
  return true;
}

RegionDecomposition decompose_regions(const SliderGeometry& geometry,
                                      const PusherSpec& pusher) {
  const auto& faces = geometry.faces();
  const int n = static_cast<int>(faces.size());
  const double rho = pusher.radius;
  if (rho < 0.0) throw DegeneratePolygon("pusher radius must be nonnegative");
  const double offset = rho + kOverlapMargin;

  std::vector<Region> regions(n);
  for (int i = 0; i < n; ++i) {
    Region& region = regions[i];
    region.face = i;
    const Face& f = faces[i];

    // Outside of the face, at pusher-disk clearance: phi_i(p) >= 0.
    region.halfspaces.push_back({f.outward_normal,
                                 f.outward_normal.dot(f.q_start) + rho});

    // Split against the previous and next face at the shared vertices.
    for (int side = 0; side < 2; ++side) {
      const Face& other = faces[(i + (side == 0 ? n - 1 : 1)) % n];
      const Eigen::Vector2d w = side == 0 ? f.q_start : f.q_end;
      const double turn = side == 0 ? cross2(other.tangent, f.tangent)
                                    : cross2(f.tangent, other.tangent);
      if (turn >= 0.0) {
        // Convex vertex: split along the bisector (n_i + n_j)/2 through w.
        const Eigen::Vector2d d = (f.outward_normal + other.outward_normal).normalized();
        // Region i lies on the side of the split line toward face i.
        Eigen::Vector2d a(d.y(), -d.x());
        if (a.dot(f.outward_normal) < a.dot(other.outward_normal)) a = -a;
        region.halfspaces.push_back({a, a.dot(w) - offset});
      } else {
        // Reflex vertex: bound region i by the extension of the other
        // incident edge (the other face's supporting line).
        const Eigen::Vector2d a = other.outward_normal;
        region.halfspaces.push_back({a, a.dot(w) - offset});
      }
    }
  }
  return RegionDecomposition(std::move(regions), faces, rho);
}

std::pair<double, int> min_gap(const RegionDecomposition& decomp,
                               const Eigen::Vector2d& p) {
  double best = std::numeric_limits<double>::infinity();
  int best_face = -1;
  for (const auto& region : decomp.regions()) {
    if (!decomp.region_contains(region.face, p)) continue;
    const double phi = decomp.gap(region.face, p);
    if (phi < best - 1e-15) {
      best = phi;
      best_face = region.face;
    }
  }
  if (best_face < 0)
    throw NoContainingRegion("pusher position lies in no collision-free region");
  return {best, best_face};
}

Eigen::Vector2d vertex_world_position(const Eigen::Vector2d& p_s,
                                      const Eigen::Vector2d& r,
                                      const Eigen::Vector2d& nu) {
  const double c = r.x(), s = r.y();
  return p_s + Eigen::Vector2d(c * nu.x() - s * nu.y(), s * nu.x() + c * nu.y());
}

std::vector<Eigen::Vector2d> clip_polygon(const std::vector<Eigen::Vector2d>& poly,
                                          const Halfspace& hs) {
  std::vector<Eigen::Vector2d> out;
  const int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d& cur = poly[i];
    const Eigen::Vector2d& nxt = poly[(i + 1) % n];
    const double fc = hs.a.dot(cur) - hs.b;
    const double fn = hs.a.dot(nxt) - hs.b;
    if (fc >= 0.0) out.push_back(cur);
    if ((fc > 0.0 && fn < 0.0) || (fc < 0.0 && fn > 0.0)) {
      const double t = fc / (fc - fn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

std::vector<Eigen::Vector2d> region_polygon(const RegionDecomposition& decomp,
                                            int region, double workspace_side) {
  const double hw = workspace_side / 2.0;
  std::vector<Eigen::Vector2d> poly = {{-hw, -hw}, {hw, -hw}, {hw, hw}, {-hw, hw}};
  for (const auto& hs : decomp.regions().at(region).halfspaces) {
    poly = clip_polygon(poly, hs);
    if (poly.empty()) break;
  }
  return poly;
}

bool regions_intersect(const RegionDecomposition& decomp, int i, int j,
                       double workspace_side) {
  auto poly = region_polygon(decomp, i, workspace_side);
  for (const auto& hs : decomp.regions().at(j).halfspaces) {
    poly = clip_polygon(poly, hs);
    if (poly.empty()) return false;
  }
  return polygon_area(poly) > 1e-12;
}

double polygon_area(const std::vector<Eigen::Vector2d>& poly) {
  double a2 = 0.0;
  const int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i) a2 += cross2(poly[i], poly[(i + 1) % n]);
  return 0.5 * std::abs(a2);
}

}  // namespace pushplan::geometry
