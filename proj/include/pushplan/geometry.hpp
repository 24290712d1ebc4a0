#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pushplan::geometry {

struct DegeneratePolygon : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoContainingRegion : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One polygon edge with contact frame attached. Tangent follows the CCW
// traversal direction (so it is the face's unit edge vector) and is
// orthogonal to the outward normal.
struct Face {
  int index = 0;
  Eigen::Vector2d q_start = Eigen::Vector2d::Zero();
  Eigen::Vector2d q_end = Eigen::Vector2d::Zero();
  Eigen::Vector2d outward_normal = Eigen::Vector2d::Zero();
  Eigen::Vector2d tangent = Eigen::Vector2d::Zero();
  double length = 0.0;

  Eigen::Vector2d midpoint() const { return 0.5 * (q_start + q_end); }
  Eigen::Vector2d point_at(double s) const { return q_start + s * tangent; }
};

struct PusherSpec {
  double radius = 0.0;
};

// Polygonal slider in its own frame S, with the origin at the center of
// mass. May be nonconvex; vertices are stored counter-clockwise.
class SliderGeometry {
 public:
  // Validates the polygon and recenters it at the uniform-density centroid.
  // Accepts either winding; stores CCW.
  static SliderGeometry from_vertices(std::vector<Eigen::Vector2d> vertices);

  static SliderGeometry box(double width, double height);
  // T-shape: bar 0.35 x 0.12 on a 0.12 x 0.23 stem, 8 faces.
  static SliderGeometry tee();

  const std::vector<Eigen::Vector2d>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  double characteristic_radius() const { return characteristic_radius_; }
  Eigen::Vector2d com() const { return Eigen::Vector2d::Zero(); }

  bool contains(const Eigen::Vector2d& p) const;

 private:
  SliderGeometry() = default;
  std::vector<Eigen::Vector2d> vertices_;
  std::vector<Face> faces_;
  double characteristic_radius_ = 0.0;
};

// Builds the face list for a CCW simple polygon. Throws DegeneratePolygon
// for fewer than 3 vertices, repeated consecutive vertices, or
// self-intersection.
std::vector<Face> build_faces(const std::vector<Eigen::Vector2d>& vertices);

struct Halfspace {
  Eigen::Vector2d a = Eigen::Vector2d::Zero();  // a . p >= b
  double b = 0.0;
  bool contains(const Eigen::Vector2d& p, double tol = 1e-9) const {
    return a.dot(p) >= b - tol;
  }
};

// One collision-free region Q_i: the outside of face i bounded by split
// planes at the two face endpoints (normal bisectors at convex vertices,
// incident-edge extensions at reflex vertices), offset outward so adjacent
// regions overlap.
struct Region {
  int face = 0;
  std::vector<Halfspace> halfspaces;  // includes the phi_i >= 0 halfplane
};

class RegionDecomposition {
 public:
  RegionDecomposition(std::vector<Region> regions, std::vector<Face> faces,
                      double pusher_radius)
      : regions_(std::move(regions)), faces_(std::move(faces)),
        pusher_radius_(pusher_radius) {}

  const std::vector<Region>& regions() const { return regions_; }
  const std::vector<Face>& faces() const { return faces_; }
  double pusher_radius() const { return pusher_radius_; }

  // Linear gap phi_i(p) = n_i . (p - q_i) - rho: distance from the pusher
  // disk boundary to the face's supporting halfplane.
  double gap(int face, const Eigen::Vector2d& p) const;
  // phi_i as an affine function: returns (normal, offset) with
  // phi_i(p) = normal . p + offset.
  std::pair<Eigen::Vector2d, double> gap_coefficients(int face) const;

  bool region_contains(int region, const Eigen::Vector2d& p, double tol = 1e-9) const;

 private:
  std::vector<Region> regions_;
  std::vector<Face> faces_;
  double pusher_radius_ = 0.0;
};

RegionDecomposition decompose_regions(const SliderGeometry& geometry,
                                      const PusherSpec& pusher);

// Smallest gap over the regions containing p, with the argmin face index
// (ties to the lowest index). Throws NoContainingRegion when p lies in no
// region (strictly inside the slider body).
std::pair<double, int> min_gap(const RegionDecomposition& decomp,
                               const Eigen::Vector2d& p);

// World position of a point given in the slider frame: p_s + R(r) nu with
// R(r) = [[c, -s], [s, c]]. Linear in (p_s, r) for fixed nu; r is not
// normalized here.
Eigen::Vector2d vertex_world_position(const Eigen::Vector2d& p_s,
                                      const Eigen::Vector2d& r,
                                      const Eigen::Vector2d& nu);

// Clips a convex polygon by a halfspace (Sutherland-Hodgman step).
std::vector<Eigen::Vector2d> clip_polygon(const std::vector<Eigen::Vector2d>& poly,
                                          const Halfspace& hs);

// Region i clipped to the centered square workspace box of the given side.
std::vector<Eigen::Vector2d> region_polygon(const RegionDecomposition& decomp,
                                            int region, double workspace_side);

// Whether two regions have a nonempty intersection inside the workspace box.
bool regions_intersect(const RegionDecomposition& decomp, int i, int j,
                       double workspace_side);

double polygon_area(const std::vector<Eigen::Vector2d>& poly);

}  // namespace pushplan::geometry
