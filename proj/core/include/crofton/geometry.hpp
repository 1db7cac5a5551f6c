#pragma once

// Convex-body geometry kernel: balls, ellipsoids, and convex polytopes with
// closed-form chords, boundary normals, lower-dimensional sections, and the
// simplicial decompositions needed for uniform surface sampling.
//
// Conventions used throughout the library:
//  * An ellipsoid is { x : (x-c)^T Q (x-c) <= 1 } with Q symmetric positive
//    definite; a ball of radius r is the special case Q = I/r^2.
//  * A polytope is the intersection of halfspaces <n_i, x> <= o_i with unit
//    normals n_i, together with its vertex list and per-facet records.
//  * A body may carry an ambient frame: it then lives intrinsically inside an
//    affine flat of a higher-dimensional space, and all of its defining data
//    are expressed in the flat's orthonormal coordinates.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace crofton {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Affine subspaces (flats)
// ---------------------------------------------------------------------------

// An l-dimensional affine flat { base + directions * z : z in R^l } of R^d.
// `directions` has orthonormal columns; `base` is the canonical representative
// (the orthogonal projection of the origin onto the flat), so two descriptions
// of the same flat compare equal up to a rotation of the intrinsic frame.
struct AffineSubspace {
  Mat directions;  // d x l, orthonormal columns
  Vec base;        // foot of the perpendicular from the origin

  int ambient_dim() const { return static_cast<int>(base.size()); }
  int dim() const { return static_cast<int>(directions.cols()); }

  // Intrinsic coordinates z -> ambient point.
  Vec embed(const Vec& z) const { return base + directions * z; }
  // Ambient point -> intrinsic coordinates of its projection onto the flat.
  Vec coords(const Vec& x) const { return directions.transpose() * (x - base); }
  // Distance from an ambient point to the flat.
  double distance(const Vec& x) const;
  // Orthonormal basis of the orthogonal complement of the direction span.
  Mat orthogonal_complement() const;
};

// Builds the canonical representation of the flat through `point` spanned by
// the columns of `directions` (orthonormalized if they are not already).
AffineSubspace make_affine_subspace(const Mat& directions, const Vec& point);

// Orthonormalizes the columns of M (modified Gram-Schmidt).  Returns an empty
// matrix if the columns are numerically rank-deficient.
Mat orthonormalize(const Mat& m, double tol = 1e-10);

// Orthonormal basis of the orthogonal complement of the (orthonormal) columns
// of `frame`, via a full QR decomposition.
Mat orthonormal_complement(const Mat& frame);

// ---------------------------------------------------------------------------
// Simplex volume
// ---------------------------------------------------------------------------

// l-dimensional volume of the simplex spanned by l+1 points (rows of
// `points`) in R^d, via the Gram determinant: sqrt(det(M^T M)) / l! where M
// has columns x_i - x_0.  Degenerate configurations return 0.
double simplex_volume(const Mat& points);

// ---------------------------------------------------------------------------
// Bodies
// ---------------------------------------------------------------------------

enum class BodyKind { kBall, kEllipsoid, kPolytope };

// One facet of a polytope: supporting halfspace, incident vertices, and a
// simplicial decomposition used for area computation and uniform sampling.
// Each decomposition entry is a dim x dim matrix whose rows are the dim
// vertices of a (dim-1)-simplex lying in the facet.
struct FacetRecord {
  Vec normal;                    // outward unit normal
  double offset = 0.0;           // <normal, x> = offset on the facet plane
  std::vector<int> vertex_ids;   // incident vertices (an ordered loop at d=3)
  double area = 0.0;             // (d-1)-dimensional measure
  std::vector<Mat> simplices;
  std::vector<double> simplex_areas;
  std::vector<double> simplex_cumulative;  // prefix sums of simplex_areas
};

struct BodyDescriptor {
  BodyKind kind = BodyKind::kBall;
  int dim = 0;

  // Ellipsoid data (kind == kBall or kEllipsoid).
  Vec center;
  Mat shape;           // Q in (x-c)^T Q (x-c) <= 1
  Mat shape_sqrt;      // Q^{1/2}
  Mat shape_inv_sqrt;  // A = Q^{-1/2}; boundary = { c + A s : |s| = 1 }
  double radius = 0.0;  // balls only

  // Polytope data (kind == kPolytope).
  Mat vertices;  // one vertex per row
  std::vector<FacetRecord> facets;

  // Cached quantities, valid for every kind.
  Vec reference_point;            // centroid-ish interior point
  double enclosing_radius = 0.0;  // max distance from reference_point to body
  double volume = 0.0;
  double surface_area = 0.0;      // exact for polytopes; 0 for ellipsoids
                                  // (no closed form; surface sampling is
                                  // importance-weighted instead)

  // Present when the body lives intrinsically inside a flat of a larger
  // space; all fields above are then expressed in the flat's coordinates.
  std::optional<AffineSubspace> frame;

  bool is_smooth() const { return kind != BodyKind::kPolytope; }
  bool contains(const Vec& x, double tol = 1e-9) const;
};

// --- constructors ---

BodyDescriptor make_ball(int dim, double radius = 1.0);
BodyDescriptor make_ball_at(const Vec& center, double radius);
// Axis-aligned ellipsoid with the given semi-axes, centered at the origin.
BodyDescriptor make_ellipsoid(const std::vector<double>& semi_axes);
// General ellipsoid from center and shape matrix Q.
BodyDescriptor make_ellipsoid_general(const Vec& center, const Mat& shape);
// Polytope from vertices (rows) and halfspaces (rows [n_1..n_d, offset],
// meaning <n, x> <= offset; normals are renormalized to unit length).
BodyDescriptor make_polytope(const Mat& vertices, const Mat& halfspaces);

BodyDescriptor make_cube(int dim);                    // [0,1]^dim
BodyDescriptor make_corner_simplex(int dim);          // x_i >= 0, sum x_i <= 1
BodyDescriptor make_regular_simplex(int dim);         // edge sqrt(2), centered
BodyDescriptor make_octahedron();                     // |x|_1 <= 1 in R^3
BodyDescriptor make_regular_polygon(int n, double circumradius = 1.0);

// Applies the rigid motion x -> R x + t to a body (R orthogonal).
BodyDescriptor transform_body(const BodyDescriptor& body, const Mat& rotation,
                              const Vec& translation);

// Body registry: "ball", "ball:r", "ellipsoid:a1,...,ad", "cube", "simplex",
// "regular-simplex", "octahedron", "regular-polygon:n", "file:PATH".
// `dim` disambiguates the dimension for specs that do not imply one.
BodyDescriptor parse_body(const std::string& spec, int dim);

// Structured-text polytope file: a `vertices` section with rows of d floats
// followed by a `halfspaces` section with rows of d+1 floats (normal, offset).
// Lines starting with '#' are comments.
BodyDescriptor load_polytope_file(const std::string& path);

// The 2-D polygon (or 1-D segment at dim==2) carved out by one facet of a
// polytope, expressed intrinsically in the facet's hyperplane with
// frame = that hyperplane.  Used for line integrals inside facets.
BodyDescriptor facet_body(const BodyDescriptor& polytope, int facet_index);

// A point of the body's boundary with its outward unit normal; facet is the
// facet index for polytopes and -1 for smooth bodies.
struct BoundaryPoint {
  Vec position;
  Vec normal;
  int facet = -1;
};

// ---------------------------------------------------------------------------
// Chords
// ---------------------------------------------------------------------------

// The segment cut from a body by a line, with endpoint normals.  Endpoints
// are ordered along the line direction: p1 entry, p2 exit.
struct Chord {
  bool hit = false;
  bool degenerate = false;  // endpoint on a ridge/vertex within tolerance
  Vec p1, p2;
  double length = 0.0;
  Vec n1, n2;               // outward unit normals at p1, p2
  int facet1 = -1, facet2 = -1;  // polytopes only
  double t1 = 0.0, t2 = 0.0;     // line parameters of the endpoints
};

// Intersects a line (1-flat) with the body.  Ball/ellipsoid: quadratic roots.
// Polytope: interval clipping against all halfspaces, tracking which facet
// realizes each end; if two facets realize the same end within `ridge_tol`
// the chord is flagged degenerate.  Tangent grazes (length < 1e-12) miss.
Chord line_intersect(const BodyDescriptor& body, const AffineSubspace& line,
                     double ridge_tol = 1e-9);
Chord line_intersect(const BodyDescriptor& body, const Vec& point,
                     const Vec& direction, double ridge_tol = 1e-9);

// Outward unit normal at a boundary point.  Ellipsoids: normalized Q(x-c).
// Polytopes: the unique incident facet's normal; returns nothing when the
// point lies on a ridge (two facets within tolerance) or off the boundary.
std::optional<Vec> normal_at(const BodyDescriptor& body, const Vec& position,
                             double tol = 1e-9);

// Intersection of the body with an l-flat, expressed intrinsically in the
// flat's coordinates (frame = flat).  Ellipsoid sections are closed-form
// lower-dimensional ellipsoids; polytope sections are supported for l <= 2
// (l >= 3 throws).  Empty or lower-dimensional-degenerate sections -> nothing.
std::optional<BodyDescriptor> plane_section(const BodyDescriptor& body,
                                            const AffineSubspace& flat);

// ---------------------------------------------------------------------------
// Chord angles
// ---------------------------------------------------------------------------

// Angle data of a chord with endpoint normals n1, n2 and unit direction u:
//   sin(alpha_i) = |<n_i, u>|  (alpha_i is the acute angle between the chord
//   line and the tangent plane's complement), cos(alpha_i) = |n_i - <n_i,u>u|,
//   u_i = that projection normalized, cos_phi0 = <u_1, u_2>.
// The sign of cos_phi0 carries the mutual orientation of the projected
// normals; with acute alpha_i this matches measuring each angle from the
// chord ray that points into the body at its endpoint.
struct ChordAngles {
  double sin1 = 0.0, cos1 = 0.0;
  double sin2 = 0.0, cos2 = 0.0;
  double cos_phi0 = 0.0;
  Vec u1, u2;
  bool degenerate = false;  // a projected normal vanished (normal || chord)
};

ChordAngles chord_angles(const Chord& chord, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Small utilities
// ---------------------------------------------------------------------------

// Volume of the unit-coordinate bounding box of a polytope's vertex set.
struct BoundingBox {
  Vec lo, hi;
  double volume() const;
};
BoundingBox bounding_box(const BodyDescriptor& polytope);

}  // namespace crofton
