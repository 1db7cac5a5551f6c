#include "crofton/geometry.hpp"

#include "crofton/constants.hpp"

#include <Eigen/QR>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace crofton {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp1(double v) { return std::min(1.0, std::max(-1.0, v)); }
}  // namespace

// ---------------------------------------------------------------------------
// Affine subspaces
// ---------------------------------------------------------------------------

double AffineSubspace::distance(const Vec& x) const {
  Vec r = x - base;
  r -= directions * (directions.transpose() * r);
  return r.norm();
}

Mat AffineSubspace::orthogonal_complement() const {
  return orthonormal_complement(directions);
}

Mat orthonormalize(const Mat& m, double tol) {
  Mat q = m;
  for (int j = 0; j < q.cols(); ++j) {
    for (int i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
    const double norm = q.col(j).norm();
    if (norm < tol) return Mat();
    q.col(j) /= norm;
    // Second pass for numerical orthogonality.
    for (int i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
    q.col(j).normalize();
  }
  return q;
}

Mat orthonormal_complement(const Mat& frame) {
  const int d = static_cast<int>(frame.rows());
  const int l = static_cast<int>(frame.cols());
  if (l == 0) return Mat::Identity(d, d);
  Eigen::HouseholderQR<Mat> qr(frame);
  Mat q = qr.householderQ();
  Mat comp = q.rightCols(d - l);
  // The QR Q is orthogonal but its leading columns may differ from `frame`
  // by signs; the trailing columns still span the complement exactly.
  return comp;
}

AffineSubspace make_affine_subspace(const Mat& directions, const Vec& point) {
  AffineSubspace flat;
  flat.directions = orthonormalize(directions);
  if (flat.directions.size() == 0 && directions.cols() > 0) {
    throw std::invalid_argument("make_affine_subspace: rank-deficient directions");
  }
  // Canonical base point: the orthogonal projection of the origin.
  Vec p = point;
  if (flat.directions.cols() > 0) {
    p -= flat.directions * (flat.directions.transpose() * p);
  }
  flat.base = p;
  return flat;
}

// ---------------------------------------------------------------------------
// Simplex volume
// ---------------------------------------------------------------------------

double simplex_volume(const Mat& points) {
  const int l = static_cast<int>(points.rows()) - 1;
  if (l < 0) throw std::invalid_argument("simplex_volume: no points");
  if (l == 0) return 1.0;  // counting measure of a single point
  Mat m(points.cols(), l);
  for (int i = 0; i < l; ++i) {
    m.col(i) = (points.row(i + 1) - points.row(0)).transpose();
  }
  const double det = (m.transpose() * m).determinant();
  if (det <= 0.0) return 0.0;
  return std::sqrt(det) / factorial(l);
}

// ---------------------------------------------------------------------------
// BodyDescriptor basics
// ---------------------------------------------------------------------------

bool BodyDescriptor::contains(const Vec& x, double tol) const {
  if (kind == BodyKind::kPolytope) {
    for (const auto& f : facets) {
      if (f.normal.dot(x) > f.offset + tol) return false;
    }
    return true;
  }
  Vec y = x - center;
  return y.dot(shape * y) <= 1.0 + tol;
}

double BoundingBox::volume() const {
  double v = 1.0;
  for (int i = 0; i < lo.size(); ++i) v *= std::max(0.0, hi[i] - lo[i]);
  return v;
}

BoundingBox bounding_box(const BodyDescriptor& body) {
  BoundingBox box;
  const int d = body.dim;
  box.lo = Vec::Constant(d, kInf);
  box.hi = Vec::Constant(d, -kInf);
  if (body.kind == BodyKind::kPolytope) {
    for (int i = 0; i < body.vertices.rows(); ++i) {
      box.lo = box.lo.cwiseMin(body.vertices.row(i).transpose());
      box.hi = box.hi.cwiseMax(body.vertices.row(i).transpose());
    }
  } else {
    // Half-extent along e_i is || Q^{-1/2} e_i ||.
    for (int i = 0; i < d; ++i) {
      const double h = body.shape_inv_sqrt.col(i).norm();
      box.lo[i] = body.center[i] - h;
      box.hi[i] = body.center[i] + h;
    }
  }
  return box;
}

// ---------------------------------------------------------------------------
// Ellipsoids
// ---------------------------------------------------------------------------

namespace {

void finalize_ellipsoid(BodyDescriptor& body) {
  const int d = body.dim;
  Eigen::SelfAdjointEigenSolver<Mat> es(body.shape);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("ellipsoid shape matrix must be positive definite");
  }
  const Vec lam = es.eigenvalues();
  const Mat v = es.eigenvectors();
  body.shape_sqrt = v * lam.cwiseSqrt().asDiagonal() * v.transpose();
  body.shape_inv_sqrt = v * lam.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  body.reference_point = body.center;
  body.enclosing_radius = 1.0 / std::sqrt(lam.minCoeff());
  double det_sqrt = 1.0;
  for (int i = 0; i < d; ++i) det_sqrt *= std::sqrt(lam[i]);
  body.volume = unit_ball_volume(d) / det_sqrt;
  body.surface_area = 0.0;  // no closed form needed; sampling is weighted
}

}  // namespace

BodyDescriptor make_ball_at(const Vec& center, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("ball radius must be positive");
  BodyDescriptor body;
  body.kind = BodyKind::kBall;
  body.dim = static_cast<int>(center.size());
  body.center = center;
  body.radius = radius;
  body.shape = Mat::Identity(body.dim, body.dim) / (radius * radius);
  finalize_ellipsoid(body);
  return body;
}

BodyDescriptor make_ball(int dim, double radius) {
  return make_ball_at(Vec::Zero(dim), radius);
}

BodyDescriptor make_ellipsoid(const std::vector<double>& semi_axes) {
  const int d = static_cast<int>(semi_axes.size());
  if (d < 1) throw std::invalid_argument("ellipsoid needs at least one semi-axis");
  BodyDescriptor body;
  body.kind = BodyKind::kEllipsoid;
  body.dim = d;
  body.center = Vec::Zero(d);
  body.shape = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    if (semi_axes[i] <= 0.0) throw std::invalid_argument("semi-axes must be positive");
    body.shape(i, i) = 1.0 / (semi_axes[i] * semi_axes[i]);
  }
  finalize_ellipsoid(body);
  return body;
}

BodyDescriptor make_ellipsoid_general(const Vec& center, const Mat& shape) {
  BodyDescriptor body;
  body.kind = BodyKind::kEllipsoid;
  body.dim = static_cast<int>(center.size());
  body.center = center;
  body.shape = 0.5 * (shape + shape.transpose());
  finalize_ellipsoid(body);
  return body;
}

// ---------------------------------------------------------------------------
// Polytopes
// ---------------------------------------------------------------------------

namespace {

// Collects indices of vertices incident to the hyperplane <n,x> = o.
std::vector<int> incident_vertices(const Mat& vertices, const Vec& n, double o,
                                   double tol) {
  std::vector<int> ids;
  for (int i = 0; i < vertices.rows(); ++i) {
    if (std::abs(n.dot(vertices.row(i).transpose()) - o) <= tol) ids.push_back(i);
  }
  return ids;
}

// Orders the incident vertices of a 2-D-facet (d=3) as a convex loop by angle
// around the facet centroid, measured in an in-plane orthonormal basis.
std::vector<int> order_facet_loop(const Mat& vertices, const std::vector<int>& ids,
                                  const Vec& normal) {
  Mat basis = orthonormal_complement(normal);
  Vec centroid = Vec::Zero(vertices.cols());
  for (int id : ids) centroid += vertices.row(id).transpose();
  centroid /= static_cast<double>(ids.size());
  std::vector<std::pair<double, int>> keyed;
  keyed.reserve(ids.size());
  for (int id : ids) {
    Eigen::Vector2d z = basis.transpose() * (vertices.row(id).transpose() - centroid);
    keyed.emplace_back(std::atan2(z[1], z[0]), id);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<int> loop;
  loop.reserve(ids.size());
  for (auto& [angle, id] : keyed) loop.push_back(id);
  return loop;
}

void finalize_facet(FacetRecord& f) {
  f.area = 0.0;
  f.simplex_areas.clear();
  f.simplex_cumulative.clear();
  for (const Mat& s : f.simplices) {
    const double a = simplex_volume(s);
    f.simplex_areas.push_back(a);
    f.area += a;
    f.simplex_cumulative.push_back(f.area);
  }
}

void finalize_polytope(BodyDescriptor& body) {
  const int d = body.dim;
  Vec centroid = Vec::Zero(d);
  for (int i = 0; i < body.vertices.rows(); ++i) {
    centroid += body.vertices.row(i).transpose();
  }
  centroid /= static_cast<double>(body.vertices.rows());
  body.reference_point = centroid;
  body.enclosing_radius = 0.0;
  for (int i = 0; i < body.vertices.rows(); ++i) {
    body.enclosing_radius = std::max(
        body.enclosing_radius, (body.vertices.row(i).transpose() - centroid).norm());
  }
  body.surface_area = 0.0;
  body.volume = 0.0;
  for (const auto& f : body.facets) {
    body.surface_area += f.area;
    // Pyramid with apex at the centroid over each facet.
    const double height = f.offset - f.normal.dot(centroid);
    if (height <= 0.0) {
      throw std::invalid_argument("polytope centroid is not interior to all facets");
    }
    body.volume += height * f.area / d;
  }
}

}  // namespace

BodyDescriptor make_polytope(const Mat& vertices_in, const Mat& halfspaces_in) {
  BodyDescriptor body;
  body.kind = BodyKind::kPolytope;
  body.dim = static_cast<int>(vertices_in.cols());
  const int d = body.dim;
  if (d < 1) throw std::invalid_argument("polytope dimension must be >= 1");
  if (halfspaces_in.cols() != d + 1) {
    throw std::invalid_argument("halfspace rows must have d+1 entries");
  }
  body.vertices = vertices_in;

  double scale = 1.0;
  for (int i = 0; i < body.vertices.rows(); ++i) {
    scale = std::max(scale, body.vertices.row(i).norm());
  }
  const double inc_tol = 1e-9 * scale;

  // Normalize and de-duplicate the halfspaces.
  std::vector<std::pair<Vec, double>> planes;
  for (int i = 0; i < halfspaces_in.rows(); ++i) {
    Vec n = halfspaces_in.row(i).head(d).transpose();
    const double norm = n.norm();
    if (norm < 1e-12) throw std::invalid_argument("zero halfspace normal");
    n /= norm;
    const double o = halfspaces_in(i, d) / norm;
    bool dup = false;
    for (auto& [pn, po] : planes) {
      if (pn.dot(n) > 1.0 - 1e-10 && std::abs(po - o) <= inc_tol) { dup = true; break; }
    }
    if (!dup) planes.emplace_back(std::move(n), o);
  }

  // Validate that every vertex satisfies every constraint.
  for (int i = 0; i < body.vertices.rows(); ++i) {
    for (auto& [n, o] : planes) {
      if (n.dot(body.vertices.row(i).transpose()) > o + 1e-7 * scale) {
        throw std::invalid_argument("vertex violates a halfspace constraint");
      }
    }
  }

  for (auto& [n, o] : planes) {
    std::vector<int> ids = incident_vertices(body.vertices, n, o, inc_tol);
    if (static_cast<int>(ids.size()) < d) continue;  // redundant constraint

    FacetRecord f;
    f.normal = n;
    f.offset = o;

    if (d == 1) {
      f.vertex_ids = {ids.front()};
      Mat s(1, 1);
      s(0, 0) = body.vertices(ids.front(), 0);
      f.simplices = {s};
    } else if (d == 2) {
      // Edge: keep the two extreme incident vertices along the edge direction.
      Vec dir(2);
      dir << -n[1], n[0];
      auto proj = [&](int id) { return dir.dot(body.vertices.row(id).transpose()); };
      auto [lo, hi] = std::minmax_element(
          ids.begin(), ids.end(), [&](int a, int b) { return proj(a) < proj(b); });
      f.vertex_ids = {*lo, *hi};
      Mat s(2, 2);
      s.row(0) = body.vertices.row(*lo);
      s.row(1) = body.vertices.row(*hi);
      f.simplices = {s};
    } else if (d == 3) {
      // Convex polygon: order as a loop, then fan from the facet centroid.
      f.vertex_ids = order_facet_loop(body.vertices, ids, n);
      Vec centroid = Vec::Zero(3);
      for (int id : f.vertex_ids) centroid += body.vertices.row(id).transpose();
      centroid /= static_cast<double>(f.vertex_ids.size());
      const int m = static_cast<int>(f.vertex_ids.size());
      for (int i = 0; i < m; ++i) {
        Mat s(3, 3);
        s.row(0) = centroid.transpose();
        s.row(1) = body.vertices.row(f.vertex_ids[i]);
        s.row(2) = body.vertices.row(f.vertex_ids[(i + 1) % m]);
        if (simplex_volume(s) > 1e-14 * scale * scale) f.simplices.push_back(s);
      }
    } else {
      // d >= 4: only simplicial facets are supported by this generic path
      // (the hypercube constructor supplies its own decomposition).
      if (static_cast<int>(ids.size()) != d) {
        throw std::invalid_argument(
            "non-simplicial facets are unsupported in dimension >= 4");
      }
      f.vertex_ids = ids;
      Mat s(d, d);
      for (int i = 0; i < d; ++i) s.row(i) = body.vertices.row(ids[i]);
      f.simplices = {s};
    }

    finalize_facet(f);
    if (f.area <= 0.0 && d > 1) continue;  // degenerate sliver
    body.facets.push_back(std::move(f));
  }

  if (body.facets.empty()) throw std::invalid_argument("polytope has no facets");
  finalize_polytope(body);
  return body;
}

BodyDescriptor make_cube(int dim) {
  if (dim < 1) throw std::invalid_argument("cube dimension must be >= 1");
  const int n = 1 << dim;
  Mat v(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) v(i, j) = (i >> j) & 1;
  }
  Mat h(2 * dim, dim + 1);
  h.setZero();
  for (int j = 0; j < dim; ++j) {
    h(2 * j, j) = 1.0;
    h(2 * j, dim) = 1.0;   //  x_j <= 1
    h(2 * j + 1, j) = -1.0;
    h(2 * j + 1, dim) = 0.0;  // -x_j <= 0
  }
  if (dim <= 3) return make_polytope(v, h);

  // dim >= 4: assemble facet records directly, decomposing each (dim-1)-cube
  // facet into (dim-1)! simplices via the permutation (Kuhn) triangulation:
  // the simplex for permutation pi has vertices w_0 = base corner and
  // w_i = w_{i-1} + e_{pi(i)} over the facet's free axes.
  BodyDescriptor body;
  body.kind = BodyKind::kPolytope;
  body.dim = dim;
  body.vertices = v;
  for (int axis = 0; axis < dim; ++axis) {
    for (int side = 0; side <= 1; ++side) {
      FacetRecord f;
      f.normal = Vec::Zero(dim);
      f.normal[axis] = side ? 1.0 : -1.0;
      f.offset = side ? 1.0 : 0.0;
      for (int i = 0; i < n; ++i) {
        if (((i >> axis) & 1) == side) f.vertex_ids.push_back(i);
      }
      std::vector<int> free_axes;
      for (int j = 0; j < dim; ++j) {
        if (j != axis) free_axes.push_back(j);
      }
      std::vector<int> perm(free_axes.begin(), free_axes.end());
      std::sort(perm.begin(), perm.end());
      do {
        Mat s(dim, dim);
        Vec w = Vec::Zero(dim);
        w[axis] = side;
        s.row(0) = w.transpose();
        for (int i = 0; i < dim - 1; ++i) {
          w[perm[i]] = 1.0;
          s.row(i + 1) = w.transpose();
        }
        f.simplices.push_back(s);
      } while (std::next_permutation(perm.begin(), perm.end()));
      finalize_facet(f);
      body.facets.push_back(std::move(f));
    }
  }
  finalize_polytope(body);
  return body;
}

BodyDescriptor make_corner_simplex(int dim) {
  if (dim < 1) throw std::invalid_argument("simplex dimension must be >= 1");
  Mat v = Mat::Zero(dim + 1, dim);
  for (int i = 0; i < dim; ++i) v(i + 1, i) = 1.0;
  Mat h = Mat::Zero(dim + 1, dim + 1);
  for (int i = 0; i < dim; ++i) {
    h(i, i) = -1.0;  // -x_i <= 0
  }
  h.row(dim).head(dim).setConstant(1.0);  // sum x_i <= 1
  h(dim, dim) = 1.0;
  return make_polytope(v, h);
}

BodyDescriptor make_regular_simplex(int dim) {
  if (dim < 1) throw std::invalid_argument("simplex dimension must be >= 1");
  // Vertices of the regular simplex with edge sqrt(2), centered at the origin:
  // the standard basis of R^{dim+1} projected isometrically onto the
  // hyperplane of zero coordinate sum.
  Vec ones = Vec::Ones(dim + 1);
  Mat w = orthonormal_complement(ones / ones.norm());  // (dim+1) x dim
  Mat v(dim + 1, dim);
  for (int i = 0; i < dim + 1; ++i) {
    Vec e = Vec::Zero(dim + 1);
    e[i] = 1.0;
    v.row(i) = (w.transpose() * (e - ones / (dim + 1))).transpose();
  }
  // Facet opposite vertex i has outward normal -v_i (by central symmetry of
  // the construction) and touches all other vertices.
  Mat h(dim + 1, dim + 1);
  for (int i = 0; i < dim + 1; ++i) {
    Vec n = -v.row(i).transpose();
    n.normalize();
    const int j = (i + 1) % (dim + 1);
    h.row(i).head(dim) = n.transpose();
    h(i, dim) = n.dot(v.row(j).transpose());
  }
  return make_polytope(v, h);
}

BodyDescriptor make_octahedron() {
  Mat v(6, 3);
  v << 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1;
  Mat h(8, 4);
  int row = 0;
  const double s3 = std::sqrt(3.0);
  for (int sx = -1; sx <= 1; sx += 2) {
    for (int sy = -1; sy <= 1; sy += 2) {
      for (int sz = -1; sz <= 1; sz += 2) {
        h.row(row) << sx / s3, sy / s3, sz / s3, 1.0 / s3;
        ++row;
      }
    }
  }
  return make_polytope(v, h);
}

BodyDescriptor make_regular_polygon(int n, double circumradius) {
  if (n < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  Mat v(n, 2);
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    v(i, 0) = circumradius * std::cos(a);
    v(i, 1) = circumradius * std::sin(a);
  }
  Mat h(n, 3);
  for (int i = 0; i < n; ++i) {
    Vec mid = (v.row(i) + v.row((i + 1) % n)).transpose() / 2.0;
    Vec normal = mid.normalized();
    h.row(i).head(2) = normal.transpose();
    h(i, 2) = normal.dot(v.row(i).transpose());
  }
  return make_polytope(v, h);
}

BodyDescriptor transform_body(const BodyDescriptor& body, const Mat& rotation,
                              const Vec& translation) {
  BodyDescriptor out = body;
  if (body.kind == BodyKind::kPolytope) {
    for (int i = 0; i < out.vertices.rows(); ++i) {
      out.vertices.row(i) =
          (rotation * body.vertices.row(i).transpose() + translation).transpose();
    }
    for (auto& f : out.facets) {
      f.normal = rotation * f.normal;
      f.offset += f.normal.dot(translation);
      for (auto& s : f.simplices) {
        for (int r = 0; r < s.rows(); ++r) {
          s.row(r) = (rotation * s.row(r).transpose() + translation).transpose();
        }
      }
    }
    out.reference_point = rotation * body.reference_point + translation;
  } else {
    out.center = rotation * body.center + translation;
    out.shape = rotation * body.shape * rotation.transpose();
    out.shape_sqrt = rotation * body.shape_sqrt * rotation.transpose();
    out.shape_inv_sqrt = rotation * body.shape_inv_sqrt * rotation.transpose();
    out.reference_point = out.center;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Registry and file IO
// ---------------------------------------------------------------------------

namespace {

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

BodyDescriptor parse_body(const std::string& spec, int dim) {
  std::string name = spec;
  std::string arg;
  if (auto pos = spec.find(':'); pos != std::string::npos) {
    name = spec.substr(0, pos);
    arg = spec.substr(pos + 1);
  }
  const int d = dim > 0 ? dim : 3;

  if (name == "ball") {
    return make_ball(d, arg.empty() ? 1.0 : std::stod(arg));
  }
  if (name == "ellipsoid") {
    auto axes = parse_number_list(arg);
    if (axes.empty()) throw std::invalid_argument("ellipsoid needs semi-axes");
    if (dim > 0 && dim != static_cast<int>(axes.size())) {
      throw std::invalid_argument("ellipsoid semi-axis count disagrees with --dim");
    }
    return make_ellipsoid(axes);
  }
  if (name == "cube") return make_cube(d);
  if (name == "simplex") return make_corner_simplex(d);
  if (name == "regular-simplex") return make_regular_simplex(d);
  if (name == "octahedron") {
    if (dim > 0 && dim != 3) throw std::invalid_argument("octahedron is 3-dimensional");
    return make_octahedron();
  }
  if (name == "regular-polygon") {
    if (dim > 0 && dim != 2) throw std::invalid_argument("regular-polygon is 2-dimensional");
    if (arg.empty()) throw std::invalid_argument("regular-polygon:n needs a vertex count");
    return make_regular_polygon(std::stoi(arg));
  }
  if (name == "file") {
    if (arg.empty()) throw std::invalid_argument("file: needs a path");
    return load_polytope_file(arg);
  }
  throw std::invalid_argument("unknown body spec: " + spec);
}

BodyDescriptor load_polytope_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open polytope file: " + path);
  std::vector<std::vector<double>> vertex_rows, halfspace_rows;
  std::vector<std::vector<double>>* target = nullptr;
  std::string line;
  while (std::getline(in, line)) {
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::stringstream ss(line);
    std::string first;
    if (!(ss >> first)) continue;
    if (first == "vertices") {
      target = &vertex_rows;
      continue;
    }
    if (first == "halfspaces") {
      target = &halfspace_rows;
      continue;
    }
    if (target == nullptr) {
      throw std::invalid_argument("polytope file: data before a section keyword");
    }
    std::vector<double> row;
    row.push_back(std::stod(first));
    double x;
    while (ss >> x) row.push_back(x);
    target->push_back(std::move(row));
  }
  if (vertex_rows.empty() || halfspace_rows.empty()) {
    throw std::invalid_argument("polytope file needs vertices and halfspaces sections");
  }
  const int d = static_cast<int>(vertex_rows.front().size());
  if (d < 2 || d > 3) {
    throw std::invalid_argument("polytope files support dimensions 2 and 3");
  }
  Mat v(vertex_rows.size(), d), h(halfspace_rows.size(), d + 1);
  for (size_t i = 0; i < vertex_rows.size(); ++i) {
    if (static_cast<int>(vertex_rows[i].size()) != d) {
      throw std::invalid_argument("inconsistent vertex row width");
    }
    for (int j = 0; j < d; ++j) v(i, j) = vertex_rows[i][j];
  }
  for (size_t i = 0; i < halfspace_rows.size(); ++i) {
    if (static_cast<int>(halfspace_rows[i].size()) != d + 1) {
      throw std::invalid_argument("halfspace rows need d+1 entries");
    }
    for (int j = 0; j <= d; ++j) h(i, j) = halfspace_rows[i][j];
  }
  return make_polytope(v, h);
}

// ---------------------------------------------------------------------------
// Facet bodies and polygon construction
// ---------------------------------------------------------------------------

namespace {

// Builds a 2-D polytope from a convex loop of points (rows, in order).
BodyDescriptor make_polygon_from_loop(const Mat& loop) {
  const int m = static_cast<int>(loop.rows());
  if (m < 3) throw std::invalid_argument("polygon loop needs >= 3 points");
  Vec centroid = loop.colwise().mean().transpose();
  Mat h(m, 3);
  for (int i = 0; i < m; ++i) {
    Vec a = loop.row(i).transpose();
    Vec b = loop.row((i + 1) % m).transpose();
    Vec e = b - a;
    Vec n(2);
    n << e[1], -e[0];
    n.normalize();
    if (n.dot(centroid - a) > 0) n = -n;  // outward
    h.row(i).head(2) = n.transpose();
    h(i, 2) = n.dot(a);
  }
  return make_polytope(loop, h);
}

}  // namespace

BodyDescriptor facet_body(const BodyDescriptor& polytope, int facet_index) {
  if (polytope.kind != BodyKind::kPolytope) {
    throw std::invalid_argument("facet_body: polytope required");
  }
  const auto& f = polytope.facets.at(facet_index);
  const int d = polytope.dim;
  Mat normal_col(d, 1);
  normal_col.col(0) = f.normal;
  Mat basis = orthonormal_complement(normal_col);
  AffineSubspace flat = make_affine_subspace(
      basis, polytope.vertices.row(f.vertex_ids.front()).transpose());

  Mat pts(static_cast<int>(f.vertex_ids.size()), d - 1);
  for (size_t i = 0; i < f.vertex_ids.size(); ++i) {
    pts.row(i) = flat.coords(polytope.vertices.row(f.vertex_ids[i]).transpose()).transpose();
  }
  BodyDescriptor out;
  if (d == 3) {
    out = make_polygon_from_loop(pts);  // loop order preserved from the facet
  } else if (d == 2) {
    Mat v(2, 1), h(2, 2);
    const double a = std::min(pts(0, 0), pts(1, 0));
    const double b = std::max(pts(0, 0), pts(1, 0));
    v << a, b;
    h << -1.0, -a, 1.0, b;
    out = make_polytope(v, h);
  } else {
    throw std::invalid_argument("facet_body supports ambient dimensions 2 and 3");
  }
  out.frame = flat;
  return out;
}

// ---------------------------------------------------------------------------
// Line intersection
// ---------------------------------------------------------------------------

Chord line_intersect(const BodyDescriptor& body, const Vec& point,
                     const Vec& direction, double ridge_tol) {
  Chord chord;
  const Vec u = direction.normalized();

  double t_lo = -kInf, t_hi = kInf;

  if (body.kind == BodyKind::kPolytope) {
    double t_lo2 = -kInf, t_hi2 = kInf;
    int f_lo = -1, f_hi = -1;
    for (size_t i = 0; i < body.facets.size(); ++i) {
      const auto& f = body.facets[i];
      const double denom = f.normal.dot(u);
      const double num = f.offset - f.normal.dot(point);
      if (std::abs(denom) < 1e-14) {
        if (num < 0.0) return chord;  // parallel and outside
        continue;
      }
      const double t = num / denom;
      if (denom > 0.0) {  // upper bound
        if (t < t_hi) {
          t_hi2 = t_hi;
          t_hi = t;
          f_hi = static_cast<int>(i);
        } else if (t < t_hi2) {
          t_hi2 = t;
        }
      } else {  // lower bound
        if (t > t_lo) {
          t_lo2 = t_lo;
          t_lo = t;
          f_lo = static_cast<int>(i);
        } else if (t > t_lo2) {
          t_lo2 = t;
        }
      }
    }
    if (!(t_hi - t_lo > 1e-12) || f_lo < 0 || f_hi < 0) return chord;
    chord.hit = true;
    chord.t1 = t_lo;
    chord.t2 = t_hi;
    chord.p1 = point + t_lo * u;
    chord.p2 = point + t_hi * u;
    chord.length = t_hi - t_lo;
    chord.facet1 = f_lo;
    chord.facet2 = f_hi;
    chord.n1 = body.facets[f_lo].normal;
    chord.n2 = body.facets[f_hi].normal;
    // Endpoint on a ridge: two constraints active within tolerance.
    if (t_lo - t_lo2 < ridge_tol || t_hi2 - t_hi < ridge_tol) chord.degenerate = true;
    return chord;
  }

  // Ellipsoid: quadratic (p + t u - c)^T Q (p + t u - c) = 1.
  const Vec y = point - body.center;
  const Vec qu = body.shape * u;
  const double a = u.dot(qu);
  const double b = 2.0 * y.dot(qu);
  const double g = y.dot(body.shape * y) - 1.0;
  const double disc = b * b - 4.0 * a * g;
  if (disc <= 0.0) return chord;
  const double sq = std::sqrt(disc);
  t_lo = (-b - sq) / (2.0 * a);
  t_hi = (-b + sq) / (2.0 * a);
  if (!(t_hi - t_lo > 1e-12)) return chord;
  chord.hit = true;
  chord.t1 = t_lo;
  chord.t2 = t_hi;
  chord.p1 = point + t_lo * u;
  chord.p2 = point + t_hi * u;
  chord.length = t_hi - t_lo;
  chord.n1 = (body.shape * (chord.p1 - body.center)).normalized();
  chord.n2 = (body.shape * (chord.p2 - body.center)).normalized();
  return chord;
}

Chord line_intersect(const BodyDescriptor& body, const AffineSubspace& line,
                     double ridge_tol) {
  if (line.dim() != 1) throw std::invalid_argument("line_intersect: 1-flat required");
  return line_intersect(body, line.base, line.directions.col(0), ridge_tol);
}

// ---------------------------------------------------------------------------
// Normals
// ---------------------------------------------------------------------------

std::optional<Vec> normal_at(const BodyDescriptor& body, const Vec& position,
                             double tol) {
  if (body.kind == BodyKind::kPolytope) {
    int found = -1;
    for (size_t i = 0; i < body.facets.size(); ++i) {
      const auto& f = body.facets[i];
      if (std::abs(f.normal.dot(position) - f.offset) <= tol) {
        if (found >= 0) return std::nullopt;  // ridge: ambiguous normal
        found = static_cast<int>(i);
      }
    }
    if (found < 0) return std::nullopt;
    return body.facets[found].normal;
  }
  Vec g = body.shape * (position - body.center);
  const double n = g.norm();
  if (n < 1e-14) return std::nullopt;
  return Vec(g / n);
}

// ---------------------------------------------------------------------------
// Plane sections
// ---------------------------------------------------------------------------

namespace {

// Clips a convex polygon (rows) by the halfplane <a, z> <= c.
Mat clip_polygon(const Mat& poly, const Vec& a, double c) {
  const int m = static_cast<int>(poly.rows());
  std::vector<Vec> out;
  for (int i = 0; i < m; ++i) {
    Vec p = poly.row(i).transpose();
    Vec q = poly.row((i + 1) % m).transpose();
    const double fp = a.dot(p) - c;
    const double fq = a.dot(q) - c;
    if (fp <= 0.0) out.push_back(p);
    if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
      out.push_back(p + (fp / (fp - fq)) * (q - p));
    }
  }
  Mat result(static_cast<int>(out.size()), 2);
  for (size_t i = 0; i < out.size(); ++i) result.row(i) = out[i].transpose();
  return result;
}

// Removes consecutive near-duplicate points from a loop.
Mat dedupe_loop(const Mat& loop, double tol) {
  std::vector<int> keep;
  const int m = static_cast<int>(loop.rows());
  for (int i = 0; i < m; ++i) {
    const int j = (i + 1) % m;
    if ((loop.row(i) - loop.row(j)).norm() > tol) keep.push_back(i);
  }
  Mat out(static_cast<int>(keep.size()), 2);
  for (size_t i = 0; i < keep.size(); ++i) out.row(i) = loop.row(keep[i]);
  return out;
}

}  // namespace

std::optional<BodyDescriptor> plane_section(const BodyDescriptor& body,
                                            const AffineSubspace& flat) {
  const int d = body.dim;
  const int l = flat.dim();
  if (l < 1 || l >= d) throw std::invalid_argument("plane_section: need 1 <= l < d");

  if (body.kind != BodyKind::kPolytope) {
    // Restrict the quadratic form to base + U z.
    const Mat& u = flat.directions;
    Vec y = flat.base - body.center;
    Mat m = u.transpose() * body.shape * u;
    Vec beta = u.transpose() * (body.shape * y);
    const double gamma = y.dot(body.shape * y) - 1.0;
    Vec z0 = m.ldlt().solve(-beta);
    const double rho = -gamma - beta.dot(z0);
    if (rho <= 1e-12) return std::nullopt;
    BodyDescriptor section;
    section.kind = BodyKind::kEllipsoid;
    section.dim = l;
    section.center = z0;
    section.shape = m / rho;
    finalize_ellipsoid(section);
    section.frame = flat;
    return section;
  }

  if (l == 1) {
    Chord c = line_intersect(body, flat.base, flat.directions.col(0));
    if (!c.hit) return std::nullopt;
    Mat v(2, 1), h(2, 2);
    v << c.t1, c.t2;
    h << -1.0, -c.t1, 1.0, c.t2;
    BodyDescriptor section = make_polytope(v, h);
    section.frame = flat;
    return section;
  }
  if (l != 2 || d != 3) {
    throw std::invalid_argument(
        "plane_section: polytope sections support l=1 and (l=2, d=3)");
  }

  // Start from a large square certain to contain the section, then clip by
  // the trace of every halfspace in the flat's intrinsic coordinates.
  const double s = flat.coords(body.reference_point).norm() + body.enclosing_radius + 1.0;
  Mat poly(4, 2);
  poly << -s, -s, s, -s, s, s, -s, s;
  for (const auto& f : body.facets) {
    Vec a = flat.directions.transpose() * f.normal;
    const double c = f.offset - f.normal.dot(flat.base);
    if (a.norm() < 1e-12) {
      if (c < -1e-12) return std::nullopt;  // flat entirely outside
      continue;
    }
    poly = clip_polygon(poly, a, c);
    if (poly.rows() < 3) return std::nullopt;
  }
  poly = dedupe_loop(poly, 1e-10);
  if (poly.rows() < 3) return std::nullopt;
  // Reject zero-area slivers (flat touching the boundary tangentially).
  double area2 = 0.0;
  for (int i = 0; i < poly.rows(); ++i) {
    const int j = (i + 1) % poly.rows();
    area2 += poly(i, 0) * poly(j, 1) - poly(j, 0) * poly(i, 1);
  }
  if (std::abs(area2) < 2e-12) return std::nullopt;

  BodyDescriptor section = make_polygon_from_loop(poly);
  section.frame = flat;
  return section;
}

// ---------------------------------------------------------------------------
// Chord angles
// ---------------------------------------------------------------------------

ChordAngles chord_angles(const Chord& chord, double tol) {
  ChordAngles a;
  const Vec u = (chord.p2 - chord.p1).normalized();

  const double d1 = chord.n1.dot(u);
  const double d2 = chord.n2.dot(u);
  a.sin1 = std::min(1.0, std::abs(d1));
  a.sin2 = std::min(1.0, std::abs(d2));

  Vec w1 = chord.n1 - d1 * u;
  Vec w2 = chord.n2 - d2 * u;
  a.cos1 = w1.norm();
  a.cos2 = w2.norm();
  if (a.cos1 < tol || a.cos2 < tol) {
    a.degenerate = true;
    return a;
  }
  a.u1 = w1 / a.cos1;
  a.u2 = w2 / a.cos2;
  a.cos1 = std::min(1.0, a.cos1);
  a.cos2 = std::min(1.0, a.cos2);
  a.cos_phi0 = clamp1(a.u1.dot(a.u2));
  return a;
}

}  // namespace crofton
