#include "crofton/measures.hpp"

#include "crofton/constants.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crofton {

Mat sample_grassmannian(int d, int l, RngStream& rng) {
  if (l < 1 || l > d) throw std::invalid_argument("sample_grassmannian: need 1 <= l <= d");
  for (;;) {
    Mat g(d, l);
    for (int j = 0; j < l; ++j) g.col(j) = rng.gaussian_vector(d);
    Mat q = orthonormalize(g);
    if (q.size() != 0) return q;
  }
}

bool flat_hits_body(const BodyDescriptor& body, const AffineSubspace& flat) {
  if (body.kind != BodyKind::kPolytope) {
    // The flat meets the ellipsoid iff the restricted quadratic form dips
    // below 1: rho > 0 in the section parameterization.
    const Mat& u = flat.directions;
    Vec y = flat.base - body.center;
    Mat m = u.transpose() * body.shape * u;
    Vec beta = u.transpose() * (body.shape * y);
    const double gamma = y.dot(body.shape * y) - 1.0;
    Vec z0 = m.ldlt().solve(-beta);
    return -gamma - beta.dot(z0) > 1e-12;
  }
  if (flat.dim() == 1) {
    return line_intersect(body, flat).hit;
  }
  if (flat.dim() == 2 && body.dim == 3) {
    return plane_section(body, flat).has_value();
  }
  throw std::invalid_argument("flat_hits_body: unsupported polytope flat dimension");
}

WeightedSample<AffineSubspace> sample_affine_hitting(const BodyDescriptor& body,
                                                     int l, RngStream& rng) {
  const int d = body.dim;
  if (l < 1 || l > d) throw std::invalid_argument("sample_affine_hitting: need 1 <= l <= d");
  const double r = body.enclosing_radius;

  WeightedSample<AffineSubspace> out;
  Mat frame = sample_grassmannian(d, l, rng);
  Vec point = body.reference_point;
  if (l < d) {
    Mat comp = orthonormal_complement(frame);
    point += comp * rng.ball_point(d - l, r);
  }
  out.value = make_affine_subspace(frame, point);
  out.weight = unit_ball_volume(d - l) * std::pow(r, d - l);
  out.hit = flat_hits_body(body, out.value);
  return out;
}

AffineSubspace sample_plane_containing_line(const AffineSubspace& line,
                                            RngStream& rng) {
  const int d = line.ambient_dim();
  if (d < 3) throw std::invalid_argument("sample_plane_containing_line: need d >= 3");
  if (line.dim() != 1) throw std::invalid_argument("sample_plane_containing_line: line required");
  Mat comp = line.orthogonal_complement();  // d x (d-1)
  Vec u_e = comp * rng.unit_vector(d - 1);
  Mat dirs(d, 2);
  dirs.col(0) = line.directions.col(0);
  dirs.col(1) = u_e;
  return make_affine_subspace(dirs, line.base);
}

Vec sample_simplex_point(const Mat& vertices, RngStream& rng) {
  const int k = static_cast<int>(vertices.rows());
  double total = 0.0;
  Vec w(k);
  for (int i = 0; i < k; ++i) {
    w[i] = rng.exponential();
    total += w[i];
  }
  return vertices.transpose() * (w / total);
}

WeightedSample<BoundaryPoint> sample_surface(const BodyDescriptor& body,
                                             RngStream& rng) {
  const int d = body.dim;
  WeightedSample<BoundaryPoint> out;
  out.hit = true;

  if (body.kind == BodyKind::kBall) {
    Vec s = rng.unit_vector(d);
    out.value.position = body.center + body.radius * s;
    out.value.normal = s;
    out.weight = unit_sphere_area(d) * std::pow(body.radius, d - 1);
    return out;
  }

  if (body.kind == BodyKind::kEllipsoid) {
    // Map the uniform sphere point s to the boundary via x = c + Q^{-1/2} s.
    // The area element transforms with Jacobian det(Q^{-1/2}) * |Q^{1/2} s|,
    // giving an exact importance weight relative to uniform-s sampling.
    Vec s = rng.unit_vector(d);
    out.value.position = body.center + body.shape_inv_sqrt * s;
    out.value.normal = (body.shape_sqrt * s).normalized();
    const double det_inv_sqrt = body.volume / unit_ball_volume(d);
    out.weight = unit_sphere_area(d) * det_inv_sqrt * (body.shape_sqrt * s).norm();
    return out;
  }

  // Polytope: facet proportional to area, simplex proportional to area,
  // uniform barycentric point; redraw anything within 1e-9 of another facet.
  for (int attempt = 0; attempt < 1000; ++attempt) {
    double target = rng.uniform() * body.surface_area;
    int facet = 0;
    double acc = 0.0;
    for (size_t i = 0; i < body.facets.size(); ++i) {
      acc += body.facets[i].area;
      if (target <= acc || i + 1 == body.facets.size()) {
        facet = static_cast<int>(i);
        break;
      }
    }
    const FacetRecord& f = body.facets[facet];
    auto it = std::lower_bound(f.simplex_cumulative.begin(), f.simplex_cumulative.end(),
                               rng.uniform() * f.area);
    const int si = static_cast<int>(
        std::min<std::ptrdiff_t>(it - f.simplex_cumulative.begin(),
                                 static_cast<std::ptrdiff_t>(f.simplices.size()) - 1));
    Vec x = sample_simplex_point(f.simplices[si], rng);

    bool ridge = false;
    for (size_t i = 0; i < body.facets.size(); ++i) {
      if (static_cast<int>(i) == facet) continue;
      const auto& g = body.facets[i];
      if (std::abs(g.normal.dot(x) - g.offset) <= 1e-9) {
        ridge = true;
        break;
      }
    }
    if (ridge) continue;

    out.value.position = x;
    out.value.normal = f.normal;
    out.value.facet = facet;
    out.weight = body.surface_area;
    return out;
  }
  throw std::runtime_error("sample_surface: persistent ridge rejections");
}

WeightedSample<Vec> sample_interior(const BodyDescriptor& body, RngStream& rng) {
  WeightedSample<Vec> out;
  const int d = body.dim;
  if (body.kind != BodyKind::kPolytope) {
    out.value = body.center + body.shape_inv_sqrt * rng.ball_point(d);
    out.weight = body.volume;
    out.hit = true;
    return out;
  }
  BoundingBox box = bounding_box(body);
  Vec x(d);
  for (int i = 0; i < d; ++i) x[i] = rng.uniform(box.lo[i], box.hi[i]);
  out.value = x;
  out.weight = box.volume();
  out.hit = body.contains(x, 1e-12);
  return out;
}

FlatLineSample lines_within_flat(const BodyDescriptor& section, RngStream& rng) {
  if (!section.frame.has_value()) {
    throw std::invalid_argument("lines_within_flat: section body carries no frame");
  }
  const AffineSubspace& frame = *section.frame;
  FlatLineSample out;

  if (section.dim == 1) {
    // Inside a 1-flat the only line is the flat itself; the intrinsic measure
    // normalization gives it weight kappa_0 = 1.
    out.intrinsic = make_affine_subspace(Mat::Identity(1, 1), Vec::Zero(1));
    out.ambient = frame;
    out.weight = 1.0;
    out.hit = true;
    return out;
  }

  WeightedSample<AffineSubspace> inner = sample_affine_hitting(section, 1, rng);
  out.intrinsic = inner.value;
  out.weight = inner.weight;
  out.hit = inner.hit;
  Mat dirs = frame.directions * inner.value.directions;  // d x 1
  out.ambient = make_affine_subspace(dirs, frame.embed(inner.value.base));
  return out;
}

}  // namespace crofton
