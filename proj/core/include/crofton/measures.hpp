#pragma once

// Samplers realizing the invariant measures this library integrates against:
//
//  * mu_{d,l}: the rigid-motion-invariant measure on affine l-flats of R^d,
//    normalized so that the flats hitting a unit ball have measure
//    kappa_{d-l} (the volume of the unit (d-l)-ball).  Realized by a uniform
//    direction frame plus a uniform offset in a (d-l)-ball of the body's
//    enclosing radius R; every sample carries the constant importance weight
//    kappa_{d-l} R^{d-l} and a hit flag, so
//        (1/N) sum_i weight_i * f(E_i) * hit_i  ->  int f(E) 1{E hits K} dmu.
//  * The same measure applied intrinsically inside a flat (lines within a
//    planar section or facet), with the same normalization one dimension down.
//  * The probability measure on 2-planes containing a fixed line G: uniform
//    unit vector in the orthogonal complement of G.
//  * Surface measure sigma on the boundary (Hausdorff (d-1)-measure), via
//    exact-area facet sampling for polytopes and importance weights for
//    ellipsoids.
//  * Lebesgue measure on the interior.
//
// All samplers are pure functions of (body, rng); determinism and shard
// independence come from the keyed RngStream.

#include "crofton/geometry.hpp"
#include "crofton/rng.hpp"

namespace crofton {

// A draw together with its importance weight: the weighted mean of f(value)
// over draws (zero when hit is false) estimates the integral of f against the
// target measure.
template <typename T>
struct WeightedSample {
  T value;
  double weight = 0.0;
  bool hit = false;
};

// Uniform (rotation-invariant) orthonormal l-frame in R^d: orthonormalized
// independent standard Gaussian vectors.
Mat sample_grassmannian(int d, int l, RngStream& rng);

// Random l-flat from mu_{d,l} restricted to flats within the body's enclosing
// ball; weight = kappa_{d-l} * R^{d-l}, hit = (flat intersects the body).
WeightedSample<AffineSubspace> sample_affine_hitting(const BodyDescriptor& body,
                                                     int l, RngStream& rng);

// Uniform 2-plane containing the given line: direction span is {line
// direction, u_E} with u_E uniform on the unit sphere of the line's
// orthogonal complement.  This is a probability measure (weight 1).
AffineSubspace sample_plane_containing_line(const AffineSubspace& line,
                                            RngStream& rng);

// Boundary point with weight such that the weighted mean estimates the
// surface integral: constant weight = area for balls/polytopes, Jacobian
// importance weight for ellipsoids.  Polytope draws landing within 1e-9 of a
// ridge are resampled.
WeightedSample<BoundaryPoint> sample_surface(const BodyDescriptor& body,
                                             RngStream& rng);

// Interior point with weight such that the weighted mean estimates the
// Lebesgue integral over the body.  Ellipsoids: exact (affine image of a
// uniform ball point, weight = volume, always hit).  Polytopes: uniform in
// the bounding box with weight = box volume and hit = membership.
WeightedSample<Vec> sample_interior(const BodyDescriptor& body, RngStream& rng);

// A line sampled from the intrinsic measure mu_{l,1} inside the flat that a
// section body lives in, in both coordinate systems.  For a 1-dimensional
// section (a facet edge of a planar body) the only "line" is the flat itself,
// returned with weight kappa_0 = 1.
struct FlatLineSample {
  AffineSubspace ambient;    // the line re-embedded in ambient coordinates
  AffineSubspace intrinsic;  // the same line in the flat's own coordinates
  double weight = 0.0;
  bool hit = false;
};

FlatLineSample lines_within_flat(const BodyDescriptor& section, RngStream& rng);

// True when the flat meets the body (interior intersection of positive
// relative measure; tangential grazes count as misses).
bool flat_hits_body(const BodyDescriptor& body, const AffineSubspace& flat);

// Uniform point in a simplex given its vertices (rows), via normalized
// exponential (Dirichlet) weights.
Vec sample_simplex_point(const Mat& vertices, RngStream& rng);

}  // namespace crofton
