#pragma once

// Dimensional constants of integral geometry: ball volumes, sphere areas,
// and the normalizing constants that relate joint point measures to flat
// measures.  Everything here is exact up to floating-point rounding.

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace crofton {

// Volume of the unit ball in R^k.  kappa_0 = 1 by convention (a point has
// counting measure one), kappa_1 = 2, kappa_2 = pi, kappa_3 = 4pi/3, ...
inline double unit_ball_volume(int k) {
  if (k < 0) throw std::invalid_argument("unit_ball_volume: negative dimension");
  return std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

// Surface area of the unit sphere S^{k-1} in R^k: omega_k = k * kappa_k.
// omega_1 = 2 (two endpoints of an interval), omega_2 = 2pi, omega_3 = 4pi.
inline double unit_sphere_area(int k) {
  if (k < 1) throw std::invalid_argument("unit_sphere_area: dimension must be >= 1");
  return k * unit_ball_volume(k);
}

// Ratio of sphere areas b_{d,l} = (omega_{d-l+1} ... omega_d) / (omega_1 ... omega_l).
// This is the constant that converts the (l+1)-point Lebesgue measure into the
// measure on l-flats weighted by the section volume; b_{d,1} = omega_d / 2.
inline double flat_measure_ratio(int d, int l) {
  if (l < 1 || l >= d) throw std::invalid_argument("flat_measure_ratio: need 1 <= l < d");
  double num = 1.0, den = 1.0;
  for (int k = d - l + 1; k <= d; ++k) num *= unit_sphere_area(k);
  for (int k = 1; k <= l; ++k) den *= unit_sphere_area(k);
  return num / den;
}

// Coefficient of the boundary-flat term when a chord functional over a convex
// polytope is split into the interior (cotangent) part and the part carried by
// lines inside facet hyperplanes: beta_d = omega_{d+1} / (2 pi omega_d).
// beta_2 = 1/pi, beta_3 = 1/4, beta_4 = 4/(9 pi) * ... computed exactly here.
inline double facet_term_coefficient(int d) {
  return unit_sphere_area(d + 1) / (2.0 * std::numbers::pi * unit_sphere_area(d));
}

// Mean norm of the orthogonal projection of a fixed unit vector onto a
// uniformly random 2-plane in R^d: (sqrt(pi)/2) * Gamma(d/2) / Gamma((d+1)/2).
// Equals pi * beta_d; appears when line measures inside a fixed hyperplane are
// compared with the ambient line measure.
inline double mean_projection_norm_onto_plane(int d) {
  if (d < 2) throw std::invalid_argument("mean_projection_norm_onto_plane: d >= 2");
  return 0.5 * std::sqrt(std::numbers::pi) * std::tgamma(0.5 * d) /
         std::tgamma(0.5 * (d + 1));
}

// Factorial as a double (exact for n <= 22).
inline double factorial(int n) {
  if (n < 0) throw std::invalid_argument("factorial: negative argument");
  double r = 1.0;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

}  // namespace crofton
