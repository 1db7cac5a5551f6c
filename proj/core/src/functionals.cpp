#include "crofton/functionals.hpp"

#include "crofton/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace crofton {

namespace {

// Stream-id layout: stream = base + role * 2^16 + shard.  Roles separate the
// independent estimators inside one check; bases separate cases (spaced by
// 2^32 in the verification layer), so no two estimators ever share a stream.
constexpr std::uint64_t kRoleStride = 1ull << 16;
constexpr std::uint64_t kRoleLhs = 1;
constexpr std::uint64_t kRoleRhs = 2;
constexpr std::uint64_t kRoleCot = 3;
constexpr std::uint64_t kRoleMixed = 4;
constexpr std::uint64_t kRoleOrder1 = 5;
constexpr std::uint64_t kRoleOrder2 = 6;
constexpr std::uint64_t kRoleFacetBase = 64;
constexpr std::uint64_t kRoleSameFacetBase = 1024;

Chord chord_from_pair(const BoundaryPoint& a, const BoundaryPoint& b) {
  Chord c;
  c.hit = true;
  c.p1 = a.position;
  c.p2 = b.position;
  c.length = (b.position - a.position).norm();
  c.n1 = a.normal;
  c.n2 = b.normal;
  c.facet1 = a.facet;
  c.facet2 = b.facet;
  return c;
}

void require_smooth(const BodyDescriptor& body, const char* who) {
  if (body.kind == BodyKind::kPolytope) {
    throw std::invalid_argument(std::string(who) + ": smooth body required");
  }
}

}  // namespace

double z_score(const MCEstimate& lhs, const MCEstimate& rhs) {
  const double denom = std::sqrt(lhs.se * lhs.se + rhs.se * rhs.se);
  if (denom == 0.0) {
    if (lhs.mean == rhs.mean) return 0.0;
    return lhs.mean > rhs.mean ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
  }
  return (lhs.mean - rhs.mean) / denom;
}

double z_score(const MCEstimate& est, double exact) {
  MCEstimate e;
  e.mean = exact;
  e.se = 0.0;
  return z_score(est, e);
}

MCEstimate sum_independent(const std::vector<MCEstimate>& terms) {
  MCEstimate out;
  double var = 0.0;
  for (const auto& t : terms) {
    out.mean += t.mean;
    var += t.se * t.se;
    out.n += t.n;
    out.rejected += t.rejected;
  }
  out.se = std::sqrt(var);
  return out;
}

MCEstimate mc_run(const EstimatorOptions& opt, std::uint64_t stream_role,
                  const SampleDraw& draw) {
  const std::uint64_t n = std::max<std::uint64_t>(1, opt.n);
  const int shards = static_cast<int>(
      std::min<std::uint64_t>(std::max(1, opt.shards), n));

  struct ShardAccum {
    double sum = 0.0, sumsq = 0.0;
    std::uint64_t count = 0, rejected = 0;
  };
  std::vector<ShardAccum> acc(shards);

  auto work = [&](int s) {
    RngStream rng(opt.seed, opt.stream_base + stream_role * kRoleStride +
                                static_cast<std::uint64_t>(s));
    std::uint64_t count = n / shards + (static_cast<std::uint64_t>(s) < n % shards ? 1 : 0);
    ShardAccum a;
    for (std::uint64_t i = 0; i < count; ++i) {
      bool rejected = false;
      double v = draw(rng, rejected);
      if (rejected) {
        ++a.rejected;
        v = 0.0;
      }
      a.sum += v;
      a.sumsq += v * v;
    }
    a.count = count;
    acc[s] = a;
  };

  if (shards == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(shards);
    for (int s = 0; s < shards; ++s) threads.emplace_back(work, s);
    for (auto& t : threads) t.join();
  }

  // Deterministic shard-ordered reduction.
  double sum = 0.0, sumsq = 0.0;
  MCEstimate out;
  for (const auto& a : acc) {
    sum += a.sum;
    sumsq += a.sumsq;
    out.n += a.count;
    out.rejected += a.rejected;
  }
  const double nn = static_cast<double>(out.n);
  out.mean = sum / nn;
  if (out.n > 1) {
    const double var = std::max(0.0, (sumsq - nn * out.mean * out.mean) / (nn - 1.0));
    out.se = std::sqrt(var / nn);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Chord-functional identities
// ---------------------------------------------------------------------------

MCEstimate chord_functional_lhs(const BodyDescriptor& body, const TestFunction& h,
                                const EstimatorOptions& opt) {
  return mc_run(opt, kRoleLhs, [&](RngStream& rng, bool& rejected) {
    auto flat = sample_affine_hitting(body, 1, rng);
    if (!flat.hit) return 0.0;
    Chord c = line_intersect(body, flat.value);
    if (!c.hit) return 0.0;
    if (c.degenerate) {
      rejected = true;
      return 0.0;
    }
    return flat.weight * h.h(c.length);
  });
}

MCEstimate thm1_rhs(const BodyDescriptor& body, const TestFunction& h,
                    const EstimatorOptions& opt, double prefactor_scale) {
  require_smooth(body, "thm1_rhs");
  const int d = body.dim;
  if (d < 2) throw std::invalid_argument("thm1_rhs: need d >= 2");
  const double pref =
      prefactor_scale / ((d - 1) * unit_sphere_area(d));
  return mc_run(opt, kRoleRhs, [&, pref, d](RngStream& rng, bool& rejected) {
    auto a = sample_surface(body, rng);
    auto b = sample_surface(body, rng);
    const double r = (b.value.position - a.value.position).norm();
    if (r < 1e-12) {
      rejected = true;
      return 0.0;
    }
    ChordAngles ang = chord_angles(chord_from_pair(a.value, b.value));
    if (ang.degenerate) {
      rejected = true;
      return 0.0;
    }
    return pref * a.weight * b.weight * h.dh(r) / std::pow(r, d - 2) * ang.cos1 *
           ang.cos2 * ang.cos_phi0;
  });
}

MCEstimate pleijel_rhs_2d(const BodyDescriptor& body, const TestFunction& h,
                          const EstimatorOptions& opt) {
  if (body.dim != 2) throw std::invalid_argument("pleijel_rhs_2d: need d = 2");
  return thm1_rhs(body, h, opt);
}

MCEstimate pleijel_cot_rhs(const BodyDescriptor& body, const TestFunction& h,
                           const EstimatorOptions& opt) {
  if (body.dim != 2) throw std::invalid_argument("pleijel_cot_rhs: need d = 2");
  const double tol = opt.degeneracy_tol;
  return mc_run(opt, kRoleRhs, [&, tol](RngStream& rng, bool& rejected) {
    auto flat = sample_affine_hitting(body, 1, rng);
    if (!flat.hit) return 0.0;
    Chord c = line_intersect(body, flat.value);
    if (!c.hit) return 0.0;
    if (c.degenerate) {
      rejected = true;
      return 0.0;
    }
    ChordAngles ang = chord_angles(c);
    if (ang.sin1 < tol || ang.sin2 < tol) {
      rejected = true;
      return 0.0;
    }
    if (ang.degenerate) return 0.0;  // cot factor vanishes
    return flat.weight * h.dh(c.length) * c.length * (ang.cos1 / ang.sin1) *
           (ang.cos2 / ang.sin2) * ang.cos_phi0;
  });
}

double perimeter_quadrature(const BodyDescriptor& body) {
  require_smooth(body, "perimeter_quadrature");
  if (body.dim != 2) throw std::invalid_argument("perimeter_quadrature: need d = 2");
  // Trapezoid rule on the periodic boundary parameterization x = c + A s(t):
  // spectrally accurate for smooth integrands.
  const int n = 1 << 13;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * i / n;
    Vec tangent(2);
    tangent << -std::sin(t), std::cos(t);
    total += (body.shape_inv_sqrt * tangent).norm();
  }
  return total * 2.0 * std::numbers::pi / n;
}

DefectResult isoperimetric_defect(const BodyDescriptor& body,
                                  const EstimatorOptions& opt) {
  require_smooth(body, "isoperimetric_defect");
  if (body.dim != 2) throw std::invalid_argument("isoperimetric_defect: need d = 2");
  DefectResult out;
  const double p = perimeter_quadrature(body);
  out.lhs = p * p - 4.0 * std::numbers::pi * body.volume;
  out.rhs = mc_run(opt, kRoleRhs, [&](RngStream& rng, bool& rejected) {
    auto a = sample_surface(body, rng);
    auto b = sample_surface(body, rng);
    const double r = (b.value.position - a.value.position).norm();
    if (r < 1e-12) {
      rejected = true;
      return 0.0;
    }
    ChordAngles ang = chord_angles(chord_from_pair(a.value, b.value));
    // Angles between chord and tangent, measured with a common orientation
    // along the chord; in the plane cos_phi0 = +-1 carries that orientation,
    // so 1 - cos(a1 - a2) = 1 - c1 c2 cos_phi0 - s1 s2.
    const double alpha1 = std::atan2(ang.sin1, ang.cos1);
    const double alpha2 = std::atan2(ang.sin2, ang.cos2 * ang.cos_phi0);
    const double s = std::sin(0.5 * (alpha1 - alpha2));
    return 2.0 * a.weight * b.weight * s * s;
  });
  return out;
}

Thm2Result thm2_check(const BodyDescriptor& polytope, const TestFunction& h,
                      const EstimatorOptions& opt) {
  if (polytope.kind != BodyKind::kPolytope || polytope.dim < 3) {
    throw std::invalid_argument("thm2_check: polytope with d >= 3 required");
  }
  const int d = polytope.dim;
  const double tol = opt.degeneracy_tol;
  Thm2Result out;
  out.lhs = chord_functional_lhs(polytope, h, opt);

  out.cot_term = mc_run(opt, kRoleCot, [&, tol, d](RngStream& rng, bool& rejected) {
    auto flat = sample_affine_hitting(polytope, 1, rng);
    if (!flat.hit) return 0.0;
    Chord c = line_intersect(polytope, flat.value);
    if (!c.hit) return 0.0;
    if (c.degenerate || c.facet1 == c.facet2) {
      rejected = true;
      return 0.0;
    }
    ChordAngles ang = chord_angles(c);
    if (ang.sin1 < tol || ang.sin2 < tol) {
      rejected = true;
      return 0.0;
    }
    if (ang.degenerate) return 0.0;
    return flat.weight / (d - 1) * h.dh(c.length) * c.length *
           (ang.cos1 / ang.sin1) * (ang.cos2 / ang.sin2) * ang.cos_phi0;
  });

  // Lines inside each facet hyperplane, converted to the ambient line-measure
  // normalization by beta_d.
  const double beta = facet_term_coefficient(d);
  std::vector<MCEstimate> facet_terms;
  for (size_t i = 0; i < polytope.facets.size(); ++i) {
    BodyDescriptor facet = facet_body(polytope, static_cast<int>(i));
    MCEstimate est = mc_run(
        opt, kRoleFacetBase + i, [&](RngStream& rng, bool&) {
          FlatLineSample line = lines_within_flat(facet, rng);
          if (!line.hit) return 0.0;
          Chord c = line_intersect(facet, line.intrinsic);
          if (!c.hit) return 0.0;
          return beta * line.weight * h.antiderivative(c.length);
        });
    facet_terms.push_back(est);
  }
  out.facet_term = sum_independent(facet_terms);
  return out;
}

// ---------------------------------------------------------------------------
// Flat / point-tuple identities
// ---------------------------------------------------------------------------

namespace {

double pair_distance_power(const Vec& a, const Vec& b, int moment) {
  if (moment == 0) return 1.0;
  return std::pow((a - b).norm(), moment);
}

}  // namespace

PairResult bpf_check(const BodyDescriptor& body, int l, int moment,
                     const EstimatorOptions& opt) {
  const int d = body.dim;
  if (l < 1 || l >= d) throw std::invalid_argument("bpf_check: need 1 <= l < d");
  if (body.kind == BodyKind::kPolytope && l != 1 && !(l == 2 && d == 3)) {
    throw std::invalid_argument(
        "bpf_check: polytope sections support l = 1, or l = 2 at d = 3");
  }
  PairResult out;

  out.lhs = mc_run(opt, kRoleLhs, [&, l, moment](RngStream& rng, bool&) {
    double w = 1.0;
    std::vector<Vec> pts(l + 1);
    for (int i = 0; i <= l; ++i) {
      auto s = sample_interior(body, rng);
      if (!s.hit) return 0.0;
      w *= s.weight;
      pts[i] = std::move(s.value);
    }
    return w * pair_distance_power(pts[0], pts[1], moment);
  });

  const double pref =
      std::pow(factorial(l), d - l) * flat_measure_ratio(d, l);
  out.rhs = mc_run(opt, kRoleRhs, [&, l, d, moment, pref](RngStream& rng, bool&) {
    auto flat = sample_affine_hitting(body, l, rng);
    if (!flat.hit) return 0.0;
    auto section = plane_section(body, flat.value);
    if (!section) return 0.0;
    double w = flat.weight;
    Mat pts(l + 1, d);
    for (int i = 0; i <= l; ++i) {
      auto s = sample_interior(*section, rng);
      if (!s.hit) return 0.0;
      w *= s.weight;
      pts.row(i) = flat.value.embed(s.value).transpose();
    }
    const double conv = simplex_volume(pts);
    return pref * w * std::pow(conv, d - l) *
           pair_distance_power(pts.row(0).transpose(), pts.row(1).transpose(), moment);
  });
  return out;
}

PairResult zahle_two_point_check(const BodyDescriptor& body, int moment,
                                 const EstimatorOptions& opt) {
  require_smooth(body, "zahle_two_point_check");
  const int d = body.dim;
  PairResult out;

  out.lhs = mc_run(opt, kRoleLhs, [&, moment](RngStream& rng, bool&) {
    auto flat = sample_affine_hitting(body, 1, rng);
    if (!flat.hit) return 0.0;
    Chord c = line_intersect(body, flat.value);
    if (!c.hit) return 0.0;
    return flat.weight * std::pow(c.length, moment);
  });

  const double inv_area = 1.0 / unit_sphere_area(d);
  out.rhs = mc_run(opt, kRoleRhs, [&, d, moment, inv_area](RngStream& rng, bool& rejected) {
    auto a = sample_surface(body, rng);
    auto b = sample_surface(body, rng);
    const double r = (b.value.position - a.value.position).norm();
    if (r < 1e-12) {
      rejected = true;
      return 0.0;
    }
    ChordAngles ang = chord_angles(chord_from_pair(a.value, b.value));
    return inv_area * a.weight * b.weight * std::pow(r, moment) * ang.sin1 *
           ang.sin2 / std::pow(r, d - 1);
  });
  return out;
}

PairResult thm3_check(const BodyDescriptor& body, int l, int k, int moment,
                      const EstimatorOptions& opt) {
  require_smooth(body, "thm3_check");
  const int d = body.dim;
  if (l < 1 || l >= d) throw std::invalid_argument("thm3_check: need 1 <= l < d");
  if (k < 0 || k > l + 1) throw std::invalid_argument("thm3_check: need 0 <= k <= l+1");
  if (l == 2 && d != 3) {
    throw std::invalid_argument("thm3_check: l = 2 is supported at d = 3");
  }
  if (l > 2) throw std::invalid_argument("thm3_check: l <= 2 supported");
  const int interior_count = l + 1 - k;
  const double tol = opt.degeneracy_tol;
  PairResult out;

  out.lhs = mc_run(opt, kRoleLhs, [&, interior_count, k, moment](RngStream& rng, bool& rejected) {
    double w = 1.0;
    std::vector<Vec> pts;
    pts.reserve(interior_count + k);
    for (int i = 0; i < interior_count; ++i) {
      auto s = sample_interior(body, rng);
      if (!s.hit) return 0.0;
      w *= s.weight;
      pts.push_back(std::move(s.value));
    }
    for (int i = 0; i < k; ++i) {
      auto s = sample_surface(body, rng);
      w *= s.weight;
      pts.push_back(std::move(s.value.position));
    }
    if (pts.size() >= 2 && moment > 0 && (pts[0] - pts[1]).norm() < 1e-12) {
      rejected = true;
      return 0.0;
    }
    return w * pair_distance_power(pts[0], pts[1], moment);
  });

  const double pref = std::pow(factorial(l), d - l) * flat_measure_ratio(d, l);

  if (l == 1) {
    // Section boundary = the two chord endpoints with counting measure and
    // ||P_E(n)|| = sin(alpha); sum over all assignments of endpoints to the
    // k boundary slots (tuples repeating an endpoint have |conv| = 0).
    out.rhs = mc_run(opt, kRoleRhs, [&, d, k, moment, pref, tol, interior_count](
                                        RngStream& rng, bool& rejected) {
      auto flat = sample_affine_hitting(body, 1, rng);
      if (!flat.hit) return 0.0;
      Chord c = line_intersect(body, flat.value);
      if (!c.hit) return 0.0;
      ChordAngles ang = chord_angles(c);
      if (k > 0 && (ang.sin1 < tol || ang.sin2 < tol)) {
        rejected = true;
        return 0.0;
      }
      double w = flat.weight;
      std::vector<Vec> pts(interior_count + k);
      for (int i = 0; i < interior_count; ++i) {
        pts[i] = c.p1 + rng.uniform() * (c.p2 - c.p1);
        w *= c.length;
      }
      const Vec endpoints[2] = {c.p1, c.p2};
      const double inv_sin[2] = {1.0 / ang.sin1, 1.0 / ang.sin2};
      double boundary_sum = 0.0;
      const int combos = 1 << k;
      for (int mask = 0; mask < combos; ++mask) {
        double term = 1.0;
        for (int j = 0; j < k; ++j) {
          const int which = (mask >> j) & 1;
          pts[interior_count + j] = endpoints[which];
          term *= inv_sin[which];
        }
        Mat tuple(static_cast<int>(pts.size()), d);
        for (size_t i = 0; i < pts.size(); ++i) tuple.row(i) = pts[i].transpose();
        const double conv = simplex_volume(tuple);
        if (conv <= 0.0) continue;
        term *= std::pow(conv, d - 1) *
                pair_distance_power(pts[0], pts[1], moment);
        boundary_sum += term;
      }
      return pref * w * boundary_sum;
    });
    return out;
  }

  // l == 2, d == 3: planes; interior points uniform in the section, boundary
  // points on the section curve weighted by arc length and 1/||P_E(n)||.
  out.rhs = mc_run(opt, kRoleRhs, [&, d, l, k, moment, pref, tol, interior_count](
                                      RngStream& rng, bool& rejected) {
    auto flat = sample_affine_hitting(body, l, rng);
    if (!flat.hit) return 0.0;
    auto section = plane_section(body, flat.value);
    if (!section) return 0.0;
    double w = flat.weight;
    Mat pts(interior_count + k, d);
    for (int i = 0; i < interior_count; ++i) {
      auto s = sample_interior(*section, rng);
      if (!s.hit) return 0.0;
      w *= s.weight;
      pts.row(i) = flat.value.embed(s.value).transpose();
    }
    for (int j = 0; j < k; ++j) {
      auto s = sample_surface(*section, rng);
      Vec x = flat.value.embed(s.value.position);
      auto n = normal_at(body, x, 1e-6);
      if (!n) {
        rejected = true;
        return 0.0;
      }
      const double pn = (flat.value.directions.transpose() * (*n)).norm();
      if (pn < tol) {
        rejected = true;
        return 0.0;
      }
      w *= s.weight / pn;
      pts.row(interior_count + j) = x.transpose();
    }
    const double conv = simplex_volume(pts);
    return pref * w * std::pow(conv, d - l) *
           pair_distance_power(pts.row(0).transpose(), pts.row(1).transpose(), moment);
  });
  return out;
}

PairResult kingman_check(const BodyDescriptor& body, int moment,
                         const EstimatorOptions& opt) {
  if (moment < 0) throw std::invalid_argument("kingman_check: need n >= 0");
  const int d = body.dim;
  PairResult out;

  out.lhs = mc_run(opt, kRoleLhs, [&, moment](RngStream& rng, bool&) {
    auto a = sample_interior(body, rng);
    auto b = sample_interior(body, rng);
    if (!a.hit || !b.hit) return 0.0;
    return a.weight * b.weight * pair_distance_power(a.value, b.value, moment);
  });

  const double pref =
      unit_sphere_area(d) / ((moment + d) * (moment + d + 1.0));
  out.rhs = mc_run(opt, kRoleRhs, [&, moment, d, pref](RngStream& rng, bool&) {
    auto flat = sample_affine_hitting(body, 1, rng);
    if (!flat.hit) return 0.0;
    Chord c = line_intersect(body, flat.value);
    if (!c.hit) return 0.0;
    return pref * flat.weight * std::pow(c.length, moment + d + 1);
  });
  return out;
}

PairResult corollary_check(const BodyDescriptor& body, int moment,
                           const EstimatorOptions& opt) {
  require_smooth(body, "corollary_check");
  if (moment < 0) throw std::invalid_argument("corollary_check: need n >= 0");
  const int d = body.dim;
  const double tol = opt.degeneracy_tol;
  PairResult out;

  out.lhs = mc_run(opt, kRoleLhs, [&, moment](RngStream& rng, bool&) {
    auto a = sample_surface(body, rng);
    auto b = sample_interior(body, rng);
    if (!b.hit) return 0.0;
    return a.weight * b.weight *
           pair_distance_power(a.value.position, b.value, moment);
  });

  // Closed-form chord integral of the interior point:
  //   int_0^len t^{n} t^{d-1} dt = len^{n+d}/(n+d)  per endpoint,
  // giving rhs = omega_d/(2(n+d)) E[w len^{n+d} (1/sin a1 + 1/sin a2)].
  const double pref = unit_sphere_area(d) / (2.0 * (moment + d));
  out.rhs = mc_run(opt, kRoleRhs, [&, moment, d, pref, tol](RngStream& rng, bool& rejected) {
    auto flat = sample_affine_hitting(body, 1, rng);
    if (!flat.hit) return 0.0;
    Chord c = line_intersect(body, flat.value);
    if (!c.hit) return 0.0;
    ChordAngles ang = chord_angles(c);
    if (ang.sin1 < tol || ang.sin2 < tol) {
      rejected = true;
      return 0.0;
    }
    return pref * flat.weight * std::pow(c.length, moment + d) *
           (1.0 / ang.sin1 + 1.0 / ang.sin2);
  });
  return out;
}

Thm4Result thm4_check(const BodyDescriptor& polytope, int moment,
                      const EstimatorOptions& opt) {
  if (polytope.kind != BodyKind::kPolytope || polytope.dim != 3) {
    throw std::invalid_argument("thm4_check: 3-dimensional polytope required");
  }
  const double tol = opt.degeneracy_tol;
  Thm4Result out;

  out.lhs = mc_run(opt, kRoleLhs, [&, moment](RngStream& rng, bool&) {
    auto a = sample_surface(polytope, rng);
    auto b = sample_surface(polytope, rng);
    return a.weight * b.weight *
           pair_distance_power(a.value.position, b.value.position, moment);
  });

  // Endpoint pairs on distinct facets: the two ordered endpoint assignments
  // of each chord, weighted by 1/(sin a1 sin a2) and |conv|^{d-l} = r^2.
  const double mixed_pref = 2.0 * flat_measure_ratio(3, 1);
  out.mixed_term = mc_run(opt, kRoleMixed, [&, moment, mixed_pref, tol](
                                               RngStream& rng, bool& rejected) {
    auto flat = sample_affine_hitting(polytope, 1, rng);
    if (!flat.hit) return 0.0;
    Chord c = line_intersect(polytope, flat.value);
    if (!c.hit) return 0.0;
    if (c.degenerate || c.facet1 == c.facet2) {
      rejected = true;
      return 0.0;
    }
    ChordAngles ang = chord_angles(c);
    if (ang.sin1 < tol || ang.sin2 < tol) {
      rejected = true;
      return 0.0;
    }
    return mixed_pref * flat.weight * std::pow(c.length, moment + 2) /
           (ang.sin1 * ang.sin2);
  });

  // Same-facet pairs: for each facet, lines inside its plane with two
  // uniform points on the in-facet chord.
  const double same_pref = flat_measure_ratio(2, 1);
  std::vector<MCEstimate> same_terms;
  for (size_t i = 0; i < polytope.facets.size(); ++i) {
    BodyDescriptor facet = facet_body(polytope, static_cast<int>(i));
    MCEstimate est = mc_run(
        opt, kRoleSameFacetBase + i, [&, moment, same_pref](RngStream& rng, bool&) {
          FlatLineSample line = lines_within_flat(facet, rng);
          if (!line.hit) return 0.0;
          Chord c = line_intersect(facet, line.intrinsic);
          if (!c.hit) return 0.0;
          const double t0 = rng.uniform();
          const double t1 = rng.uniform();
          const double r = std::abs(t0 - t1) * c.length;
          return same_pref * line.weight * c.length * c.length *
                 std::pow(r, moment + 1);
        });
    same_terms.push_back(est);
  }
  out.same_facet_term = sum_independent(same_terms);
  return out;
}

FlagResult flag_fubini_check(const BodyDescriptor& body, const TestFunction& h,
                             const EstimatorOptions& opt) {
  const int d = body.dim;
  if (d < 3) throw std::invalid_argument("flag_fubini_check: need d >= 3");
  FlagResult out;

  out.order1 = mc_run(opt, kRoleOrder1, [&](RngStream& rng, bool&) {
    auto plane = sample_affine_hitting(body, 2, rng);
    if (!plane.hit) return 0.0;
    auto section = plane_section(body, plane.value);
    if (!section) return 0.0;
    auto line = sample_affine_hitting(*section, 1, rng);
    if (!line.hit) return 0.0;
    Chord c = line_intersect(*section, line.value);
    if (!c.hit) return 0.0;
    return plane.weight * line.weight * h.h(c.length);
  });

  out.order2 = mc_run(opt, kRoleOrder2, [&](RngStream& rng, bool&) {
    auto flat = sample_affine_hitting(body, 1, rng);
    if (!flat.hit) return 0.0;
    Chord c = line_intersect(body, flat.value);
    if (!c.hit) return 0.0;
    // The containing plane is drawn from its probability measure; the inner
    // integrand h(|G∩K|) does not depend on it, so it enters with weight 1.
    (void)sample_plane_containing_line(flat.value, rng);
    return flat.weight * h.h(c.length);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic lemma checks
// ---------------------------------------------------------------------------

double CotLemmaResult::residual() const {
  return std::max(std::abs(lhs1 - rhs1), std::abs(lhs2 - rhs2));
}

CotLemmaResult cot_lemma_check(const BodyDescriptor& body, const Chord& chord,
                               const AffineSubspace& plane) {
  require_smooth(body, "cot_lemma_check");
  if (plane.dim() != 2) throw std::invalid_argument("cot_lemma_check: 2-plane required");
  CotLemmaResult out;

  auto section = plane_section(body, plane);
  if (!section) {
    out.degenerate = true;
    return out;
  }

  const Vec u_ambient = (chord.p2 - chord.p1).normalized();
  Eigen::Vector2d u_in = plane.directions.transpose() * u_ambient;
  if (std::abs(u_in.norm() - 1.0) > 1e-8) {
    throw std::invalid_argument("cot_lemma_check: chord does not lie in the plane");
  }
  u_in.normalize();
  // Intrinsic direction of u_E: the in-plane unit vector orthogonal to the
  // chord (either sign; both sides of the identity flip together).
  Eigen::Vector2d e_in(-u_in[1], u_in[0]);
  const Vec u_e = plane.directions * e_in;

  ChordAngles ang = chord_angles(chord);
  if (ang.degenerate) {
    out.degenerate = true;
    return out;
  }

  const Eigen::Vector2d z1 = plane.coords(chord.p1);
  const Eigen::Vector2d z2 = plane.coords(chord.p2);

  auto endpoint = [&](const Eigen::Vector2d& z, const Eigen::Vector2d& toward,
                      const Vec& u_proj, double cot_alpha, double& lhs,
                      double& rhs) {
    // In-plane outward normal of the section at z; tangent on the u_E side.
    Eigen::Vector2d m = section->shape * (z - section->center);
    m.normalize();
    Eigen::Vector2d tau(-m[1], m[0]);
    const double side = tau.dot(e_in);
    if (std::abs(side) < 1e-12) {
      out.degenerate = true;
      return;
    }
    if (side < 0.0) tau = -tau;
    const double sin_psi = tau.dot(e_in);
    const double cos_psi = tau.dot(toward);
    if (sin_psi < 1e-12) {
      out.degenerate = true;
      return;
    }
    lhs = cos_psi / sin_psi;
    rhs = u_proj.dot(u_e) * cot_alpha;
  };

  endpoint(z1, (z2 - z1).normalized(), ang.u1, ang.cos1 / ang.sin1, out.lhs1,
           out.rhs1);
  endpoint(z2, (z1 - z2).normalized(), ang.u2, ang.cos2 / ang.sin2, out.lhs2,
           out.rhs2);
  return out;
}

MCEstimate sphere_product_integral(const Vec& u1, const Vec& u2, int d,
                                   const EstimatorOptions& opt) {
  if (d < 3) throw std::invalid_argument("sphere_product_integral: need d >= 3");
  if (u1.size() != d || u2.size() != d) {
    throw std::invalid_argument("sphere_product_integral: vectors must be d-dimensional");
  }
  if (std::abs(u1[d - 1]) > 1e-12 || std::abs(u2[d - 1]) > 1e-12) {
    throw std::invalid_argument(
        "sphere_product_integral: vectors must lie in the hyperplane x_d = 0");
  }
  Vec a = u1.head(d - 1);
  Vec b = u2.head(d - 1);
  return mc_run(opt, kRoleRhs, [&, a, b, d](RngStream& rng, bool&) {
    Vec g = rng.unit_vector(d - 1);
    return a.dot(g) * b.dot(g);
  });
}

double circle_cosine_product_quadrature(double phi0) {
  // Composite Simpson on [0, 2pi].
  const int n = 1 << 16;  // even panel count
  const double h = 2.0 * std::numbers::pi / n;
  auto f = [&](double x) { return std::cos(x) * std::cos(x - phi0); };
  double sum = f(0.0) + f(2.0 * std::numbers::pi);
  for (int i = 1; i < n; ++i) sum += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0 / (2.0 * std::numbers::pi);
}

double ball_complement_moment_quadrature(int n) {
  if (n < 3) throw std::invalid_argument("ball_complement_moment_quadrature: need n >= 3");
  const int m = n - 2;  // dimension of the ball B^{n-2}
  // Normalized radial form: int_0^1 (1 - r^2) m r^{m-1} dr, by Simpson.
  const int panels = 1 << 12;
  const double h = 1.0 / panels;
  auto f = [&](double r) { return (1.0 - r * r) * m * std::pow(r, m - 1); };
  double sum = f(0.0) + f(1.0);
  for (int i = 1; i < panels; ++i) sum += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace crofton
