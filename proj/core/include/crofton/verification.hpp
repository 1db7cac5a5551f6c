#pragma once

// Verification harness: packages each integral-geometric identity as a named
// case, runs its Monte Carlo estimators with deterministic stream assignment,
// and reports both sides with standard errors and a z-score.
//
// Determinism contract: a case's random streams are keyed by
// (seed, case-id stream base + role + shard), and shard reductions happen in
// shard order, so two runs with identical (case, config, seed, shards) produce
// byte-identical serialized reports regardless of thread scheduling.
//
// Pass rule: |z| <= z_threshold and degeneracy rejections below one per
// thousand draws.  Deterministic lemma cases (cot-lemma, the quadrature
// sub-checks of sphere-product) pass on absolute residual thresholds instead.

#include <cstdint>
#include <string>
#include <vector>

#include "crofton/functionals.hpp"

namespace crofton {

struct CaseConfig {
  std::string case_id;
  std::string body_spec;  // empty = case default (usually "ball")
  int dim = 0;            // 0 = body-registry default
  int l = -1;             // flat dimension; -1 = case default
  int k = -1;             // boundary-point count; -1 = case default
  int moment = -1;        // pair-distance exponent; -1 = case default
  double h_power = -1.0;  // chord-length test-function exponent; -1 = default
  std::uint64_t n = 100000;
  std::uint64_t seed = 1;
  int shards = 8;
  double z_threshold = 4.0;
  // Multiplies the right-hand-side prefactor; used by the sensitivity
  // self-test (a wrong constant must be detected, not absorbed).
  double prefactor_scale = 1.0;
};

struct TermReport {
  std::string name;
  double mean = 0.0;
  double se = 0.0;
  std::uint64_t n = 0;
  std::uint64_t rejected = 0;
};

struct VerificationReport {
  std::string case_id;
  CaseConfig config;  // with defaults resolved
  TermReport lhs;
  TermReport rhs;
  std::vector<TermReport> terms;  // decomposition / diagnostic terms
  double z = 0.0;
  bool pass = false;
  std::uint64_t rejections = 0;  // total across all estimators
  std::string detail;            // deterministic extra diagnostics
  double seconds = 0.0;          // wall time; console-only, never serialized
};

// Monomial test function h(t) = t^p with derivative and antiderivative.
TestFunction monomial_test_function(double power);

// All recognized case ids, in registry order.
const std::vector<std::string>& known_case_ids();

// Runs one verification case.  Throws std::invalid_argument for unknown case
// ids or configurations that violate a case precondition (for example a
// smooth-body identity applied to a polytope).
VerificationReport run_case(const CaseConfig& config);

// Estimates the undetermined constant of the two-point boundary identity as
// the ratio LHS / (RHS with unit prefactor), with a delta-method standard
// error.  Supported for case ids "thm1" and "pleijel2d".
struct FitResult {
  double ratio = 0.0;
  double se = 0.0;
};
FitResult fit_constant(const CaseConfig& config);

enum class SuiteKind { kSmoke, kFull };

// Runs the built-in suite: every case id over its reference bodies, with
// n = 1e5 (smoke) or 1e6 (full) samples per estimator.
std::vector<VerificationReport> run_suite(SuiteKind kind, std::uint64_t seed,
                                          int shards);

// Serializers.  Deterministic for identical report contents; the wall-time
// field is intentionally excluded.
std::string report_to_json(const VerificationReport& report);
std::string reports_to_json(const std::vector<VerificationReport>& reports);
std::string reports_to_csv(const std::vector<VerificationReport>& reports);

}  // namespace crofton
