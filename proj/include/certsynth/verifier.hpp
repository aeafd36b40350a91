#pragma once

#include <optional>
#include <string>
#include <vector>

#include "certsynth/certificate.hpp"
#include "certsynth/geometry.hpp"
#include "certsynth/interval.hpp"

namespace certsynth {

enum class VerdictKind { kValid, kCounterexample, kDeltaSat, kResourceOut };

const char* verdict_name(VerdictKind k);

struct Verdict {
  VerdictKind kind = VerdictKind::kValid;
  std::vector<double> point;  // witness for kCounterexample / kDeltaSat
  std::string condition_id;
  double violation = 0.0;  // goal slack at the witness
  long boxes = 0;
  double seconds = 0.0;
  std::string detail;

  bool valid() const { return kind == VerdictKind::kValid; }
  bool has_witness() const { return kind == VerdictKind::kCounterexample || kind == VerdictKind::kDeltaSat; }
};

struct VerifierConfig {
  double delta = 1e-4;
  long max_splits = 2'000'000;
  double timeout_s = 300.0;
  /// When non-empty, every query is also written here as SMT-LIB 2 text.
  std::string smt_dump_dir;
};

/// Searches the box for a point satisfying domain and goal. Equality atoms
/// are relaxed to |g - c| <= delta.
Verdict check(const ConditionQuery& q, const VerifierConfig& cfg);

/// SMT-LIB 2 rendering of a query (diagnostic only).
std::string to_smtlib(const ConditionQuery& q, double delta, const std::string& name = "");

struct VerificationReport {
  std::vector<Verdict> verdicts;  // in condition order, up to the first failure
  bool all_valid() const;
  /// First non-valid verdict, if any.
  const Verdict* failure() const;
};

/// Runs check() per condition and stops at the first counterexample,
/// delta-sat witness or resource exhaustion. Conditions that depend on the
/// RSWA beta are skipped unless `include_beta_dependent` is set.
VerificationReport verify_certificate(const PropertyProblem& p, const std::vector<Condition>& conditions,
                                      const SymbolicCertificate& cert, const VerifierConfig& cfg,
                                      bool include_beta_dependent = true);

struct BetaSearchResult {
  std::optional<double> beta;
  std::vector<double> grid;
  bool resource_out = false;
  std::string detail;
};

/// Line search over a descending grid of 10 beta values; returns the first
/// negative beta for which both beta-dependent RSWA conditions verify.
BetaSearchResult rswa_beta_search(const PropertyProblem& p, const std::vector<Condition>& conditions,
                                  const SymbolicCertificate& cert, const VerifierConfig& cfg, Rng& rng,
                                  int n_samples = 2000);

/// Closed-loop vector field of a problem under the certificate's controller.
VectorField closed_loop_of(const PropertyProblem& p, const SymbolicCertificate& cert);

}  // namespace certsynth
