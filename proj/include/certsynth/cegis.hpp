#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "certsynth/certificate.hpp"
#include "certsynth/consolidator.hpp"
#include "certsynth/learner.hpp"
#include "certsynth/verifier.hpp"

namespace certsynth {

struct CegisConfig {
  /// 0 selects the default: 25 loops, 100 for SWA and RAR.
  int max_loops = 0;
  std::uint64_t seed = 0;
  TrainConfig train;
  VerifierConfig verifier;
  ConsolidatorConfig consolidator;
  double rounding = 1e-3;
  int level_samples = 2000;
  /// Optional progress sink, one line per event.
  std::function<void(const std::string&)> log;
};

int default_max_loops(PropertyKind k);

struct PhaseTimes {
  double learn_s = 0.0;
  double verify_s = 0.0;
  double total_s = 0.0;
};

struct SynthesisResult {
  bool success = false;
  std::string reason;  // empty on success
  int loops = 0;
  PhaseTimes times;
  /// The rounded candidates that were (last) verified.
  SymbolicCertificate certificate;
  std::optional<Candidates> networks;
  long cex_count = 0;
  /// Verdicts of the last verification round.
  std::vector<Verdict> last_verdicts;
};

/// Learner, translator, verifier and consolidator in a loop until the
/// rounded candidates verify or the loop budget runs out.
SynthesisResult synthesize(const PropertyProblem& p, const CandidateShapes& shapes, const CegisConfig& cfg);

/// Rounded symbolic form of the candidates (levels left unset).
SymbolicCertificate translate(const Candidates& c, double precision);

}  // namespace certsynth
