#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "certsynth/certificate.hpp"
#include "certsynth/learner.hpp"

namespace certsynth {

struct NetShape {
  std::vector<int> hidden;
  std::vector<Activation> activations;
};

struct BenchmarkEntry {
  int id = 0;
  std::string name;
  PropertyKind kind = PropertyKind::kStability;
  std::vector<std::string> dynamics;
  int n_inputs = 0;
  std::map<RegionRole, std::string> regions;  // shorthand
  NetShape v;
  std::optional<NetShape> alt;         // B for SWA / RAR
  std::optional<NetShape> controller;  // hidden layers only; outputs = n_inputs
  /// Stresses verifier scalability; excluded from default suites.
  bool extended = false;
  /// Where a region had to be chosen or approximated.
  std::string note;

  int dim() const { return static_cast<int>(dynamics.size()); }
  PropertyProblem problem() const;
  CandidateShapes shapes() const;
};

const std::vector<BenchmarkEntry>& registry();

/// Looks up by id ("15") or by "Name-Property" ("SecondOrderLQR-RWA", case
/// insensitive). Throws ProblemError listing the registry.
const BenchmarkEntry& find_benchmark(const std::string& key);

/// One line per entry; stable format used by the golden-file test.
std::string registry_listing();

}  // namespace certsynth
