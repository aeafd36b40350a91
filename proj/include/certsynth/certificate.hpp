#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "certsynth/expr.hpp"
#include "certsynth/geometry.hpp"
#include "certsynth/interval.hpp"

namespace certsynth {

class Network;

enum class PropertyKind { kStability, kRoa, kSafety, kSwa, kRwa, kRswa, kRar };

const char* kind_name(PropertyKind k);
PropertyKind parse_kind(const std::string& name);
/// SWA and RAR use a second function B next to V.
bool needs_second_function(PropertyKind k);

enum class RegionRole { kDomain, kInit, kUnsafe, kSafe, kGoal, kFinal };
const char* role_name(RegionRole r);

class ProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PropertyProblem {
  PropertyKind kind = PropertyKind::kStability;
  VectorField dynamics;
  std::map<RegionRole, Region> regions;
  double gamma = 0.1;
  double epsilon_origin = 0.01;
  double delta = 1e-4;

  bool has_controller() const { return dynamics.dim_input > 0; }
  int dim() const { return dynamics.dim_state; }
  const Region& region(RegionRole r) const;
  bool has(RegionRole r) const { return regions.count(r) != 0; }

  /// Checks required regions, dimensions and (by Monte-Carlo sampling with
  /// `samples` points) the set containments. Throws ProblemError.
  void validate(int samples = 10000, std::uint64_t seed = 0) const;
};

std::vector<RegionRole> required_regions(PropertyKind k);

enum class Target { kV, kB };
enum class Quantity { kValue, kLie };

/// Reference value for a level-set threshold.
enum class Level { kZero, kBetaHat, kBeta };

struct LevelRestriction {
  Target target = Target::kV;
  Relation rel = Relation::kLe;
  Level level = Level::kZero;
};

/// `quantity(target) rel threshold` for every x in the domain.
/// The domain is `region` (or its boundary) intersected with the level-set
/// restrictions and with the complement of `exclude`.
struct Condition {
  std::string id;
  Target target = Target::kV;
  Quantity quantity = Quantity::kValue;
  Region region;
  bool on_boundary = false;
  std::vector<LevelRestriction> levels;
  std::optional<Region> exclude;
  Relation rel = Relation::kLe;
  double threshold = 0.0;
  Level threshold_level = Level::kZero;  // threshold += value of this level
  bool verification_only = false;
  bool beta_dependent = false;

  /// p in the loss m(p (q - c)): +1 for < and <=, -1 for > and >=.
  double sign() const;
  /// Violation measure p (q - c); the condition is violated iff it is >= 0
  /// (strict relations) or > 0 (non-strict).
  double violation(double q, double level_value) const;
  bool violated(double q, double level_value) const;
};

std::vector<Condition> build_conditions(const PropertyProblem& p);

/// Numeric values of the level references.
struct Levels {
  double beta_hat = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  double value(Level l) const;
};

/// Symbolic (already rounded) candidate functions and controller.
struct SymbolicCertificate {
  Expr v;
  std::optional<Expr> b;
  std::vector<Expr> controller;
  Levels levels;

  const Expr& function(Target t) const;
};

/// Verifier query for one condition: find x with domain(x) and goal(x).
struct ConditionQuery {
  Predicate domain;
  Predicate goal;
  std::vector<Interval> box;
};

/// Symbolic quantity q(x) of the condition.
Expr condition_expr(const Condition& c, const SymbolicCertificate& cert, const VectorField& closed_loop);
ConditionQuery build_query(const Condition& c, const PropertyProblem& p, const SymbolicCertificate& cert,
                           const VectorField& closed_loop);

/// beta_hat = (1 + margin) * max of V over interior samples of X_I.
double estimate_roa_level(const Network& v, const Region& x_init, int n_samples, Rng& rng, double margin = 0.05);
double estimate_roa_level(const Expr& v, const Region& x_init, int n_samples, Rng& rng, double margin = 0.05);

/// Descending grid of 10 candidate beta values for the RSWA line search.
std::vector<double> rswa_beta_grid(const Expr& v, const Region& final_set, double band, int n_samples, Rng& rng);

/// Band width used for boundary sampling of a region.
double boundary_band(const Region& r, double fraction = 0.05);

}  // namespace certsynth
