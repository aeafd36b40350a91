#pragma once

#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "certsynth/compiled_expr.hpp"
#include "certsynth/expr.hpp"

namespace certsynth {

using Rng = std::mt19937_64;

enum class Relation { kLt, kLe, kGt, kGe, kEq };

const char* relation_symbol(Relation r);
Relation negate(Relation r);  // kEq has no single-atom negation; throws
bool is_strict(Relation r);

/// `lhs rel rhs`. Equality atoms are only ever satisfied up to a tolerance
/// supplied by the caller.
struct Atom {
  Expr lhs;
  Relation rel = Relation::kLe;
  double rhs = 0.0;
  std::shared_ptr<const CompiledExpr> compiled;

  Atom(Expr lhs, Relation rel, double rhs);
  bool holds(double lhs_value, double eq_tol) const;
  /// Signed slack; non-negative iff the atom holds (strict atoms need > 0).
  double slack(double lhs_value, double eq_tol) const;
  std::string to_string() const;
};

/// Boolean combination of atoms with negation pushed to the leaves.
class Predicate {
 public:
  enum class Kind { kTrue, kFalse, kAtom, kAnd, kOr };

  static Predicate truth();
  static Predicate falsity();
  static Predicate atom(Expr lhs, Relation rel, double rhs);
  static Predicate all(std::vector<Predicate> parts);
  static Predicate any(std::vector<Predicate> parts);

  Kind kind() const { return kind_; }
  const Atom& as_atom() const { return *atom_; }
  const std::vector<Predicate>& parts() const { return parts_; }

  Predicate negate() const;
  bool holds(std::span<const double> x, double eq_tol = 0.0) const;
  /// Collects pointers to every atom (in a stable depth-first order).
  void collect_atoms(std::vector<const Atom*>& out) const;
  std::string to_string() const;

 private:
  Kind kind_ = Kind::kTrue;
  std::shared_ptr<const Atom> atom_;
  std::vector<Predicate> parts_;
};

class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A compact region of the state space.
class Region {
 public:
  enum class Kind { kRectangle, kSphere, kTorus, kUnion, kDifference, kComplement };

  static Region rectangle(std::vector<double> lb, std::vector<double> ub);
  static Region sphere(std::vector<double> center, double radius);
  /// Sphere(c, r_outer) minus Sphere(c, r_inner). The two radii may be given
  /// in either order; the smaller is always taken as the hole.
  static Region torus(std::vector<double> center, double r1, double r2);
  static Region union_of(std::vector<Region> parts);
  static Region difference(Region a, Region b);
  /// Complement of `inner` inside the bounding rectangle `within`.
  static Region complement(Region inner, Region within);

  /// Parses the shorthand Rectangle(lb, ub) | Sphere(c, r) | Torus(c, r1, r2)
  /// | Complement(inner, within), combined with `|` (union) and `\`
  /// (difference), with parentheses. Lists are `[a, b, ...]`; numbers may be
  /// any constant expression (e.g. `-pi/2`).
  static Region parse(std::string_view text);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::vector<double>& lb() const { return lb_; }
  const std::vector<double>& ub() const { return ub_; }
  const std::vector<double>& center() const { return lb_; }
  double radius() const { return r_outer_; }
  double inner_radius() const { return r_inner_; }
  const std::vector<Region>& parts() const { return parts_; }

  bool contains(std::span<const double> p) const;
  Predicate to_constraints() const;
  /// Predicate for the boundary; equality atoms are normalized so that their
  /// tolerance approximates a Euclidean distance.
  Predicate boundary_constraints() const;

  /// Axis-aligned bounding box (lb, ub).
  std::pair<std::vector<double>, std::vector<double>> bounding_box() const;
  double diameter() const;
  bool is_primitive() const { return kind_ == Kind::kRectangle || kind_ == Kind::kSphere || kind_ == Kind::kTorus; }

  std::string to_string() const;

 private:
  Kind kind_ = Kind::kRectangle;
  int dim_ = 0;
  std::vector<double> lb_;  // rectangle lower bounds, or sphere/torus centre
  std::vector<double> ub_;
  double r_inner_ = 0.0;
  double r_outer_ = 0.0;
  std::vector<Region> parts_;
};

struct SampleBatch {
  enum class Kind { kInterior, kBoundaryBand };
  Eigen::MatrixXd points;  // dim x count, one sample per column
  std::string source_region;
  Kind kind = Kind::kInterior;

  int count() const { return static_cast<int>(points.cols()); }
};

/// Uniform rejection sampling from the bounding box. Throws SamplingError
/// for degenerate regions.
SampleBatch sample_interior(const Region& r, int n, Rng& rng);

/// Points within `band` of the boundary of a Rectangle, Sphere or Torus.
/// Rectangles receive an equal share of points on every face.
SampleBatch sample_boundary(const Region& r, int n, double band, Rng& rng);

/// Boundary band sampling that also accepts composite regions, by sampling
/// the boundaries of their primitives and filtering with the composite
/// boundary predicate.
SampleBatch sample_boundary_any(const Region& r, int n, double band, Rng& rng);

}  // namespace certsynth
