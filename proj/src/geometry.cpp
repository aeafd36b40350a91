#include "certsynth/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

namespace certsynth {

const char* relation_symbol(Relation r) {
  switch (r) {
    case Relation::kLt: return "<";
    case Relation::kLe: return "<=";
    case Relation::kGt: return ">";
    case Relation::kGe: return ">=";
    case Relation::kEq: return "==";
  }
  return "?";
}

Relation negate(Relation r) {
  switch (r) {
    case Relation::kLt: return Relation::kGe;
    case Relation::kLe: return Relation::kGt;
    case Relation::kGt: return Relation::kLe;
    case Relation::kGe: return Relation::kLt;
    case Relation::kEq: break;
  }
  throw std::invalid_argument("equality has no single-atom negation");
}

bool is_strict(Relation r) { return r == Relation::kLt || r == Relation::kGt; }

// ---------------------------------------------------------------------------

Atom::Atom(Expr l, Relation r, double rh)
    : lhs(std::move(l)), rel(r), rhs(rh), compiled(std::make_shared<CompiledExpr>(lhs)) {}

double Atom::slack(double v, double eq_tol) const {
  switch (rel) {
    case Relation::kLt:
    case Relation::kLe: return rhs - v;
    case Relation::kGt:
    case Relation::kGe: return v - rhs;
    case Relation::kEq: return eq_tol - std::abs(v - rhs);
  }
  return 0.0;
}

bool Atom::holds(double v, double eq_tol) const {
  switch (rel) {
    case Relation::kLt: return v < rhs;
    case Relation::kLe: return v <= rhs;
    case Relation::kGt: return v > rhs;
    case Relation::kGe: return v >= rhs;
    case Relation::kEq: return std::abs(v - rhs) <= eq_tol;
  }
  return false;
}

std::string Atom::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << lhs.to_string() << " " << relation_symbol(rel) << " " << rhs;
  return os.str();
}

Predicate Predicate::truth() { return Predicate(); }

Predicate Predicate::falsity() {
  Predicate p;
  p.kind_ = Kind::kFalse;
  return p;
}

Predicate Predicate::atom(Expr lhs, Relation rel, double rhs) {
  Predicate p;
  p.kind_ = Kind::kAtom;
  p.atom_ = std::make_shared<Atom>(std::move(lhs), rel, rhs);
  return p;
}

Predicate Predicate::all(std::vector<Predicate> parts) {
  std::vector<Predicate> kept;
  for (auto& part : parts) {
    if (part.kind_ == Kind::kFalse) return falsity();
    if (part.kind_ == Kind::kTrue) continue;
    if (part.kind_ == Kind::kAnd) {
      kept.insert(kept.end(), part.parts_.begin(), part.parts_.end());
    } else {
      kept.push_back(std::move(part));
    }
  }
  if (kept.empty()) return truth();
  if (kept.size() == 1) return kept.front();
  Predicate p;
  p.kind_ = Kind::kAnd;
  p.parts_ = std::move(kept);
  return p;
}

Predicate Predicate::any(std::vector<Predicate> parts) {
  std::vector<Predicate> kept;
  for (auto& part : parts) {
    if (part.kind_ == Kind::kTrue) return truth();
    if (part.kind_ == Kind::kFalse) continue;
    if (part.kind_ == Kind::kOr) {
      kept.insert(kept.end(), part.parts_.begin(), part.parts_.end());
    } else {
      kept.push_back(std::move(part));
    }
  }
  if (kept.empty()) return falsity();
  if (kept.size() == 1) return kept.front();
  Predicate p;
  p.kind_ = Kind::kOr;
  p.parts_ = std::move(kept);
  return p;
}

Predicate Predicate::negate() const {
  switch (kind_) {
    case Kind::kTrue: return falsity();
    case Kind::kFalse: return truth();
    case Kind::kAtom:
      if (atom_->rel == Relation::kEq) {
        return any({atom(atom_->lhs, Relation::kLt, atom_->rhs), atom(atom_->lhs, Relation::kGt, atom_->rhs)});
      }
      return atom(atom_->lhs, certsynth::negate(atom_->rel), atom_->rhs);
    case Kind::kAnd:
    case Kind::kOr: {
      std::vector<Predicate> neg;
      neg.reserve(parts_.size());
      for (const auto& p : parts_) neg.push_back(p.negate());
      return kind_ == Kind::kAnd ? any(std::move(neg)) : all(std::move(neg));
    }
  }
  return truth();
}

bool Predicate::holds(std::span<const double> x, double eq_tol) const {
  switch (kind_) {
    case Kind::kTrue: return true;
    case Kind::kFalse: return false;
    case Kind::kAtom: return atom_->holds(atom_->compiled->eval(x), eq_tol);
    case Kind::kAnd:
      return std::all_of(parts_.begin(), parts_.end(), [&](const Predicate& p) { return p.holds(x, eq_tol); });
    case Kind::kOr:
      return std::any_of(parts_.begin(), parts_.end(), [&](const Predicate& p) { return p.holds(x, eq_tol); });
  }
  return false;
}

void Predicate::collect_atoms(std::vector<const Atom*>& out) const {
  if (kind_ == Kind::kAtom) out.push_back(atom_.get());
  for (const auto& p : parts_) p.collect_atoms(out);
}

std::string Predicate::to_string() const {
  switch (kind_) {
    case Kind::kTrue: return "true";
    case Kind::kFalse: return "false";
    case Kind::kAtom: return atom_->to_string();
    case Kind::kAnd:
    case Kind::kOr: {
      std::string s = "(";
      for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (i) s += kind_ == Kind::kAnd ? " & " : " | ";
        s += parts_[i].to_string();
      }
      return s + ")";
    }
  }
  return "";
}

// ---------------------------------------------------------------------------
// Regions.

namespace {

double squared_distance(std::span<const double> p, const std::vector<double>& c) {
  // Same evaluation order as the sphere constraint expression.
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double d = p[i] - c[i];
    s = i == 0 ? d * d : s + d * d;
  }
  return s;
}

Expr squared_distance_expr(const std::vector<double>& c) {
  Expr s;
  for (std::size_t i = 0; i < c.size(); ++i) {
    s = s + pow(Expr::var(static_cast<int>(i)) - Expr(c[i]), 2);
  }
  return s;
}

// (|x - c|^2 - r^2) / (2 r): approximately the signed distance to the sphere.
Predicate sphere_surface(const std::vector<double>& c, double r) {
  return Predicate::atom((squared_distance_expr(c) - Expr(r * r)) / Expr(2.0 * r), Relation::kEq, 0.0);
}

void require_same_dim(const std::vector<Region>& parts) {
  if (parts.empty()) throw std::invalid_argument("empty region combination");
  for (const auto& p : parts) {
    if (p.dim() != parts.front().dim()) throw std::invalid_argument("region dimensions differ");
  }
}

}  // namespace

Region Region::rectangle(std::vector<double> lb, std::vector<double> ub) {
  if (lb.empty() || lb.size() != ub.size()) throw std::invalid_argument("rectangle bounds have mismatched length");
  for (std::size_t i = 0; i < lb.size(); ++i) {
    if (!std::isfinite(lb[i]) || !std::isfinite(ub[i])) throw std::invalid_argument("rectangle bounds must be finite");
    if (!(lb[i] < ub[i])) {
      throw std::invalid_argument("rectangle requires lb < ub in every dimension (dimension " + std::to_string(i) + ")");
    }
  }
  Region r;
  r.kind_ = Kind::kRectangle;
  r.dim_ = static_cast<int>(lb.size());
  r.lb_ = std::move(lb);
  r.ub_ = std::move(ub);
  return r;
}

Region Region::sphere(std::vector<double> center, double radius) {
  if (center.empty()) throw std::invalid_argument("sphere needs a centre");
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw std::invalid_argument("sphere radius must be non-negative");
  Region r;
  r.kind_ = Kind::kSphere;
  r.dim_ = static_cast<int>(center.size());
  r.lb_ = std::move(center);
  r.r_outer_ = radius;
  return r;
}

Region Region::torus(std::vector<double> center, double r1, double r2) {
  const double inner = std::min(r1, r2);
  const double outer = std::max(r1, r2);
  if (!(inner >= 0.0) || !(outer > inner)) throw std::invalid_argument("torus needs 0 <= r_inner < r_outer");
  Region r;
  r.kind_ = Kind::kTorus;
  r.dim_ = static_cast<int>(center.size());
  r.lb_ = std::move(center);
  r.r_inner_ = inner;
  r.r_outer_ = outer;
  return r;
}

Region Region::union_of(std::vector<Region> parts) {
  require_same_dim(parts);
  if (parts.size() == 1) return parts.front();
  Region r;
  r.kind_ = Kind::kUnion;
  r.dim_ = parts.front().dim();
  r.parts_ = std::move(parts);
  return r;
}

Region Region::difference(Region a, Region b) {
  require_same_dim({a, b});
  Region r;
  r.kind_ = Kind::kDifference;
  r.dim_ = a.dim();
  r.parts_ = {std::move(a), std::move(b)};
  return r;
}

Region Region::complement(Region inner, Region within) {
  if (within.kind() != Kind::kRectangle) throw std::invalid_argument("complement must be taken within a rectangle");
  require_same_dim({inner, within});
  Region r;
  r.kind_ = Kind::kComplement;
  r.dim_ = inner.dim();
  r.parts_ = {std::move(inner), std::move(within)};
  return r;
}

bool Region::contains(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != dim_) {
    throw std::invalid_argument("point dimension " + std::to_string(p.size()) + " does not match region dimension " +
                                std::to_string(dim_));
  }
  switch (kind_) {
    case Kind::kRectangle:
      for (int i = 0; i < dim_; ++i) {
        if (p[i] < lb_[i] || p[i] > ub_[i]) return false;
      }
      return true;
    case Kind::kSphere: return squared_distance(p, lb_) <= r_outer_ * r_outer_;
    case Kind::kTorus: {
      const double d2 = squared_distance(p, lb_);
      return d2 <= r_outer_ * r_outer_ && d2 > r_inner_ * r_inner_;
    }
    case Kind::kUnion:
      return std::any_of(parts_.begin(), parts_.end(), [&](const Region& r) { return r.contains(p); });
    case Kind::kDifference: return parts_[0].contains(p) && !parts_[1].contains(p);
    case Kind::kComplement: return parts_[1].contains(p) && !parts_[0].contains(p);
  }
  return false;
}

Predicate Region::to_constraints() const {
  switch (kind_) {
    case Kind::kRectangle: {
      std::vector<Predicate> atoms;
      for (int i = 0; i < dim_; ++i) {
        atoms.push_back(Predicate::atom(Expr::var(i), Relation::kGe, lb_[i]));
        atoms.push_back(Predicate::atom(Expr::var(i), Relation::kLe, ub_[i]));
      }
      return Predicate::all(std::move(atoms));
    }
    case Kind::kSphere: return Predicate::atom(squared_distance_expr(lb_), Relation::kLe, r_outer_ * r_outer_);
    case Kind::kTorus: {
      const Expr d2 = squared_distance_expr(lb_);
      return Predicate::all({Predicate::atom(d2, Relation::kLe, r_outer_ * r_outer_),
                             Predicate::atom(d2, Relation::kGt, r_inner_ * r_inner_)});
    }
    case Kind::kUnion: {
      std::vector<Predicate> ps;
      for (const auto& r : parts_) ps.push_back(r.to_constraints());
      return Predicate::any(std::move(ps));
    }
    case Kind::kDifference: return Predicate::all({parts_[0].to_constraints(), parts_[1].to_constraints().negate()});
    case Kind::kComplement: return Predicate::all({parts_[1].to_constraints(), parts_[0].to_constraints().negate()});
  }
  return Predicate::truth();
}

Predicate Region::boundary_constraints() const {
  switch (kind_) {
    case Kind::kRectangle: {
      std::vector<Predicate> faces;
      for (int i = 0; i < dim_; ++i) {
        faces.push_back(Predicate::atom(Expr::var(i), Relation::kEq, lb_[i]));
        faces.push_back(Predicate::atom(Expr::var(i), Relation::kEq, ub_[i]));
      }
      return Predicate::all({to_constraints(), Predicate::any(std::move(faces))});
    }
    case Kind::kSphere: return sphere_surface(lb_, r_outer_);
    case Kind::kTorus:
      if (r_inner_ == 0.0) return sphere_surface(lb_, r_outer_);
      return Predicate::any({sphere_surface(lb_, r_outer_), sphere_surface(lb_, r_inner_)});
    case Kind::kUnion: {
      std::vector<Predicate> pieces;
      for (std::size_t i = 0; i < parts_.size(); ++i) {
        std::vector<Predicate> conj{parts_[i].boundary_constraints()};
        for (std::size_t j = 0; j < parts_.size(); ++j) {
          if (j != i) conj.push_back(parts_[j].to_constraints().negate());
        }
        pieces.push_back(Predicate::all(std::move(conj)));
      }
      return Predicate::any(std::move(pieces));
    }
    case Kind::kDifference:
      return Predicate::any(
          {Predicate::all({parts_[0].boundary_constraints(), parts_[1].to_constraints().negate()}),
           Predicate::all({parts_[1].boundary_constraints(), parts_[0].to_constraints()})});
    case Kind::kComplement:
      return Predicate::any(
          {Predicate::all({parts_[0].boundary_constraints(), parts_[1].to_constraints()}),
           Predicate::all({parts_[1].boundary_constraints(), parts_[0].to_constraints().negate()})});
  }
  return Predicate::falsity();
}

std::pair<std::vector<double>, std::vector<double>> Region::bounding_box() const {
  switch (kind_) {
    case Kind::kRectangle: return {lb_, ub_};
    case Kind::kSphere:
    case Kind::kTorus: {
      std::vector<double> lo(lb_), hi(lb_);
      for (int i = 0; i < dim_; ++i) {
        lo[i] -= r_outer_;
        hi[i] += r_outer_;
      }
      return {lo, hi};
    }
    case Kind::kUnion: {
      auto box = parts_.front().bounding_box();
      for (std::size_t k = 1; k < parts_.size(); ++k) {
        auto b = parts_[k].bounding_box();
        for (int i = 0; i < dim_; ++i) {
          box.first[i] = std::min(box.first[i], b.first[i]);
          box.second[i] = std::max(box.second[i], b.second[i]);
        }
      }
      return box;
    }
    case Kind::kDifference: return parts_[0].bounding_box();
    case Kind::kComplement: return parts_[1].bounding_box();
  }
  return {};
}

double Region::diameter() const {
  auto [lo, hi] = bounding_box();
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
  return std::sqrt(s);
}

namespace {

std::string list_to_string(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

std::string number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string Region::to_string() const {
  switch (kind_) {
    case Kind::kRectangle: return "Rectangle(" + list_to_string(lb_) + ", " + list_to_string(ub_) + ")";
    case Kind::kSphere: return "Sphere(" + list_to_string(lb_) + ", " + number(r_outer_) + ")";
    case Kind::kTorus:
      return "Torus(" + list_to_string(lb_) + ", " + number(r_inner_) + ", " + number(r_outer_) + ")";
    case Kind::kUnion: {
      std::string s = "(";
      for (std::size_t i = 0; i < parts_.size(); ++i) s += (i ? " | " : "") + parts_[i].to_string();
      return s + ")";
    }
    case Kind::kDifference: return "(" + parts_[0].to_string() + " \\ " + parts_[1].to_string() + ")";
    case Kind::kComplement: return "Complement(" + parts_[0].to_string() + ", " + parts_[1].to_string() + ")";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Shorthand parser.

namespace {

class RegionParser {
 public:
  explicit RegionParser(std::string_view text) : text_(text) {}

  Region parse_all() {
    Region r = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return r;
  }

 private:
  [[noreturn]] void fail(const std::string& what) { throw ParseError(what, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  // expr := term (('|' | '\') term)*   (left associative, equal precedence)
  Region parse_expr() {
    Region lhs = parse_term();
    for (;;) {
      if (eat('|')) {
        Region rhs = parse_term();
        if (lhs.kind() == Region::Kind::kUnion) {
          std::vector<Region> parts = lhs.parts();
          parts.push_back(std::move(rhs));
          lhs = Region::union_of(std::move(parts));
        } else {
          lhs = Region::union_of({std::move(lhs), std::move(rhs)});
        }
      } else if (eat('\\')) {
        lhs = Region::difference(std::move(lhs), parse_term());
      } else {
        return lhs;
      }
    }
  }

  Region parse_term() {
    skip_ws();
    if (eat('(')) {
      Region r = parse_expr();
      expect(')');
      return r;
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    if (name.empty()) fail("expected a region");
    expect('(');
    try {
      if (name == "Rectangle") {
        auto lb = parse_list();
        expect(',');
        auto ub = parse_list();
        expect(')');
        return Region::rectangle(std::move(lb), std::move(ub));
      }
      if (name == "Sphere") {
        auto c = parse_list();
        expect(',');
        const double r = parse_number();
        expect(')');
        return Region::sphere(std::move(c), r);
      }
      if (name == "Torus") {
        auto c = parse_list();
        expect(',');
        const double r1 = parse_number();
        expect(',');
        const double r2 = parse_number();
        expect(')');
        return Region::torus(std::move(c), r1, r2);
      }
      if (name == "Complement") {
        Region inner = parse_expr();
        expect(',');
        Region within = parse_expr();
        expect(')');
        return Region::complement(std::move(inner), std::move(within));
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("invalid ") + name + ": " + e.what(), start);
    }
    pos_ = start;
    fail("unknown region '" + name + "'");
  }

  std::vector<double> parse_list() {
    expect('[');
    std::vector<double> v;
    if (eat(']')) return v;
    for (;;) {
      v.push_back(parse_number());
      if (eat(']')) return v;
      expect(',');
    }
  }

  double parse_number() {
    skip_ws();
    const std::size_t start = pos_;
    int depth = 0;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '(') ++depth;
      if (c == ')') {
        if (depth == 0) break;
        --depth;
      }
      if ((c == ',' || c == ']') && depth == 0) break;
      ++pos_;
    }
    const std::string_view token = text_.substr(start, pos_ - start);
    try {
      Expr e = certsynth::parse(token, 0, 0);
      if (!e.is_constant()) throw ParseError("not a constant", 0);
      return e.value();
    } catch (const ParseError& e) {
      throw ParseError(std::string("bad number: ") + e.what(), start + e.offset());
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Region Region::parse(std::string_view text) { return RegionParser(text).parse_all(); }

// ---------------------------------------------------------------------------
// Sampling.

namespace {

constexpr long kMaxDraws = 10'000'000;
constexpr double kMinAcceptance = 1e-4;

void require_nondegenerate(const std::vector<double>& lo, const std::vector<double>& hi) {
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(hi[i] > lo[i])) throw SamplingError("degenerate region: empty interior");
  }
}

}  // namespace

SampleBatch sample_interior(const Region& r, int n, Rng& rng) {
  if (n < 0) throw std::invalid_argument("negative sample count");
  auto [lo, hi] = r.bounding_box();
  require_nondegenerate(lo, hi);
  if (r.kind() == Region::Kind::kSphere && r.radius() <= 0.0) throw SamplingError("degenerate sphere");
  SampleBatch batch;
  batch.kind = SampleBatch::Kind::kInterior;
  batch.source_region = r.to_string();
  batch.points.resize(r.dim(), n);
  std::vector<std::uniform_real_distribution<double>> axis;
  for (int i = 0; i < r.dim(); ++i) axis.emplace_back(lo[i], hi[i]);
  std::vector<double> p(r.dim());
  long draws = 0;
  int accepted = 0;
  while (accepted < n) {
    for (int i = 0; i < r.dim(); ++i) p[i] = axis[i](rng);
    ++draws;
    if (r.contains(p)) {
      for (int i = 0; i < r.dim(); ++i) batch.points(i, accepted) = p[i];
      ++accepted;
    }
    if (draws >= kMaxDraws && static_cast<double>(accepted) / static_cast<double>(draws) < kMinAcceptance) {
      throw SamplingError("acceptance rate below 1e-4 for region " + r.to_string());
    }
  }
  return batch;
}

namespace {

void random_direction(std::vector<double>& out, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& v : out) {
      v = g(rng);
      norm += v * v;
    }
  } while (norm < 1e-24);
  norm = std::sqrt(norm);
  for (double& v : out) v /= norm;
}

void sphere_band_point(const std::vector<double>& c, double radius, double band, Rng& rng, double* out) {
  std::vector<double> dir(c.size());
  random_direction(dir, rng);
  std::uniform_real_distribution<double> off(-band, band);
  const double rr = std::max(0.0, radius + off(rng));
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i] + rr * dir[i];
}

}  // namespace

SampleBatch sample_boundary(const Region& r, int n, double band, Rng& rng) {
  if (!(band > 0.0)) throw std::invalid_argument("boundary band must be positive");
  if (!r.is_primitive()) throw std::invalid_argument("boundary sampling needs a Rectangle, Sphere or Torus");
  SampleBatch batch;
  batch.kind = SampleBatch::Kind::kBoundaryBand;
  batch.source_region = r.to_string();
  batch.points.resize(r.dim(), n);
  const int d = r.dim();
  switch (r.kind()) {
    case Region::Kind::kRectangle: {
      const int faces = 2 * d;
      std::uniform_real_distribution<double> off(-band, band);
      for (int k = 0; k < n; ++k) {
        const int face = k % faces;
        const int axis_index = face / 2;
        for (int i = 0; i < d; ++i) {
          std::uniform_real_distribution<double> u(r.lb()[i], r.ub()[i]);
          batch.points(i, k) = u(rng);
        }
        const double base = face % 2 == 0 ? r.lb()[axis_index] : r.ub()[axis_index];
        batch.points(axis_index, k) = base + off(rng);
      }
      break;
    }
    case Region::Kind::kSphere:
      if (r.radius() <= 0.0) throw SamplingError("degenerate sphere");
      for (int k = 0; k < n; ++k) sphere_band_point(r.center(), r.radius(), band, rng, batch.points.col(k).data());
      break;
    case Region::Kind::kTorus: {
      // Split by surface area (proportional to r^(d-1)).
      const double wo = std::pow(r.radius(), d - 1);
      const double wi = std::pow(r.inner_radius(), d - 1);
      std::bernoulli_distribution outer(wo / (wo + wi));
      for (int k = 0; k < n; ++k) {
        const double rad = outer(rng) ? r.radius() : r.inner_radius();
        sphere_band_point(r.center(), rad, band, rng, batch.points.col(k).data());
      }
      break;
    }
    default: break;
  }
  return batch;
}

namespace {

void collect_primitives(const Region& r, std::vector<const Region*>& out) {
  if (r.is_primitive()) {
    out.push_back(&r);
    return;
  }
  for (const auto& p : r.parts()) collect_primitives(p, out);
}

}  // namespace

SampleBatch sample_boundary_any(const Region& r, int n, double band, Rng& rng) {
  if (r.is_primitive()) return sample_boundary(r, n, band, rng);
  std::vector<const Region*> prims;
  collect_primitives(r, prims);
  const Predicate boundary = r.boundary_constraints();
  SampleBatch batch;
  batch.kind = SampleBatch::Kind::kBoundaryBand;
  batch.source_region = r.to_string();
  batch.points.resize(r.dim(), n);
  int accepted = 0;
  long draws = 0;
  std::vector<double> p(r.dim());
  while (accepted < n) {
    const int chunk = std::max(16, n - accepted);
    for (const Region* prim : prims) {
      SampleBatch cand = sample_boundary(*prim, chunk, band, rng);
      for (int k = 0; k < cand.count() && accepted < n; ++k) {
        for (int i = 0; i < r.dim(); ++i) p[i] = cand.points(i, k);
        ++draws;
        if (boundary.holds(p, band)) {
          batch.points.col(accepted) = cand.points.col(k);
          ++accepted;
        }
      }
    }
    if (draws > kMaxDraws / 10 && accepted == 0) throw SamplingError("no boundary points found for " + r.to_string());
  }
  return batch;
}

}  // namespace certsynth
