#include "certsynth/certificate.hpp"

#include <algorithm>
#include <cmath>

#include "certsynth/network.hpp"

namespace certsynth {

const char* kind_name(PropertyKind k) {
  switch (k) {
    case PropertyKind::kStability: return "Stability";
    case PropertyKind::kRoa: return "ROA";
    case PropertyKind::kSafety: return "Safety";
    case PropertyKind::kSwa: return "SWA";
    case PropertyKind::kRwa: return "RWA";
    case PropertyKind::kRswa: return "RSWA";
    case PropertyKind::kRar: return "RAR";
  }
  return "?";
}

PropertyKind parse_kind(const std::string& name) {
  std::string n;
  for (char c : name) n += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (n == "stability" || n == "lyapunov") return PropertyKind::kStability;
  if (n == "roa") return PropertyKind::kRoa;
  if (n == "safety" || n == "barrier") return PropertyKind::kSafety;
  if (n == "swa") return PropertyKind::kSwa;
  if (n == "rwa") return PropertyKind::kRwa;
  if (n == "rswa") return PropertyKind::kRswa;
  if (n == "rar") return PropertyKind::kRar;
  throw ProblemError("unknown property kind '" + name + "'");
}

bool needs_second_function(PropertyKind k) { return k == PropertyKind::kSwa || k == PropertyKind::kRar; }

const char* role_name(RegionRole r) {
  switch (r) {
    case RegionRole::kDomain: return "domain";
    case RegionRole::kInit: return "init";
    case RegionRole::kUnsafe: return "unsafe";
    case RegionRole::kSafe: return "safe";
    case RegionRole::kGoal: return "goal";
    case RegionRole::kFinal: return "final";
  }
  return "?";
}

std::vector<RegionRole> required_regions(PropertyKind k) {
  using R = RegionRole;
  switch (k) {
    case PropertyKind::kStability: return {R::kDomain};
    case PropertyKind::kRoa: return {R::kDomain, R::kInit};
    case PropertyKind::kSafety:
    case PropertyKind::kSwa: return {R::kDomain, R::kInit, R::kUnsafe};
    case PropertyKind::kRwa: return {R::kDomain, R::kInit, R::kSafe, R::kGoal};
    case PropertyKind::kRswa: return {R::kDomain, R::kInit, R::kSafe, R::kFinal};
    case PropertyKind::kRar: return {R::kDomain, R::kInit, R::kSafe, R::kGoal, R::kFinal};
  }
  return {};
}

const Region& PropertyProblem::region(RegionRole r) const {
  auto it = regions.find(r);
  if (it == regions.end()) throw ProblemError(std::string("missing region '") + role_name(r) + "'");
  return it->second;
}

namespace {

// Fraction of samples of `inner` that fall inside (or outside) `outer`.
void check_subset(const PropertyProblem& p, RegionRole inner, RegionRole outer, bool disjoint, int samples, Rng& rng) {
  const Region& a = p.region(inner);
  const Region& b = p.region(outer);
  SampleBatch batch = sample_interior(a, samples, rng);
  std::vector<double> x(a.dim());
  for (int k = 0; k < batch.count(); ++k) {
    for (int i = 0; i < a.dim(); ++i) x[i] = batch.points(i, k);
    if (b.contains(x) == disjoint) {
      throw ProblemError(std::string("region '") + role_name(inner) + (disjoint ? "' intersects '" : "' is not contained in '") +
                         role_name(outer) + "'");
    }
  }
}

}  // namespace

void PropertyProblem::validate(int samples, std::uint64_t seed) const {
  try {
    dynamics.validate();
  } catch (const std::invalid_argument& e) {
    throw ProblemError(std::string("invalid dynamics: ") + e.what());
  }
  if (!(gamma > 0)) throw ProblemError("gamma must be positive");
  if (!(epsilon_origin > 0)) throw ProblemError("epsilon_origin must be positive");
  if (!(delta > 0)) throw ProblemError("delta must be positive");
  for (RegionRole r : required_regions(kind)) {
    if (!has(r)) {
      throw ProblemError(std::string("property ") + kind_name(kind) + " requires region '" + role_name(r) + "'");
    }
  }
  for (const auto& [role, reg] : regions) {
    if (reg.dim() != dim()) {
      throw ProblemError(std::string("region '") + role_name(role) + "' has dimension " + std::to_string(reg.dim()) +
                         ", dynamics have " + std::to_string(dim()));
    }
  }
  Rng rng(seed);
  using R = RegionRole;
  try {
    switch (kind) {
      case PropertyKind::kStability: break;
      case PropertyKind::kRoa: check_subset(*this, R::kInit, R::kDomain, false, samples, rng); break;
      case PropertyKind::kSafety:
      case PropertyKind::kSwa: check_subset(*this, R::kInit, R::kUnsafe, true, samples, rng); break;
      case PropertyKind::kRwa:
        check_subset(*this, R::kInit, R::kSafe, false, samples, rng);
        check_subset(*this, R::kGoal, R::kSafe, false, samples, rng);
        break;
      case PropertyKind::kRswa:
        check_subset(*this, R::kInit, R::kSafe, false, samples, rng);
        check_subset(*this, R::kFinal, R::kSafe, false, samples, rng);
        break;
      case PropertyKind::kRar:
        check_subset(*this, R::kInit, R::kSafe, false, samples, rng);
        check_subset(*this, R::kFinal, R::kSafe, false, samples, rng);
        check_subset(*this, R::kGoal, R::kFinal, false, samples, rng);
        break;
    }
  } catch (const SamplingError& e) {
    throw ProblemError(std::string("cannot sample region: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

double Condition::sign() const { return rel == Relation::kLt || rel == Relation::kLe ? 1.0 : -1.0; }

double Condition::violation(double q, double level_value) const { return sign() * (q - (threshold + level_value)); }

bool Condition::violated(double q, double level_value) const {
  const double v = violation(q, level_value);
  return is_strict(rel) ? v >= 0.0 : v > 0.0;
}

double Levels::value(Level l) const {
  switch (l) {
    case Level::kZero: return 0.0;
    case Level::kBetaHat: return beta_hat;
    case Level::kBeta: return beta;
  }
  return 0.0;
}

const Expr& SymbolicCertificate::function(Target t) const {
  if (t == Target::kB) {
    if (!b) throw std::invalid_argument("certificate has no second function");
    return *b;
  }
  return v;
}

namespace {

Condition make(std::string id, Target t, Quantity q, Region region, Relation rel, double threshold) {
  Condition c;
  c.id = std::move(id);
  c.target = t;
  c.quantity = q;
  c.region = std::move(region);
  c.rel = rel;
  c.threshold = threshold;
  return c;
}

Region origin_ball(const PropertyProblem& p) { return Region::sphere(std::vector<double>(p.dim(), 0.0), p.epsilon_origin); }

void add_roa(const PropertyProblem& p, std::vector<Condition>& out, const std::string& prefix) {
  const Region& x = p.region(RegionRole::kDomain);
  const LevelRestriction sub{Target::kV, Relation::kLe, Level::kBetaHat};
  Condition pos = make(prefix + "positive", Target::kV, Quantity::kValue, x, Relation::kGt, 0.0);
  pos.levels = {sub};
  pos.exclude = origin_ball(p);
  Condition lie = make(prefix + "decrease", Target::kV, Quantity::kLie, x, Relation::kLt, 0.0);
  lie.levels = {sub};
  lie.exclude = origin_ball(p);
  Condition member = make(prefix + "contains_init", Target::kV, Quantity::kValue, p.region(RegionRole::kInit),
                          Relation::kLe, 0.0);
  member.threshold_level = Level::kBetaHat;
  member.verification_only = true;
  out.push_back(std::move(pos));
  out.push_back(std::move(lie));
  out.push_back(std::move(member));
}

void add_barrier(const PropertyProblem& p, std::vector<Condition>& out, Target t, const Region& init, const Region& unsafe,
                 bool unsafe_is_boundary, const std::string& prefix) {
  out.push_back(make(prefix + "init", t, Quantity::kValue, init, Relation::kLe, 0.0));
  Condition u = make(prefix + "unsafe", t, Quantity::kValue, unsafe, Relation::kGt, 0.0);
  u.on_boundary = unsafe_is_boundary;
  out.push_back(std::move(u));
  Condition lie = make(prefix + "zero_level_flow", t, Quantity::kLie, p.region(RegionRole::kDomain), Relation::kLt, 0.0);
  lie.levels = {LevelRestriction{t, Relation::kEq, Level::kZero}};
  out.push_back(std::move(lie));
}

void add_reach(const PropertyProblem& p, std::vector<Condition>& out, const Region& target, const std::string& prefix) {
  out.push_back(make(prefix + "init", Target::kV, Quantity::kValue, p.region(RegionRole::kInit), Relation::kLe, 0.0));
  Condition b = make(prefix + "safe_boundary", Target::kV, Quantity::kValue, p.region(RegionRole::kSafe), Relation::kGt, 0.0);
  b.on_boundary = true;
  out.push_back(std::move(b));
  Condition lie = make(prefix + "decrease", Target::kV, Quantity::kLie, p.region(RegionRole::kSafe), Relation::kLe, -p.gamma);
  lie.levels = {LevelRestriction{Target::kV, Relation::kLe, Level::kZero}};
  lie.exclude = target;
  out.push_back(std::move(lie));
}

}  // namespace

std::vector<Condition> build_conditions(const PropertyProblem& p) {
  for (RegionRole r : required_regions(p.kind)) {
    if (!p.has(r)) throw ProblemError(std::string("property ") + kind_name(p.kind) + " requires region '" + role_name(r) + "'");
  }
  std::vector<Condition> out;
  switch (p.kind) {
    case PropertyKind::kStability: {
      const Region& x = p.region(RegionRole::kDomain);
      Condition pos = make("lyapunov.positive", Target::kV, Quantity::kValue, x, Relation::kGt, 0.0);
      pos.exclude = origin_ball(p);
      Condition lie = make("lyapunov.decrease", Target::kV, Quantity::kLie, x, Relation::kLt, 0.0);
      lie.exclude = origin_ball(p);
      out.push_back(std::move(pos));
      out.push_back(std::move(lie));
      break;
    }
    case PropertyKind::kRoa: add_roa(p, out, "roa."); break;
    case PropertyKind::kSafety:
      add_barrier(p, out, Target::kV, p.region(RegionRole::kInit), p.region(RegionRole::kUnsafe), false, "barrier.");
      break;
    case PropertyKind::kSwa:
      add_roa(p, out, "roa.");
      add_barrier(p, out, Target::kB, p.region(RegionRole::kInit), p.region(RegionRole::kUnsafe), false, "barrier.");
      break;
    case PropertyKind::kRwa: add_reach(p, out, p.region(RegionRole::kGoal), "rwa."); break;
    case PropertyKind::kRswa: {
      const Region& f = p.region(RegionRole::kFinal);
      add_reach(p, out, f, "rswa.");
      Condition d = make("rswa.final_boundary", Target::kV, Quantity::kValue, f, Relation::kGt, 0.0);
      d.on_boundary = true;
      d.threshold_level = Level::kBeta;
      // Training derives beta from V on this very band, so the term would be
      // satisfied by construction; it only constrains the beta search.
      d.verification_only = true;
      d.beta_dependent = true;
      Condition e = make("rswa.final_decrease", Target::kV, Quantity::kLie, f, Relation::kLe, -p.gamma);
      e.levels = {LevelRestriction{Target::kV, Relation::kGe, Level::kBeta}};
      e.beta_dependent = true;
      out.push_back(std::move(d));
      out.push_back(std::move(e));
      break;
    }
    case PropertyKind::kRar:
      add_reach(p, out, p.region(RegionRole::kGoal), "rar.");
      add_barrier(p, out, Target::kB, p.region(RegionRole::kGoal), p.region(RegionRole::kFinal), true, "rar.remain_");
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------

Expr condition_expr(const Condition& c, const SymbolicCertificate& cert, const VectorField& closed_loop) {
  const Expr& f = cert.function(c.target);
  return c.quantity == Quantity::kValue ? f : lie_derivative(f, closed_loop);
}

ConditionQuery build_query(const Condition& c, const PropertyProblem& p, const SymbolicCertificate& cert,
                           const VectorField& closed_loop) {
  (void)p;
  ConditionQuery q;
  std::vector<Predicate> domain{c.on_boundary ? c.region.boundary_constraints() : c.region.to_constraints()};
  for (const auto& l : c.levels) {
    const double level = cert.levels.value(l.level);
    if (std::isnan(level)) throw std::invalid_argument("condition " + c.id + " needs an unset level value");
    domain.push_back(Predicate::atom(cert.function(l.target), l.rel, level));
  }
  if (c.exclude) domain.push_back(c.exclude->to_constraints().negate());
  q.domain = Predicate::all(std::move(domain));
  const double thr = c.threshold + cert.levels.value(c.threshold_level);
  if (std::isnan(thr)) throw std::invalid_argument("condition " + c.id + " needs an unset level value");
  q.goal = Predicate::atom(condition_expr(c, cert, closed_loop), c.rel, thr).negate();
  auto [lo, hi] = c.region.bounding_box();
  for (std::size_t i = 0; i < lo.size(); ++i) {
    const double pad = c.on_boundary ? 2.0 * p.delta : 0.0;
    q.box.emplace_back(lo[i] - pad, hi[i] + pad);
  }
  return q;
}

double estimate_roa_level(const Expr& v, const Region& x_init, int n_samples, Rng& rng, double margin) {
  SampleBatch b = sample_interior(x_init, n_samples, rng);
  CompiledExpr prog(v);
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < b.count(); ++k) {
    best = std::max(best, prog.eval(std::span<const double>(b.points.col(k).data(), b.points.rows())));
  }
  return best >= 0 ? (1.0 + margin) * best : best * (1.0 - margin);
}

double estimate_roa_level(const Network& v, const Region& x_init, int n_samples, Rng& rng, double margin) {
  SampleBatch b = sample_interior(x_init, n_samples, rng);
  const double best = v.forward_batch(b.points).maxCoeff();
  return best >= 0 ? (1.0 + margin) * best : best * (1.0 - margin);
}

double boundary_band(const Region& r, double fraction) { return fraction * r.diameter(); }

std::vector<double> rswa_beta_grid(const Expr& v, const Region& final_set, double band, int n_samples, Rng& rng) {
  CompiledExpr prog(v);
  auto min_over = [&](const SampleBatch& b) {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < b.count(); ++k) {
      m = std::min(m, prog.eval(std::span<const double>(b.points.col(k).data(), b.points.rows())));
    }
    return m;
  };
  const double on_boundary = min_over(sample_boundary_any(final_set, n_samples, band, rng));
  const double inside = std::min(on_boundary, min_over(sample_interior(final_set, n_samples, rng)));
  const double hi = on_boundary - 0.05 * (on_boundary - inside);
  std::vector<double> grid;
  for (int k = 0; k < 10; ++k) grid.push_back(hi - k * (hi - inside) / 10.0);
  return grid;
}

}  // namespace certsynth
