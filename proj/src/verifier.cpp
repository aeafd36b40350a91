#include "certsynth/verifier.hpp"

#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "certsynth/compiled_expr.hpp"
#include "certsynth/network.hpp"

namespace certsynth {

const char* verdict_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::kValid: return "Valid";
    case VerdictKind::kCounterexample: return "Counterexample";
    case VerdictKind::kDeltaSat: return "DeltaSat";
    case VerdictKind::kResourceOut: return "ResourceOut";
  }
  return "?";
}

namespace {

enum class Tri { kFalse, kTrue, kUnknown };

Tri atom_tri(const Atom& a, const Interval& e, double delta) {
  const double c = a.rhs;
  switch (a.rel) {
    case Relation::kLe:
      if (e.hi() <= c) return Tri::kTrue;
      if (e.lo() > c) return Tri::kFalse;
      return Tri::kUnknown;
    case Relation::kLt:
      if (e.hi() < c) return Tri::kTrue;
      if (e.lo() >= c) return Tri::kFalse;
      return Tri::kUnknown;
    case Relation::kGe:
      if (e.lo() >= c) return Tri::kTrue;
      if (e.hi() < c) return Tri::kFalse;
      return Tri::kUnknown;
    case Relation::kGt:
      if (e.lo() > c) return Tri::kTrue;
      if (e.hi() <= c) return Tri::kFalse;
      return Tri::kUnknown;
    case Relation::kEq:
      if (e.lo() >= c - delta && e.hi() <= c + delta) return Tri::kTrue;
      if (e.hi() < c - delta || e.lo() > c + delta) return Tri::kFalse;
      return Tri::kUnknown;
  }
  return Tri::kUnknown;
}

struct BoxLeaves {
  const std::vector<Interval>* box;
  Interval constant(double v) const { return Interval(v); }
  Interval var(int i) const { return (*box)[i]; }
  Interval input(int) const { throw EvalError("control input in verifier query"); }
};

struct JetLeaves {
  const std::vector<Interval>* box;
  int n;
  Jet<Interval> constant(double v) const {
    Jet<Interval> j;
    j.v = Interval(v);
    j.n = n;
    for (int i = 0; i < n; ++i) j.d[i] = Interval(0.0);
    return j;
  }
  Jet<Interval> var(int i) const {
    Jet<Interval> j = constant(0.0);
    j.v = (*box)[i];
    j.d[i] = Interval(1.0);
    return j;
  }
  Jet<Interval> input(int) const { throw EvalError("control input in verifier query"); }
};

/// Everything needed to evaluate a query on boxes.
class QueryEvaluator {
 public:
  QueryEvaluator(const ConditionQuery& q, double delta) : q_(q), delta_(delta), dim_(static_cast<int>(q.box.size())) {
    std::vector<const Atom*> atoms;
    q.domain.collect_atoms(atoms);
    q.goal.collect_atoms(atoms);
    std::vector<Expr> exprs;
    for (const Atom* a : atoms) {
      if (!index_.count(a)) {
        index_[a] = static_cast<int>(exprs.size());
        exprs.push_back(a->lhs);
      }
    }
    program_ = CompiledExpr(exprs);
    enclosure_.resize(exprs.size());
    known_.resize(exprs.size());
    use_mean_value_ = dim_ <= kMaxJetDim;
  }

  /// Evaluates domain and goal on the box.
  std::pair<Tri, Tri> classify(const std::vector<Interval>& box) {
    natural(box);
    Tri d = tri(q_.domain);
    Tri g = tri(q_.goal);
    if (d != Tri::kFalse && g != Tri::kFalse && (d == Tri::kUnknown || g == Tri::kUnknown) && use_mean_value_) {
      mean_value(box);
      d = tri(q_.domain);
      g = tri(q_.goal);
    }
    return {d, g};
  }

  /// Exact check at a point: domain with relaxed equalities, goal exactly.
  /// Returns the goal slack (> 0 means a genuine witness), or nullopt.
  std::optional<double> point_check(const std::vector<double>& x) {
    std::vector<double> values;
    try {
      values = program_.eval_all(x);
    } catch (const EvalError&) {
      return std::nullopt;
    }
    for (double v : values) {
      if (!std::isfinite(v)) return std::nullopt;
    }
    if (!holds(q_.domain, values, delta_)) return std::nullopt;
    return slack(q_.goal, values);
  }

 private:
  void natural(const std::vector<Interval>& box) {
    BoxLeaves leaves{&box};
    try {
      program_.run(leaves, iregs_);
      for (std::size_t k = 0; k < program_.outputs().size(); ++k) {
        enclosure_[k] = iregs_[program_.outputs()[k]];
        known_[k] = true;
      }
    } catch (const EnclosureError&) {
      std::fill(known_.begin(), known_.end(), false);
    }
  }

  void mean_value(const std::vector<Interval>& box) {
    JetLeaves leaves{&box, dim_};
    std::vector<Interval> mid(dim_);
    for (int i = 0; i < dim_; ++i) mid[i] = Interval(box[i].mid());
    BoxLeaves mleaves{&mid};
    try {
      program_.run(leaves, jregs_);
      program_.run(mleaves, mregs_);
    } catch (const EnclosureError&) {
      return;
    }
    for (std::size_t k = 0; k < program_.outputs().size(); ++k) {
      const int o = program_.outputs()[k];
      const Jet<Interval>& j = jregs_[o];
      Interval mv = mregs_[o];
      for (int i = 0; i < dim_; ++i) mv = mv + j.d[i] * (box[i] - mid[i]);
      if (known_[k]) {
        const double lo = std::max(mv.lo(), enclosure_[k].lo());
        const double hi = std::min(mv.hi(), enclosure_[k].hi());
        if (lo <= hi) enclosure_[k] = Interval(lo, hi);
      } else {
        enclosure_[k] = mv;
        known_[k] = true;
      }
    }
  }

  Tri tri(const Predicate& p) const {
    switch (p.kind()) {
      case Predicate::Kind::kTrue: return Tri::kTrue;
      case Predicate::Kind::kFalse: return Tri::kFalse;
      case Predicate::Kind::kAtom: {
        const int k = index_.at(&p.as_atom());
        if (!known_[k]) return Tri::kUnknown;
        return atom_tri(p.as_atom(), enclosure_[k], delta_);
      }
      case Predicate::Kind::kAnd: {
        Tri r = Tri::kTrue;
        for (const auto& c : p.parts()) {
          const Tri t = tri(c);
          if (t == Tri::kFalse) return Tri::kFalse;
          if (t == Tri::kUnknown) r = Tri::kUnknown;
        }
        return r;
      }
      case Predicate::Kind::kOr: {
        Tri r = Tri::kFalse;
        for (const auto& c : p.parts()) {
          const Tri t = tri(c);
          if (t == Tri::kTrue) return Tri::kTrue;
          if (t == Tri::kUnknown) r = Tri::kUnknown;
        }
        return r;
      }
    }
    return Tri::kUnknown;
  }

  bool holds(const Predicate& p, const std::vector<double>& values, double tol) const {
    switch (p.kind()) {
      case Predicate::Kind::kTrue: return true;
      case Predicate::Kind::kFalse: return false;
      case Predicate::Kind::kAtom: return p.as_atom().holds(values[index_.at(&p.as_atom())], tol);
      case Predicate::Kind::kAnd:
        for (const auto& c : p.parts()) {
          if (!holds(c, values, tol)) return false;
        }
        return true;
      case Predicate::Kind::kOr:
        for (const auto& c : p.parts()) {
          if (holds(c, values, tol)) return true;
        }
        return false;
    }
    return false;
  }

  // Largest margin by which the goal holds (min over conjunctions, max over
  // disjunctions). Positive means it holds strictly.
  double slack(const Predicate& p, const std::vector<double>& values) const {
    switch (p.kind()) {
      case Predicate::Kind::kTrue: return std::numeric_limits<double>::infinity();
      case Predicate::Kind::kFalse: return -std::numeric_limits<double>::infinity();
      case Predicate::Kind::kAtom: return p.as_atom().slack(values[index_.at(&p.as_atom())], 0.0);
      case Predicate::Kind::kAnd: {
        double s = std::numeric_limits<double>::infinity();
        for (const auto& c : p.parts()) s = std::min(s, slack(c, values));
        return s;
      }
      case Predicate::Kind::kOr: {
        double s = -std::numeric_limits<double>::infinity();
        for (const auto& c : p.parts()) s = std::max(s, slack(c, values));
        return s;
      }
    }
    return 0.0;
  }

  const ConditionQuery& q_;
  double delta_;
  int dim_;
  bool use_mean_value_ = true;
  std::unordered_map<const Atom*, int> index_;
  CompiledExpr program_;
  std::vector<Interval> enclosure_;
  std::vector<bool> known_;
  std::vector<Interval> iregs_;
  std::vector<Interval> mregs_;
  std::vector<Jet<Interval>> jregs_;
};

std::vector<double> midpoint(const std::vector<Interval>& box) {
  std::vector<double> m(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) m[i] = box[i].mid();
  return m;
}

}  // namespace

Verdict check(const ConditionQuery& q, const VerifierConfig& cfg) {
  if (!(cfg.delta > 0)) throw std::invalid_argument("delta must be positive");
  if (q.box.empty()) throw std::invalid_argument("query box is empty");
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  QueryEvaluator ev(q, cfg.delta);
  std::deque<std::vector<Interval>> queue{q.box};
  Verdict out;
  long splits = 0;
  long processed = 0;
  while (!queue.empty()) {
    std::vector<Interval> box = std::move(queue.front());
    queue.pop_front();
    ++processed;
    if ((processed & 1023) == 0 && elapsed() > cfg.timeout_s) {
      out.kind = VerdictKind::kResourceOut;
      out.detail = "timeout";
      break;
    }
    const auto [dom, goal] = ev.classify(box);
    if (dom == Tri::kFalse || goal == Tri::kFalse) continue;

    std::vector<double> mid = midpoint(box);
    if (auto s = ev.point_check(mid); s && *s > 0.0) {
      out.kind = VerdictKind::kCounterexample;
      out.point = mid;
      out.violation = *s;
      break;
    }
    std::size_t widest = 0;
    for (std::size_t i = 1; i < box.size(); ++i) {
      if (box[i].width() > box[widest].width()) widest = i;
    }
    if (box[widest].width() < cfg.delta) {
      out.kind = VerdictKind::kDeltaSat;
      out.point = mid;
      out.violation = ev.point_check(mid).value_or(0.0);
      break;
    }
    if (splits >= cfg.max_splits) {
      out.kind = VerdictKind::kResourceOut;
      out.detail = "split budget exhausted";
      break;
    }
    ++splits;
    const double m = box[widest].mid();
    std::vector<Interval> right = box;
    box[widest] = Interval(box[widest].lo(), m);
    right[widest] = Interval(m, right[widest].hi());
    queue.push_back(std::move(box));
    queue.push_back(std::move(right));
  }
  out.boxes = processed;
  out.seconds = elapsed();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string smt_number(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(17) << std::abs(v);
  return v < 0 ? "(- " + os.str() + ")" : os.str();
}

std::string smt_expr(const Expr& e) {
  switch (e.op()) {
    case Op::kConst: return smt_number(e.value());
    case Op::kVar: return "x" + std::to_string(e.index());
    case Op::kInput: return "u" + std::to_string(e.index());
    case Op::kNeg: return "(- " + smt_expr(e.lhs()) + ")";
    case Op::kAdd: return "(+ " + smt_expr(e.lhs()) + " " + smt_expr(e.rhs()) + ")";
    case Op::kSub: return "(- " + smt_expr(e.lhs()) + " " + smt_expr(e.rhs()) + ")";
    case Op::kMul: return "(* " + smt_expr(e.lhs()) + " " + smt_expr(e.rhs()) + ")";
    case Op::kDiv: return "(/ " + smt_expr(e.lhs()) + " " + smt_expr(e.rhs()) + ")";
    case Op::kPow: {
      if (e.exponent() == 0) return "1.0";
      const std::string base = smt_expr(e.lhs());
      std::string s = "(*";
      for (int k = 0; k < e.exponent(); ++k) s += " " + base;
      return e.exponent() == 1 ? base : s + ")";
    }
    case Op::kSin: return "(sin " + smt_expr(e.lhs()) + ")";
    case Op::kCos: return "(cos " + smt_expr(e.lhs()) + ")";
    case Op::kExp: return "(exp " + smt_expr(e.lhs()) + ")";
    case Op::kTanh: return "(tanh " + smt_expr(e.lhs()) + ")";
    case Op::kSigmoid: return "(/ 1.0 (+ 1.0 (exp (- " + smt_expr(e.lhs()) + "))))";
    case Op::kSoftplus: return "(log (+ 1.0 (exp " + smt_expr(e.lhs()) + ")))";
  }
  return "";
}

std::string smt_pred(const Predicate& p, double delta) {
  switch (p.kind()) {
    case Predicate::Kind::kTrue: return "true";
    case Predicate::Kind::kFalse: return "false";
    case Predicate::Kind::kAtom: {
      const Atom& a = p.as_atom();
      const std::string lhs = smt_expr(a.lhs);
      const std::string rhs = smt_number(a.rhs);
      if (a.rel == Relation::kEq) {
        return "(and (<= (- " + lhs + " " + rhs + ") " + smt_number(delta) + ") (>= (- " + lhs + " " + rhs + ") " +
               smt_number(-delta) + "))";
      }
      return std::string("(") + relation_symbol(a.rel) + " " + lhs + " " + rhs + ")";
    }
    case Predicate::Kind::kAnd:
    case Predicate::Kind::kOr: {
      std::string s = p.kind() == Predicate::Kind::kAnd ? "(and" : "(or";
      for (const auto& c : p.parts()) s += " " + smt_pred(c, delta);
      return s + ")";
    }
  }
  return "";
}

}  // namespace

std::string to_smtlib(const ConditionQuery& q, double delta, const std::string& name) {
  std::ostringstream os;
  if (!name.empty()) os << "; " << name << "\n";
  os << "(set-logic QF_NRA)\n";
  for (std::size_t i = 0; i < q.box.size(); ++i) os << "(declare-fun x" << i << " () Real)\n";
  for (std::size_t i = 0; i < q.box.size(); ++i) {
    os << "(assert (<= " << smt_number(q.box[i].lo()) << " x" << i << "))\n";
    os << "(assert (<= x" << i << " " << smt_number(q.box[i].hi()) << "))\n";
  }
  os << "(assert " << smt_pred(q.domain, delta) << ")\n";
  os << "(assert " << smt_pred(q.goal, delta) << ")\n";
  os << "(check-sat)\n(exit)\n";
  return os.str();
}

bool VerificationReport::all_valid() const {
  for (const auto& v : verdicts) {
    if (!v.valid()) return false;
  }
  return true;
}

const Verdict* VerificationReport::failure() const {
  for (const auto& v : verdicts) {
    if (!v.valid()) return &v;
  }
  return nullptr;
}

VectorField closed_loop_of(const PropertyProblem& p, const SymbolicCertificate& cert) {
  if (!p.has_controller()) return p.dynamics;
  return close_loop(p.dynamics, cert.controller);
}

VerificationReport verify_certificate(const PropertyProblem& p, const std::vector<Condition>& conditions,
                                      const SymbolicCertificate& cert, const VerifierConfig& cfg,
                                      bool include_beta_dependent) {
  const VectorField closed = closed_loop_of(p, cert);
  VerificationReport report;
  for (const Condition& c : conditions) {
    if (c.beta_dependent && !include_beta_dependent) continue;
    ConditionQuery q = build_query(c, p, cert, closed);
    if (!cfg.smt_dump_dir.empty()) {
      std::filesystem::create_directories(cfg.smt_dump_dir);
      std::ofstream(std::filesystem::path(cfg.smt_dump_dir) / (c.id + ".smt2")) << to_smtlib(q, cfg.delta, c.id);
    }
    Verdict v = check(q, cfg);
    v.condition_id = c.id;
    report.verdicts.push_back(v);
    if (!v.valid()) break;
  }
  return report;
}

BetaSearchResult rswa_beta_search(const PropertyProblem& p, const std::vector<Condition>& conditions,
                                  const SymbolicCertificate& cert, const VerifierConfig& cfg, Rng& rng, int n_samples) {
  BetaSearchResult r;
  const Region& final_set = p.region(RegionRole::kFinal);
  r.grid = rswa_beta_grid(cert.v, final_set, boundary_band(final_set, 0.01), n_samples, rng);
  std::vector<Condition> dependent;
  for (const auto& c : conditions) {
    if (c.beta_dependent) dependent.push_back(c);
  }
  if (dependent.empty()) throw std::invalid_argument("no beta-dependent conditions");
  for (double beta : r.grid) {
    if (!(beta < 0.0)) continue;
    SymbolicCertificate trial = cert;
    trial.levels.beta = beta;
    VerificationReport rep = verify_certificate(p, dependent, trial, cfg, true);
    if (rep.all_valid()) {
      r.beta = beta;
      return r;
    }
    if (const Verdict* f = rep.failure(); f && f->kind == VerdictKind::kResourceOut) {
      r.resource_out = true;
      r.detail = "verifier resources exhausted at beta " + std::to_string(beta);
      return r;
    }
  }
  r.detail = "no grid value of beta verifies";
  return r;
}

}  // namespace certsynth
