#include "certsynth/learner.hpp"

#include <algorithm>
#include <cmath>

namespace certsynth {

const Network& Candidates::function(Target t) const {
  if (t == Target::kB) {
    if (!b) throw std::invalid_argument("candidate has no second function");
    return *b;
  }
  return v;
}

NetworkSpec certificate_spec(PropertyKind kind, Target target, std::vector<int> hidden,
                             std::vector<Activation> activations) {
  NetworkSpec s;
  s.hidden = std::move(hidden);
  s.activations = std::move(activations);
  const bool lyapunov = target == Target::kV &&
                        (kind == PropertyKind::kStability || kind == PropertyKind::kRoa || kind == PropertyKind::kSwa);
  if (lyapunov) {
    s.positive_output_weights = true;
    s.use_bias = false;
    s.shift_output = !std::all_of(s.activations.begin(), s.activations.end(),
                                  [](const Activation& a) { return a.vanishes_at_zero(); });
  }
  return s;
}

NetworkSpec controller_spec(std::vector<int> hidden, std::vector<Activation> activations, int outputs) {
  NetworkSpec s;
  s.hidden = std::move(hidden);
  s.activations = std::move(activations);
  s.output_dim = outputs;
  s.use_bias = false;
  s.shift_output = true;
  return s;
}

Candidates init_candidates(const PropertyProblem& p, const CandidateShapes& shapes, Rng& rng) {
  Candidates c{Network(p.dim(), shapes.v, rng), std::nullopt, std::nullopt};
  if (needs_second_function(p.kind)) {
    if (!shapes.b) throw std::invalid_argument(std::string(kind_name(p.kind)) + " needs a second network shape");
    c.b = Network(p.dim(), *shapes.b, rng);
  }
  if (p.has_controller()) {
    if (!shapes.controller) throw std::invalid_argument("dynamics have inputs but no controller shape was given");
    if (shapes.controller->output_dim != p.dynamics.dim_input) {
      throw std::invalid_argument("controller output dimension does not match the number of inputs");
    }
    c.controller = Network(p.dim(), *shapes.controller, rng);
  }
  return c;
}

double effective_control_weight(const PropertyProblem& p, const TrainConfig& cfg) {
  if (!p.has_controller()) return 0.0;
  if (cfg.control_loss_weight >= 0) return cfg.control_loss_weight;
  // Every kind but Safety has an arrive component.
  return p.kind == PropertyKind::kSafety ? 0.0 : 1.0;
}

double loss_shape(double z, const TrainConfig& cfg) {
  if (cfg.loss_shape == LossShape::kSoftplus) return softplus(z);
  return z >= 0 ? z : cfg.leaky_slope * z;
}

int Dataset::count(const std::string& id) const {
  auto it = batches.find(id);
  return it == batches.end() ? 0 : static_cast<int>(it->second.cols());
}

void Dataset::append(const std::string& id, const Eigen::MatrixXd& points) {
  if (points.cols() == 0) return;
  Eigen::MatrixXd& b = batches[id];
  if (b.size() == 0) {
    b = points;
    return;
  }
  if (b.rows() != points.rows()) throw std::invalid_argument("dataset dimension mismatch");
  Eigen::MatrixXd merged(b.rows(), b.cols() + points.cols());
  merged << b, points;
  b = std::move(merged);
}

namespace {

Eigen::MatrixXd drop_excluded(const Condition& c, const Eigen::MatrixXd& pts) {
  if (!c.exclude) return pts;
  std::vector<int> keep;
  for (Eigen::Index k = 0; k < pts.cols(); ++k) {
    if (!c.exclude->contains(std::span<const double>(pts.col(k).data(), pts.rows()))) keep.push_back(static_cast<int>(k));
  }
  Eigen::MatrixXd out(pts.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) out.col(k) = pts.col(keep[k]);
  return out;
}

Eigen::MatrixXd sample_for(const Condition& c, int n, const TrainConfig& cfg, Rng& rng) {
  SampleBatch b = c.on_boundary ? sample_boundary_any(c.region, n, boundary_band(c.region, cfg.boundary_band_fraction), rng)
                                : sample_interior(c.region, n, rng);
  return drop_excluded(c, b.points);
}

bool is_zero_level(const Condition& c) {
  return std::any_of(c.levels.begin(), c.levels.end(), [](const LevelRestriction& l) { return l.rel == Relation::kEq; });
}

bool level_holds(Relation rel, double value, double level, double band) {
  switch (rel) {
    case Relation::kLt: return value < level;
    case Relation::kLe: return value <= level;
    case Relation::kGt: return value > level;
    case Relation::kGe: return value >= level;
    case Relation::kEq: return std::abs(value - level) <= band;
  }
  return false;
}

const Condition* find_condition(const std::vector<Condition>& conds, const std::string& suffix) {
  for (const auto& c : conds) {
    if (c.id.size() >= suffix.size() && c.id.compare(c.id.size() - suffix.size(), suffix.size(), suffix) == 0) return &c;
  }
  return nullptr;
}

}  // namespace

Dataset build_dataset(const PropertyProblem& p, const std::vector<Condition>& conds, const TrainConfig& cfg, Rng& rng) {
  Dataset d;
  for (const auto& c : conds) {
    d.batches[c.id] = sample_for(c, cfg.samples_per_region, cfg, rng);
    d.base_size[c.id] = cfg.samples_per_region;
  }
  d.domain = sample_interior(p.region(RegionRole::kDomain), cfg.samples_per_region, rng).points;
  return d;
}

ad::Var cosine_loss(ad::Tape& tape, ad::Var x, ad::Var f) {
  ad::Var dot = tape.sum_rows(tape.mul(x, f));
  ad::Var nx = tape.unary(tape.sum_rows(tape.powi(x, 2)), ad::Unary::kSqrt);
  // A tiny floor keeps the norm differentiable where f vanishes.
  ad::Var nf = tape.unary(tape.add(tape.sum_rows(tape.powi(f, 2)), tape.scalar(1e-12)), ad::Unary::kSqrt);
  return tape.mean(tape.div(dot, tape.mul(nx, nf)));
}

void Adam::step(std::vector<Eigen::MatrixXd*>& params, const std::vector<Eigen::MatrixXd>& grads) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  if (m_.empty()) {
    for (auto* p : params) {
      m_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
      v_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    m_[k] = b1 * m_[k] + (1 - b1) * grads[k];
    v_[k] = b2 * v_[k] + (1 - b2) * grads[k].cwiseProduct(grads[k]);
    const Eigen::MatrixXd mh = m_[k] / c1;
    const Eigen::MatrixXd vh = v_[k] / c2;
    *params[k] -= lr_ * mh.cwiseQuotient((vh.array().sqrt() + eps).matrix());
  }
}

// ---------------------------------------------------------------------------

struct Learner::Epoch {
  double loss = 0.0;
  double control_loss = 0.0;
  std::vector<ConditionStat> stats;
  std::vector<std::string> degenerate;
  std::vector<Eigen::MatrixXd> grads;  // v, then b, then controller params
};

Learner::Learner(const PropertyProblem& p, std::vector<Condition> conds, TrainConfig cfg)
    : p_(p), conds_(std::move(conds)), cfg_(cfg), dynamics_(p.dynamics.components),
      control_weight_(effective_control_weight(p, cfg)) {
  if (!(cfg_.learn_rate >= 0)) throw std::invalid_argument("learn_rate must be non-negative");
  if (cfg_.max_epochs < 0) throw std::invalid_argument("max_epochs must be non-negative");
  if (!(cfg_.band_epsilon > 0)) throw std::invalid_argument("band_epsilon must be positive");
}

Levels Learner::training_levels(const Candidates& c, const Dataset& d) const {
  Levels lv;
  if (p_.kind == PropertyKind::kRoa || p_.kind == PropertyKind::kSwa) {
    const Condition* member = find_condition(conds_, "contains_init");
    if (member && d.count(member->id) > 0) {
      const double best = c.v.forward_batch(d.batches.at(member->id)).maxCoeff();
      lv.beta_hat = best >= 0 ? 1.05 * best : 0.95 * best;
    }
  }
  if (p_.kind == PropertyKind::kRswa) {
    const Condition* bnd = find_condition(conds_, "final_boundary");
    const Condition* dec = find_condition(conds_, "final_decrease");
    if (bnd && dec && d.count(bnd->id) > 0 && d.count(dec->id) > 0) {
      const double on_boundary = c.v.forward_batch(d.batches.at(bnd->id)).minCoeff();
      const double inside = std::min(on_boundary, c.v.forward_batch(d.batches.at(dec->id)).minCoeff());
      lv.beta = on_boundary - 0.05 * (on_boundary - inside);
    }
  }
  return lv;
}

Learner::Epoch Learner::run_epoch(const Candidates& c, const Dataset& d, bool with_grad) const {
  Epoch e;
  const Levels lv = training_levels(c, d);
  ad::Tape tape;
  const auto pv = c.v.bind(tape);
  const auto pb = c.b ? c.b->bind(tape) : std::vector<ad::Var>{};
  const auto pc = c.controller ? c.controller->bind(tape) : std::vector<ad::Var>{};
  auto params_of = [&](Target t) -> const std::vector<ad::Var>& { return t == Target::kB ? pb : pv; };

  auto vector_field = [&](ad::Var x) {
    ad::Var u;
    if (c.controller) u = c.controller->forward(tape, pc, x);
    return tape.stack_rows(ad::eval_program(tape, dynamics_, x, u));
  };

  ad::Var total = tape.scalar(0.0);
  for (const Condition& cond : conds_) {
    if (cond.verification_only) continue;
    auto it = d.batches.find(cond.id);
    if (it == d.batches.end() || it->second.cols() == 0) {
      e.degenerate.push_back(cond.id);
      continue;
    }
    const Eigen::MatrixXd& pts = it->second;
    // Level-set restrictions move with the candidate; re-filter every epoch.
    std::vector<int> keep;
    if (cond.levels.empty()) {
      keep.resize(pts.cols());
      for (Eigen::Index k = 0; k < pts.cols(); ++k) keep[k] = static_cast<int>(k);
    } else {
      std::vector<Eigen::MatrixXd> values;
      for (const auto& l : cond.levels) values.push_back(c.function(l.target).forward_batch(pts));
      for (Eigen::Index k = 0; k < pts.cols(); ++k) {
        bool ok = true;
        for (std::size_t li = 0; li < cond.levels.size() && ok; ++li) {
          const double level = lv.value(cond.levels[li].level);
          ok = !std::isnan(level) && level_holds(cond.levels[li].rel, values[li](0, k), level, cfg_.band_epsilon);
        }
        if (ok) keep.push_back(static_cast<int>(k));
      }
    }
    ConditionStat st;
    st.id = cond.id;
    st.points = static_cast<int>(keep.size());
    const double level = lv.value(cond.threshold_level);
    if (keep.empty() || std::isnan(level)) {
      e.degenerate.push_back(cond.id);
      e.stats.push_back(st);
      continue;
    }
    Eigen::MatrixXd sel(pts.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) sel.col(k) = pts.col(keep[k]);
    ad::Var x = tape.constant(sel);
    const Network& net = c.function(cond.target);
    ad::Var q;
    if (cond.quantity == Quantity::kValue) {
      q = net.forward(tape, params_of(cond.target), x);
    } else {
      q = net.forward_tangent(tape, params_of(cond.target), x, vector_field(x)).second;
    }
    const double thr = cond.threshold + level;
    ad::Var z = tape.scale(tape.sub(q, tape.scalar(thr)), cond.sign());
    ad::Var m = cfg_.loss_shape == LossShape::kSoftplus ? tape.unary(z, ad::Unary::kSoftplus)
                                                        : tape.leaky_relu(z, cfg_.leaky_slope);
    ad::Var term = tape.mean(m);
    st.loss = tape.value(term)(0, 0);
    const auto& qv = tape.value(q);
    for (Eigen::Index k = 0; k < qv.cols(); ++k) st.violations += cond.violated(qv(0, k), level);
    if (!std::isfinite(st.loss)) throw TrainingError("non-finite loss in condition " + cond.id);
    total = tape.add(total, term);
    e.stats.push_back(st);
  }

  if (control_weight_ > 0 && c.controller && d.domain.cols() > 0) {
    std::vector<int> keep;
    for (Eigen::Index k = 0; k < d.domain.cols(); ++k) {
      if (d.domain.col(k).norm() >= 1e-6) keep.push_back(static_cast<int>(k));
    }
    if (!keep.empty()) {
      Eigen::MatrixXd sel(d.domain.rows(), static_cast<Eigen::Index>(keep.size()));
      for (std::size_t k = 0; k < keep.size(); ++k) sel.col(k) = d.domain.col(keep[k]);
      ad::Var x = tape.constant(sel);
      ad::Var lu = cosine_loss(tape, x, vector_field(x));
      e.control_loss = tape.value(lu)(0, 0);
      if (!std::isfinite(e.control_loss)) throw TrainingError("non-finite control loss");
      total = tape.add(total, tape.scale(lu, control_weight_));
    } else {
      e.degenerate.push_back("control");
    }
  }

  e.loss = tape.value(total)(0, 0);
  if (!std::isfinite(e.loss)) throw TrainingError("non-finite total loss");
  if (with_grad) {
    tape.backward(total);
    for (auto v : pv) e.grads.push_back(tape.grad(v));
    for (auto v : pb) e.grads.push_back(tape.grad(v));
    for (auto v : pc) e.grads.push_back(tape.grad(v));
  }
  return e;
}

void Learner::ensure_band_points(const Candidates& c, Dataset& d, Rng& rng) const {
  for (const Condition& cond : conds_) {
    if (!is_zero_level(cond) || cond.verification_only) continue;
    const Network& net = c.function(cond.levels.front().target);
    const Eigen::MatrixXd& pts = d.batches[cond.id];
    int in_band = 0;
    if (pts.cols() > 0) {
      const Eigen::MatrixXd vals = net.forward_batch(pts);
      for (Eigen::Index k = 0; k < vals.cols(); ++k) in_band += std::abs(vals(0, k)) <= cfg_.band_epsilon;
    }
    const int base = d.base_size.count(cond.id) ? d.base_size.at(cond.id) : cfg_.samples_per_region;
    if (in_band < cfg_.min_band_points && pts.cols() < 4 * base) {
      d.append(cond.id, sample_for(cond, 4 * base - static_cast<int>(pts.cols()), cfg_, rng));
    }
  }
}

TrainReport Learner::evaluate(const Candidates& c, const Dataset& d) const {
  Epoch e = run_epoch(c, d, false);
  TrainReport r;
  r.loss = e.loss;
  r.control_loss = e.control_loss;
  r.stats = std::move(e.stats);
  r.degenerate = std::move(e.degenerate);
  return r;
}

TrainReport Learner::train(Candidates& c, Dataset& d, Rng& rng) {
  ensure_band_points(c, d, rng);
  std::vector<Eigen::MatrixXd*> params;
  for (auto& m : c.v.params()) params.push_back(&m);
  if (c.b) {
    for (auto& m : c.b->params()) params.push_back(&m);
  }
  if (c.controller) {
    for (auto& m : c.controller->params()) params.push_back(&m);
  }
  Adam opt(cfg_.learn_rate);
  TrainReport r;
  int streak = 0;
  for (int epoch = 0; epoch < cfg_.max_epochs; ++epoch) {
    Epoch e = run_epoch(c, d, true);
    r.trace.push_back(e.loss);
    r.epochs = epoch + 1;
    r.loss = e.loss;
    r.control_loss = e.control_loss;
    r.stats = e.stats;
    r.degenerate = e.degenerate;
    int violations = 0;
    for (const auto& s : e.stats) violations += s.violations;
    streak = violations == 0 ? streak + 1 : 0;
    if (streak >= cfg_.patience) {
      r.converged = true;
      break;
    }
    opt.step(params, e.grads);
  }
  return r;
}

}  // namespace certsynth
