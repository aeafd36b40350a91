#include "certsynth/simulate.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "certsynth/compiled_expr.hpp"

namespace certsynth {

namespace {

constexpr double kBlowUp = 1e6;

class Stepper {
 public:
  explicit Stepper(const VectorField& f) : prog_(f.components), n_(f.dim_state) {
    if (f.dim_input != 0) throw std::invalid_argument("integrate needs a closed-loop field");
    k_.assign(4, std::vector<double>(n_));
    tmp_.resize(n_);
  }

  // One RK4 step in place; false if the new state is not finite or too large.
  bool step(std::vector<double>& x, double dt) {
    eval(x, k_[0]);
    for (int s = 1; s < 4; ++s) {
      const double h = s == 3 ? dt : dt / 2;
      for (int i = 0; i < n_; ++i) tmp_[i] = x[i] + h * k_[s - 1][i];
      eval(tmp_, k_[s]);
    }
    double norm2 = 0.0;
    for (int i = 0; i < n_; ++i) {
      x[i] += dt / 6 * (k_[0][i] + 2 * k_[1][i] + 2 * k_[2][i] + k_[3][i]);
      norm2 += x[i] * x[i];
    }
    return std::isfinite(norm2) && norm2 <= kBlowUp * kBlowUp;
  }

 private:
  void eval(const std::vector<double>& x, std::vector<double>& out) {
    try {
      out = prog_.eval_all(x);
    } catch (const EvalError&) {
      out.assign(n_, std::numeric_limits<double>::quiet_NaN());
    }
  }

  CompiledExpr prog_;
  int n_;
  std::vector<std::vector<double>> k_;
  std::vector<double> tmp_;
};

void check_step_args(double dt, double horizon) {
  if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  if (!(horizon >= dt)) throw std::invalid_argument("horizon must be at least dt");
}

double norm(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

Trajectory integrate(const VectorField& f, const std::vector<double>& x0, double dt, double horizon, double t0) {
  check_step_args(dt, horizon);
  if (static_cast<int>(x0.size()) != f.dim_state) throw std::invalid_argument("initial state dimension mismatch");
  Stepper stepper(f);
  Trajectory t;
  t.dt = dt;
  t.horizon = horizon;
  const long steps = std::lround(horizon / dt);
  t.times.reserve(steps + 1);
  t.states.reserve(steps + 1);
  std::vector<double> x = x0;
  t.times.push_back(t0);
  t.states.push_back(x);
  for (long k = 1; k <= steps; ++k) {
    if (!stepper.step(x, dt)) {
      t.blow_up = true;
      break;
    }
    t.times.push_back(t0 + static_cast<double>(k) * dt);
    t.states.push_back(x);
  }
  return t;
}

bool EmpiricalVerdict::clean() const {
  if (checks_avoid && n_avoid_violations > 0) return false;
  if (checks_remain && n_remain_violations > 0) return false;
  if (checks_arrive && n_arrive_successes < n_trajectories) return false;
  return true;
}

EmpiricalVerdict check_property(const PropertyProblem& p, const VectorField& closed_loop, const SimulationConfig& cfg,
                                Rng& rng, const SymbolicCertificate* cert) {
  if (cfg.n_init < 1) throw std::invalid_argument("n_init must be at least 1");
  check_step_args(cfg.dt, cfg.horizon);
  using K = PropertyKind;
  const K kind = p.kind;
  const Region& start = p.has(RegionRole::kInit) ? p.region(RegionRole::kInit) : p.region(RegionRole::kDomain);
  const SampleBatch init = sample_interior(start, cfg.n_init, rng);

  EmpiricalVerdict out;
  out.checks_avoid = kind != K::kStability && kind != K::kRoa;
  out.checks_arrive = kind != K::kSafety;
  out.checks_remain = kind == K::kRar || (kind == K::kRswa && cert && std::isfinite(cert->levels.beta));
  const bool to_origin = kind == K::kStability || kind == K::kRoa || kind == K::kSwa;
  const double arrive_radius = cfg.arrive_radius_factor * p.epsilon_origin;

  // Barrier tracked along the run: V for Safety, B for SWA.
  std::optional<CompiledExpr> barrier, lyapunov, v_fn;
  if (cert) {
    if (kind == K::kSafety) barrier.emplace(cert->v);
    if (kind == K::kSwa && cert->b) barrier.emplace(*cert->b);
    if (to_origin) lyapunov.emplace(cert->v);
    if (kind == K::kRswa) v_fn.emplace(cert->v);
  }

  Stepper stepper(closed_loop);
  const long steps = std::lround(cfg.horizon / cfg.dt);
  const int n = p.dim();
  for (int k = 0; k < init.count(); ++k) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = init.points(i, k);
    const std::vector<double> x0 = x;
    ++out.n_trajectories;

    auto unsafe = [&](const std::vector<double>& y) {
      if (kind == K::kSafety || kind == K::kSwa) return p.region(RegionRole::kUnsafe).contains(y);
      return !p.region(RegionRole::kSafe).contains(y);
    };
    auto arrived_at = [&](const std::vector<double>& y) {
      if (to_origin) return norm(y) <= arrive_radius;
      if (kind == K::kRswa) {
        if (!p.region(RegionRole::kFinal).contains(y)) return false;
        return !out.checks_remain || v_fn->eval(y) <= cert->levels.beta;
      }
      return p.region(RegionRole::kGoal).contains(y);
    };

    bool avoid_bad = false, arrived = false, remain_bad = false;
    bool tracking_barrier = barrier && barrier->eval(x) <= 0.0;
    double prev_v = lyapunov ? lyapunov->eval(x) : 0.0;
    // RSWA: whether the state is currently in the beta sublevel set, and
    // whether it left X_F since the last entry into that set.
    bool in_goal = false, left_since_entry = false;
    auto observe = [&](const std::vector<double>& y) {
      const bool now_arrived = out.checks_arrive && arrived_at(y);
      if (out.checks_avoid && !avoid_bad && !(kind == K::kRwa && arrived) && unsafe(y)) avoid_bad = true;
      if (tracking_barrier) out.max_barrier = std::max(out.max_barrier, barrier->eval(y));
      if (kind == K::kRar && arrived && !p.region(RegionRole::kFinal).contains(y)) remain_bad = true;
      if (kind == K::kRswa && out.checks_remain) {
        if (now_arrived && !in_goal) left_since_entry = false;
        in_goal = now_arrived;
        if (arrived && !p.region(RegionRole::kFinal).contains(y)) left_since_entry = true;
      }
      if (now_arrived) arrived = true;
    };
    observe(x);
    bool blown = false;
    for (long s = 1; s <= steps; ++s) {
      if (!stepper.step(x, cfg.dt)) {
        blown = true;
        break;
      }
      observe(x);
      if (lyapunov && !arrived) {
        const double v = lyapunov->eval(x);
        if (v > prev_v + cfg.lyapunov_tolerance) ++out.lyapunov_increases;
        prev_v = v;
      }
      // Stability-type runs are decided once the state has arrived.
      if (arrived && (kind == K::kStability || kind == K::kRoa) && !lyapunov) break;
    }
    if (kind == K::kRswa && out.checks_remain) remain_bad = left_since_entry;
    if (blown) {
      ++out.n_blow_up;
      if (out.checks_avoid) avoid_bad = avoid_bad || kind != K::kRwa || !arrived;
      if (out.checks_remain && arrived) remain_bad = true;
    }
    if (avoid_bad) {
      ++out.n_avoid_violations;
      if (!out.avoid_witness) out.avoid_witness = x0;
    }
    if (arrived) {
      ++out.n_arrive_successes;
    } else if (!out.arrive_witness) {
      out.arrive_witness = x0;
    }
    if (remain_bad) {
      ++out.n_remain_violations;
      if (!out.remain_witness) out.remain_witness = x0;
    }
  }
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t, int stride) {
  const int n = t.states.empty() ? 0 : static_cast<int>(t.states[0].size());
  os << "t";
  for (int i = 0; i < n; ++i) os << ",x" << i;
  os << "\n";
  const std::size_t step = static_cast<std::size_t>(std::max(1, stride));
  for (std::size_t k = 0; k < t.states.size(); k += step) {
    os << t.times[k];
    for (double v : t.states[k]) os << "," << v;
    os << "\n";
  }
}

void write_contour_csv(std::ostream& os, const Expr& fn, int dim, int axis_i, int axis_j, const std::vector<double>& lo,
                       const std::vector<double>& hi, int resolution, const std::vector<double>& fixed) {
  if (axis_i < 0 || axis_j < 0 || axis_i >= dim || axis_j >= dim || axis_i == axis_j) {
    throw std::invalid_argument("contour axes must be two distinct state indices");
  }
  if (resolution < 2) throw std::invalid_argument("contour resolution must be at least 2");
  const CompiledExpr prog(fn);
  std::vector<double> x = fixed.empty() ? std::vector<double>(dim, 0.0) : fixed;
  if (static_cast<int>(x.size()) != dim) throw std::invalid_argument("fixed point dimension mismatch");
  os << "x" << axis_i << ",x" << axis_j << ",value\n";
  for (int a = 0; a < resolution; ++a) {
    x[axis_i] = lo[axis_i] + (hi[axis_i] - lo[axis_i]) * a / (resolution - 1);
    for (int b = 0; b < resolution; ++b) {
      x[axis_j] = lo[axis_j] + (hi[axis_j] - lo[axis_j]) * b / (resolution - 1);
      double v;
      try {
        v = prog.eval(x);
      } catch (const EvalError&) {
        v = std::numeric_limits<double>::quiet_NaN();
      }
      os << x[axis_i] << "," << x[axis_j] << "," << v << "\n";
    }
  }
}

}  // namespace certsynth
