#include "certsynth/consolidator.hpp"

#include <algorithm>
#include <cmath>

#include "certsynth/compiled_expr.hpp"

namespace certsynth {

CexBundle consolidate(const std::vector<double>& cex, const Condition& cond, const PropertyProblem& p,
                      const SymbolicCertificate& cert, const VectorField& closed_loop, const ConsolidatorConfig& cfg,
                      Rng& rng) {
  const int dim = p.dim();
  if (static_cast<int>(cex.size()) != dim) throw std::invalid_argument("counterexample dimension mismatch");
  const ConditionQuery q = build_query(cond, p, cert, closed_loop);
  const double tol = std::max(cfg.eq_tolerance, p.delta);
  auto inside = [&](const std::vector<double>& x) {
    for (int i = 0; i < dim; ++i) {
      if (x[i] < q.box[i].lo() || x[i] > q.box[i].hi()) return false;
    }
    return q.domain.holds(x, tol);
  };

  CexBundle out;
  out.origin = cex;
  out.condition_id = cond.id;
  std::vector<std::vector<double>> pts{cex};

  const double r_cloud = cfg.r_cloud_fraction * cond.region.diameter();
  std::normal_distribution<double> gauss(0.0, r_cloud / 2.0);
  std::vector<double> x(dim);
  int kept = 0;
  for (int attempt = 0; attempt < 20 * cfg.n_cloud && kept < cfg.n_cloud; ++attempt) {
    for (int i = 0; i < dim; ++i) x[i] = cex[i] + gauss(rng);
    if (inside(x)) {
      pts.push_back(x);
      ++kept;
    }
  }

  // Ascent on v(x) = sign * (q(x) - thr); only increasing steps are kept.
  std::vector<Expr> outputs{condition_expr(cond, cert, closed_loop)};
  for (int i = 0; i < dim; ++i) outputs.push_back(diff(outputs[0], i));
  const CompiledExpr prog(outputs);
  const double thr = cond.threshold + cert.levels.value(cond.threshold_level);
  auto violation = [&](const std::vector<double>& y, std::vector<double>* grad) {
    const auto vals = prog.eval_all(y);
    if (grad) {
      grad->resize(dim);
      for (int i = 0; i < dim; ++i) (*grad)[i] = cond.sign() * vals[1 + i];
    }
    return cond.sign() * (vals[0] - thr);
  };
  const double eta = cfg.eta_fraction * r_cloud;
  std::vector<double> cur = cex;
  std::vector<double> grad;
  try {
    double v = violation(cur, &grad);
    out.ascent_violation.push_back(v);
    for (int step = 0; step < cfg.n_ascent; ++step) {
      double norm = 0.0;
      for (double g : grad) norm += g * g;
      norm = std::sqrt(norm);
      if (!(norm > 0) || !std::isfinite(norm)) break;
      bool accepted = false;
      for (double scale = 1.0; scale > 1e-3 && !accepted; scale *= 0.5) {
        std::vector<double> next(dim);
        for (int i = 0; i < dim; ++i) {
          next[i] = std::clamp(cur[i] + scale * eta * grad[i] / norm, q.box[i].lo(), q.box[i].hi());
        }
        if (!inside(next)) continue;
        std::vector<double> g2;
        const double v2 = violation(next, &g2);
        if (v2 > v) {
          cur = next;
          v = v2;
          grad = std::move(g2);
          accepted = true;
        }
      }
      if (!accepted) break;
      out.ascent_violation.push_back(v);
      pts.push_back(cur);
    }
  } catch (const EvalError&) {
    // Leave the cloud as is; the ascent is only a refinement.
  }

  out.cloud.resize(dim, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t k = 0; k < pts.size(); ++k) {
    for (int i = 0; i < dim; ++i) out.cloud(i, static_cast<Eigen::Index>(k)) = pts[k][i];
  }
  return out;
}

}  // namespace certsynth
