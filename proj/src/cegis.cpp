#include "certsynth/cegis.hpp"

#include <chrono>
#include <sstream>

namespace certsynth {

int default_max_loops(PropertyKind k) { return k == PropertyKind::kSwa || k == PropertyKind::kRar ? 100 : 25; }

SymbolicCertificate translate(const Candidates& c, double precision) {
  SymbolicCertificate s;
  s.v = round_coefficients(c.v.to_symbolic()[0], precision);
  if (c.b) s.b = round_coefficients(c.b->to_symbolic()[0], precision);
  if (c.controller) {
    for (const auto& e : c.controller->to_symbolic()) s.controller.push_back(round_coefficients(e, precision));
  }
  return s;
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

}  // namespace

SynthesisResult synthesize(const PropertyProblem& p, const CandidateShapes& shapes, const CegisConfig& cfg) {
  const auto start = Clock::now();
  auto log = [&](const std::string& s) {
    if (cfg.log) cfg.log(s);
  };
  SynthesisResult res;
  auto finish = [&](std::string reason) {
    res.success = reason.empty();
    res.reason = std::move(reason);
    res.times.total_s = since(start);
    return res;
  };

  try {
    p.validate(10000, cfg.seed);
  } catch (const ProblemError& e) {
    return finish(std::string("invalid problem: ") + e.what());
  }
  const int max_loops = cfg.max_loops > 0 ? cfg.max_loops : default_max_loops(p.kind);
  const auto conds = build_conditions(p);
  Rng rng(cfg.seed);
  Candidates cand = init_candidates(p, shapes, rng);
  Dataset data;
  try {
    data = build_dataset(p, conds, cfg.train, rng);
  } catch (const SamplingError& e) {
    return finish(std::string("sampling failed: ") + e.what());
  }
  Learner learner(p, conds, cfg.train);

  // Condition lists are verified per function so that a failure in one does
  // not hide counterexamples for the other.
  std::vector<std::vector<Condition>> groups(1);
  for (const auto& c : conds) {
    if (c.target == Target::kB) {
      if (groups.size() == 1) groups.emplace_back();
      groups[1].push_back(c);
    } else {
      groups[0].push_back(c);
    }
  }

  for (int loop = 1; loop <= max_loops; ++loop) {
    res.loops = loop;
    auto t = Clock::now();
    TrainReport tr;
    try {
      tr = learner.train(cand, data, rng);
    } catch (const TrainingError& e) {
      res.times.learn_s += since(t);
      res.networks = cand;
      return finish(std::string("training failed: ") + e.what());
    }
    res.times.learn_s += since(t);
    {
      std::ostringstream os;
      os << "loop " << loop << ": " << tr.epochs << " epochs, loss " << tr.loss;
      for (const auto& st : tr.stats) {
        if (st.violations > 0) os << ", " << st.id << " " << st.violations << "/" << st.points;
      }
      log(os.str());
    }

    t = Clock::now();
    SymbolicCertificate cert = translate(cand, cfg.rounding);
    if (p.kind == PropertyKind::kRoa || p.kind == PropertyKind::kSwa) {
      cert.levels.beta_hat = estimate_roa_level(cert.v, p.region(RegionRole::kInit), cfg.level_samples, rng);
    }
    const VectorField closed = closed_loop_of(p, cert);
    res.last_verdicts.clear();
    bool all_valid = true;
    std::string resource;
    for (const auto& group : groups) {
      if (group.empty()) continue;
      VerificationReport rep;
      try {
        rep = verify_certificate(p, group, cert, cfg.verifier, false);
      } catch (const std::exception& e) {
        res.times.verify_s += since(t);
        return finish(std::string("verification failed: ") + e.what());
      }
      res.last_verdicts.insert(res.last_verdicts.end(), rep.verdicts.begin(), rep.verdicts.end());
      const Verdict* f = rep.failure();
      if (!f) continue;
      all_valid = false;
      if (f->kind == VerdictKind::kResourceOut) {
        resource = f->condition_id + " (" + f->detail + ")";
        continue;
      }
      const Condition* cond = nullptr;
      for (const auto& c : group) {
        if (c.id == f->condition_id) cond = &c;
      }
      CexBundle b = consolidate(f->point, *cond, p, cert, closed, cfg.consolidator, rng);
      data.append(cond->id, b.cloud);
      res.cex_count += b.cloud.cols();
      log(std::string("  ") + verdict_name(f->kind) + " on " + f->condition_id + ", +" +
          std::to_string(b.cloud.cols()) + " points");
    }
    if (!resource.empty()) {
      res.times.verify_s += since(t);
      res.certificate = cert;
      res.networks = cand;
      return finish("verifier resources exhausted on " + resource);
    }
    if (all_valid && p.kind == PropertyKind::kRswa) {
      BetaSearchResult br = rswa_beta_search(p, conds, cert, cfg.verifier, rng, cfg.level_samples);
      if (br.resource_out) {
        res.times.verify_s += since(t);
        res.certificate = cert;
        res.networks = cand;
        return finish("verifier resources exhausted in beta search");
      }
      if (br.beta) {
        cert.levels.beta = *br.beta;
      } else {
        all_valid = false;
        log("  beta search: " + br.detail);
      }
    }
    res.times.verify_s += since(t);
    res.certificate = cert;
    if (all_valid) {
      res.networks = cand;
      log("  valid");
      return finish("");
    }
  }
  res.networks = cand;
  return finish("out of loops");
}

}  // namespace certsynth
