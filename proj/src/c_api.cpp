#include "certsynth/certsynth.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "certsynth/certificate_io.hpp"
#include "certsynth/simulate.hpp"

using namespace certsynth;

struct certsynth_problem {
  ProblemConfig config;
};

struct certsynth_result {
  CertificateRecord record;
  SynthesisResult result;
};

struct certsynth_certificate {
  CertificateRecord record;
};

struct certsynth_report {
  std::vector<Verdict> verdicts;
};

namespace {

thread_local std::string g_last_error;

certsynth_status fail(certsynth_status s, const std::string& what) {
  g_last_error = what;
  return s;
}

// Runs `fn`, mapping exceptions to status codes.
template <typename F>
certsynth_status guarded(F&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const ConfigError& e) {
    return fail(CERTSYNTH_ERR_CONFIG, e.what());
  } catch (const ProblemError& e) {
    return fail(CERTSYNTH_ERR_CONFIG, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(CERTSYNTH_ERR_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(CERTSYNTH_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CERTSYNTH_ERR_INTERNAL, "unknown error");
  }
}

#define REQUIRE(cond, what) \
  if (!(cond)) return fail(CERTSYNTH_ERR_ARGUMENT, what)

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const Expr* function_of(const SymbolicCertificate& c, const std::string& which) {
  if (which == "V" || which == "v") return &c.v;
  if (which == "B" || which == "b") return c.b ? &*c.b : nullptr;
  if (which.size() > 1 && which[0] == 'u') {
    const std::size_t i = std::stoul(which.substr(1));
    return i < c.controller.size() ? &c.controller[i] : nullptr;
  }
  return nullptr;
}

}  // namespace

extern "C" {

const char* certsynth_last_error(void) { return g_last_error.c_str(); }

void certsynth_string_free(char* s) { std::free(s); }

const char* certsynth_version(void) { return "1.0.0"; }

int certsynth_benchmark_count(void) { return static_cast<int>(registry().size()); }

certsynth_status certsynth_benchmark_at(int index, certsynth_benchmark_info* out) {
  REQUIRE(out, "null output");
  REQUIRE(index >= 0 && index < certsynth_benchmark_count(), "benchmark index out of range");
  const BenchmarkEntry& e = registry()[static_cast<std::size_t>(index)];
  *out = {e.id, e.name.c_str(), kind_name(e.kind), e.dim(), e.n_inputs, e.extended ? 1 : 0};
  return CERTSYNTH_OK;
}

certsynth_status certsynth_registry_listing(char** out) {
  REQUIRE(out, "null output");
  return guarded([&] {
    *out = dup_string(registry_listing());
    return CERTSYNTH_OK;
  });
}

certsynth_status certsynth_problem_from_benchmark(const char* key, certsynth_problem** out) {
  REQUIRE(key && out, "null argument");
  return guarded([&] {
    *out = new certsynth_problem{config_for(find_benchmark(key))};
    return CERTSYNTH_OK;
  });
}

certsynth_status certsynth_problem_from_config_file(const char* path, certsynth_problem** out) {
  REQUIRE(path && out, "null argument");
  return guarded([&] {
    std::ifstream in(path);
    if (!in) return fail(CERTSYNTH_ERR_IO, std::string("cannot open '") + path + "'");
    *out = new certsynth_problem{load_problem_config(path)};
    if ((*out)->config.name.empty()) (*out)->config.name = kind_name((*out)->config.problem.kind);
    return CERTSYNTH_OK;
  });
}

certsynth_status certsynth_problem_from_config_text(const char* yaml, certsynth_problem** out) {
  REQUIRE(yaml && out, "null argument");
  return guarded([&] {
    *out = new certsynth_problem{parse_problem_config(yaml)};
    if ((*out)->config.name.empty()) (*out)->config.name = kind_name((*out)->config.problem.kind);
    return CERTSYNTH_OK;
  });
}

void certsynth_problem_free(certsynth_problem* p) { delete p; }

certsynth_status certsynth_problem_get_info(const certsynth_problem* p, certsynth_problem_info* out) {
  REQUIRE(p && out, "null argument");
  const ProblemConfig& c = p->config;
  out->name = c.name.c_str();
  out->property = kind_name(c.problem.kind);
  out->benchmark_id = c.benchmark_id;
  out->n_states = c.problem.dim();
  out->n_inputs = c.problem.dynamics.dim_input;
  out->seed = c.cegis.seed;
  out->max_loops = c.cegis.max_loops > 0 ? c.cegis.max_loops : default_max_loops(c.problem.kind);
  out->delta = c.problem.delta;
  out->gamma = c.problem.gamma;
  return CERTSYNTH_OK;
}

certsynth_status certsynth_problem_set_seed(certsynth_problem* p, uint64_t seed) {
  REQUIRE(p, "null problem");
  p->config.cegis.seed = seed;
  return CERTSYNTH_OK;
}

certsynth_status certsynth_problem_set_max_loops(certsynth_problem* p, int max_loops) {
  REQUIRE(p, "null problem");
  REQUIRE(max_loops > 0, "max_loops must be positive");
  p->config.cegis.max_loops = max_loops;
  return CERTSYNTH_OK;
}

certsynth_status certsynth_problem_set_delta(certsynth_problem* p, double delta) {
  REQUIRE(p, "null problem");
  REQUIRE(delta > 0 && std::isfinite(delta), "delta must be positive");
  p->config.problem.delta = delta;
  p->config.cegis.verifier.delta = delta;
  return CERTSYNTH_OK;
}

certsynth_status certsynth_problem_set_gamma(certsynth_problem* p, double gamma) {
  REQUIRE(p, "null problem");
  REQUIRE(gamma > 0 && std::isfinite(gamma), "gamma must be positive");
  p->config.problem.gamma = gamma;
  return CERTSYNTH_OK;
}

certsynth_status certsynth_problem_set_control_loss_weight(certsynth_problem* p, double weight) {
  REQUIRE(p, "null problem");
  REQUIRE(std::isfinite(weight), "weight must be finite");
  p->config.cegis.train.control_loss_weight = weight;
  return CERTSYNTH_OK;
}

certsynth_status certsynth_problem_set_verifier_timeout(certsynth_problem* p, double seconds) {
  REQUIRE(p, "null problem");
  REQUIRE(seconds > 0, "timeout must be positive");
  p->config.cegis.verifier.timeout_s = seconds;
  return CERTSYNTH_OK;
}

certsynth_status certsynth_synthesize(const certsynth_problem* p, certsynth_log_fn log, void* user,
                                      certsynth_result** out) {
  REQUIRE(p && out, "null argument");
  return guarded([&] {
    CegisConfig cfg = p->config.cegis;
    if (log) cfg.log = [log, user](const std::string& line) { log(line.c_str(), user); };
    auto* r = new certsynth_result;
    try {
      r->result = synthesize(p->config.problem, p->config.shapes, cfg);
    } catch (...) {
      delete r;
      throw;
    }
    r->record.name = p->config.name;
    r->record.benchmark_id = p->config.benchmark_id;
    r->record.problem = p->config.problem;
    r->record.seed = cfg.seed;
    r->record.certificate = r->result.certificate;
    *out = r;
    return CERTSYNTH_OK;
  });
}

void certsynth_result_free(certsynth_result* r) { delete r; }

certsynth_status certsynth_result_get_summary(const certsynth_result* r, certsynth_result_summary* out) {
  REQUIRE(r && out, "null argument");
  const SynthesisResult& s = r->result;
  *out = {s.success ? 1 : 0, s.loops, s.cex_count, s.times.learn_s, s.times.verify_s, s.times.total_s};
  return CERTSYNTH_OK;
}

const char* certsynth_result_reason(const certsynth_result* r) { return r ? r->result.reason.c_str() : ""; }

certsynth_status certsynth_result_certificate(const certsynth_result* r, certsynth_certificate** out) {
  REQUIRE(r && out, "null argument");
  return guarded([&] {
    *out = new certsynth_certificate{r->record};
    return CERTSYNTH_OK;
  });
}

certsynth_status certsynth_result_write(const certsynth_result* r, const char* stem, char** path_out) {
  REQUIRE(r && stem, "null argument");
  return guarded([&] {
    const auto* nets = r->result.networks ? &*r->result.networks : nullptr;
    const std::string path = write_certificate(stem, r->record, nets);
    if (path_out) *path_out = dup_string(path);
    return CERTSYNTH_OK;
  });
}

certsynth_status certsynth_certificate_load(const char* path, certsynth_certificate** out) {
  REQUIRE(path && out, "null argument");
  return guarded([&] {
    std::ifstream in(path);
    if (!in) return fail(CERTSYNTH_ERR_IO, std::string("cannot open '") + path + "'");
    CertificateRecord rec = read_certificate(path);
    rec.problem.validate(10000, rec.seed);
    *out = new certsynth_certificate{std::move(rec)};
    return CERTSYNTH_OK;
  });
}

certsynth_status certsynth_certificate_from_text(const certsynth_problem* p, const char* v, const char* b,
                                                 const char* const* controller, int n_controller,
                                                 certsynth_certificate** out) {
  REQUIRE(p && v && out, "null argument");
  REQUIRE(n_controller >= 0 && (n_controller == 0 || controller), "bad controller list");
  return guarded([&] {
    const PropertyProblem& prob = p->config.problem;
    const int n = prob.dim();
    if (n_controller != prob.dynamics.dim_input) {
      return fail(CERTSYNTH_ERR_CONFIG, "expected " + std::to_string(prob.dynamics.dim_input) +
                                            " controller expressions, got " + std::to_string(n_controller));
    }
    if (needs_second_function(prob.kind) && !b) {
      return fail(CERTSYNTH_ERR_CONFIG, std::string(kind_name(prob.kind)) + " needs a second function B");
    }
    CertificateRecord rec;
    rec.name = p->config.name;
    rec.benchmark_id = p->config.benchmark_id;
    rec.problem = prob;
    rec.seed = p->config.cegis.seed;
    try {
      rec.certificate.v = parse(v, n);
      if (b) rec.certificate.b = parse(b, n);
      for (int i = 0; i < n_controller; ++i) rec.certificate.controller.push_back(parse(controller[i], n));
    } catch (const std::exception& e) {
      return fail(CERTSYNTH_ERR_CONFIG, std::string("cannot parse certificate: ") + e.what());
    }
    *out = new certsynth_certificate{std::move(rec)};
    return CERTSYNTH_OK;
  });
}

void certsynth_certificate_free(certsynth_certificate* c) { delete c; }

certsynth_status certsynth_certificate_function(const certsynth_certificate* c, const char* which, char** out) {
  REQUIRE(c && which && out, "null argument");
  return guarded([&] {
    const Expr* e = function_of(c->record.certificate, which);
    if (!e) return fail(CERTSYNTH_ERR_ARGUMENT, std::string("certificate has no function '") + which + "'");
    *out = dup_string(e->to_string());
    return CERTSYNTH_OK;
  });
}

certsynth_status certsynth_certificate_write(const certsynth_certificate* c, const char* path) {
  REQUIRE(c && path, "null argument");
  return guarded([&] {
    std::ofstream os(path);
    if (!os) return fail(CERTSYNTH_ERR_IO, std::string("cannot write '") + path + "'");
    os << certificate_to_yaml(c->record);
    return CERTSYNTH_OK;
  });
}

void certsynth_check_options_default(certsynth_check_options* out) {
  if (!out) return;
  const VerifierConfig d;
  *out = {0.0, d.timeout_s, d.max_splits, nullptr, 0};
}

certsynth_status certsynth_check(certsynth_certificate* c, const certsynth_check_options* opts,
                                 certsynth_report** out) {
  REQUIRE(c && out, "null argument");
  certsynth_check_options o;
  certsynth_check_options_default(&o);
  if (opts) o = *opts;
  return guarded([&] {
    PropertyProblem& p = c->record.problem;
    SymbolicCertificate& cert = c->record.certificate;
    VerifierConfig cfg;
    cfg.delta = o.delta > 0 ? o.delta : p.delta;
    cfg.timeout_s = o.timeout_s;
    cfg.max_splits = o.max_splits;
    if (o.smt_dump_dir) cfg.smt_dump_dir = o.smt_dump_dir;
    const std::vector<Condition> conds = build_conditions(p);
    Rng rng(o.seed);
    if (p.kind == PropertyKind::kRoa && !std::isfinite(cert.levels.beta_hat)) {
      cert.levels.beta_hat = estimate_roa_level(cert.v, p.region(RegionRole::kInit), 2000, rng);
    }
    auto report = std::make_unique<certsynth_report>();
    if (p.kind == PropertyKind::kRswa && !std::isfinite(cert.levels.beta)) {
      // The beta search needs the beta-free conditions to hold first.
      const VerificationReport pre = verify_certificate(p, conds, cert, cfg, false);
      if (pre.all_valid()) {
        const BetaSearchResult br = rswa_beta_search(p, conds, cert, cfg, rng);
        if (br.beta) cert.levels.beta = *br.beta;
      }
    }
    for (const Condition& cond : conds) {
      if (cond.beta_dependent && !std::isfinite(cert.levels.beta)) {
        Verdict v;
        v.kind = VerdictKind::kResourceOut;
        v.condition_id = cond.id;
        v.detail = "no beta verifies the final-set conditions";
        report->verdicts.push_back(v);
        continue;
      }
      const VerificationReport r = verify_certificate(p, {cond}, cert, cfg, true);
      report->verdicts.insert(report->verdicts.end(), r.verdicts.begin(), r.verdicts.end());
    }
    *out = report.release();
    return CERTSYNTH_OK;
  });
}

void certsynth_report_free(certsynth_report* r) { delete r; }

int certsynth_report_valid(const certsynth_report* r) {
  if (!r || r->verdicts.empty()) return 0;
  for (const Verdict& v : r->verdicts) {
    if (!v.valid()) return 0;
  }
  return 1;
}

int certsynth_report_count(const certsynth_report* r) { return r ? static_cast<int>(r->verdicts.size()) : 0; }

certsynth_status certsynth_report_verdict(const certsynth_report* r, int index, certsynth_verdict_info* out) {
  REQUIRE(r && out, "null argument");
  REQUIRE(index >= 0 && index < certsynth_report_count(r), "verdict index out of range");
  const Verdict& v = r->verdicts[static_cast<std::size_t>(index)];
  out->condition = v.condition_id.c_str();
  out->verdict = verdict_name(v.kind);
  out->violation = v.violation;
  out->boxes = v.boxes;
  out->seconds = v.seconds;
  out->point = v.point.empty() ? nullptr : v.point.data();
  out->point_dim = static_cast<int>(v.point.size());
  out->detail = v.detail.c_str();
  return CERTSYNTH_OK;
}

void certsynth_sim_options_default(certsynth_sim_options* out) {
  if (!out) return;
  const SimulationConfig d;
  *out = {d.n_init, d.dt, d.horizon, 0};
}

certsynth_status certsynth_simulate(const certsynth_certificate* c, const certsynth_sim_options* opts,
                                    certsynth_sim_summary* out) {
  REQUIRE(c && out, "null argument");
  certsynth_sim_options o;
  certsynth_sim_options_default(&o);
  if (opts) o = *opts;
  REQUIRE(o.n_init > 0 && o.dt > 0 && o.horizon >= o.dt, "bad simulation options");
  return guarded([&] {
    const PropertyProblem& p = c->record.problem;
    const SymbolicCertificate& cert = c->record.certificate;
    SimulationConfig cfg;
    cfg.n_init = o.n_init;
    cfg.dt = o.dt;
    cfg.horizon = o.horizon;
    Rng rng(o.seed);
    const EmpiricalVerdict v = check_property(p, closed_loop_of(p, cert), cfg, rng, &cert);
    *out = {v.n_trajectories,    v.n_avoid_violations, v.n_arrive_successes, v.n_remain_violations,
            v.n_blow_up,         v.checks_avoid,       v.checks_arrive,      v.checks_remain,
            v.max_barrier,       v.lyapunov_increases, v.clean() ? 1 : 0};
    return CERTSYNTH_OK;
  });
}

certsynth_status certsynth_write_trajectory_csv(const certsynth_certificate* c, const double* x0, int dim, double dt,
                                                double horizon, int stride, uint64_t seed, const char* path) {
  REQUIRE(c && path, "null argument");
  REQUIRE(stride > 0, "stride must be positive");
  return guarded([&] {
    const PropertyProblem& p = c->record.problem;
    std::vector<double> start;
    if (x0) {
      if (dim != p.dim()) return fail(CERTSYNTH_ERR_ARGUMENT, "initial state has the wrong dimension");
      start.assign(x0, x0 + dim);
    } else {
      Rng rng(seed);
      const Region& from = p.has(RegionRole::kInit) ? p.region(RegionRole::kInit) : p.region(RegionRole::kDomain);
      const SampleBatch s = sample_interior(from, 1, rng);
      start.assign(s.points.col(0).data(), s.points.col(0).data() + p.dim());
    }
    const Trajectory t = integrate(closed_loop_of(p, c->record.certificate), start, dt, horizon);
    std::ofstream os(path);
    if (!os) return fail(CERTSYNTH_ERR_IO, std::string("cannot write '") + path + "'");
    write_trajectory_csv(os, t, stride);
    return CERTSYNTH_OK;
  });
}

certsynth_status certsynth_write_contour_csv(const certsynth_certificate* c, const char* which, int axis_i, int axis_j,
                                             int resolution, const char* path) {
  REQUIRE(c && which && path, "null argument");
  return guarded([&] {
    const PropertyProblem& p = c->record.problem;
    const Expr* fn = function_of(c->record.certificate, which);
    if (!fn) return fail(CERTSYNTH_ERR_ARGUMENT, std::string("certificate has no function '") + which + "'");
    const auto [lo, hi] = p.region(RegionRole::kDomain).bounding_box();
    std::ofstream os(path);
    if (!os) return fail(CERTSYNTH_ERR_IO, std::string("cannot write '") + path + "'");
    write_contour_csv(os, *fn, p.dim(), axis_i, axis_j, lo, hi, resolution);
    return CERTSYNTH_OK;
  });
}

}  // extern "C"
