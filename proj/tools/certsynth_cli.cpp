// Command-line front end. Talks to the library only through certsynth.h.

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "certsynth/certsynth.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(certsynth_status s) {
  if (s != CERTSYNTH_OK) throw UsageError(certsynth_last_error());
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ProblemPtr = std::unique_ptr<certsynth_problem, Deleter<certsynth_problem, certsynth_problem_free>>;
using ResultPtr = std::unique_ptr<certsynth_result, Deleter<certsynth_result, certsynth_result_free>>;
using CertPtr = std::unique_ptr<certsynth_certificate, Deleter<certsynth_certificate, certsynth_certificate_free>>;
using ReportPtr = std::unique_ptr<certsynth_report, Deleter<certsynth_report, certsynth_report_free>>;

std::string take_string(char* s) {
  std::string out = s ? s : "";
  certsynth_string_free(s);
  return out;
}

std::string fixed2(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

// --out wins over CERTSYNTH_OUT_DIR, which wins over ./certsynth_out.
fs::path output_dir(const std::string& flag) {
  fs::path dir = flag;
  if (dir.empty()) {
    const char* env = std::getenv("CERTSYNTH_OUT_DIR");
    dir = env && *env ? env : "certsynth_out";
  }
  fs::create_directories(dir);
  return dir;
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> max_loops;
  std::optional<double> delta;
  std::optional<double> gamma;
  std::optional<double> timeout;
  bool no_control_loss = false;

  void add_to(CLI::App* app) {
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--max-loops", max_loops, "CEGIS loop budget")->check(CLI::PositiveNumber);
    app->add_option("--delta", delta, "Verifier precision")->check(CLI::PositiveNumber);
    app->add_option("--gamma", gamma, "Lie derivative margin")->check(CLI::PositiveNumber);
    app->add_option("--timeout", timeout, "Verifier timeout per condition in seconds")->check(CLI::PositiveNumber);
    app->add_flag("--no-control-loss", no_control_loss, "Disable the control loss term");
  }

  void apply(certsynth_problem* p) const {
    if (seed) check(certsynth_problem_set_seed(p, *seed));
    if (max_loops) check(certsynth_problem_set_max_loops(p, *max_loops));
    if (delta) check(certsynth_problem_set_delta(p, *delta));
    if (gamma) check(certsynth_problem_set_gamma(p, *gamma));
    if (timeout) check(certsynth_problem_set_verifier_timeout(p, *timeout));
    if (no_control_loss) check(certsynth_problem_set_control_loss_weight(p, 0.0));
  }
};

ProblemPtr load_problem(const std::string& benchmark, const std::string& config) {
  if (benchmark.empty() == config.empty()) throw UsageError("give exactly one of --benchmark or --config");
  certsynth_problem* p = nullptr;
  if (!benchmark.empty()) {
    check(certsynth_problem_from_benchmark(benchmark.c_str(), &p));
  } else {
    check(certsynth_problem_from_config_file(config.c_str(), &p));
  }
  return ProblemPtr(p);
}

certsynth_problem_info info_of(const certsynth_problem* p) {
  certsynth_problem_info info{};
  check(certsynth_problem_get_info(p, &info));
  return info;
}

std::string file_stem(const certsynth_problem_info& info) {
  std::string s = info.benchmark_id ? std::to_string(info.benchmark_id) + "_" + info.name : info.name;
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return s + "_seed" + std::to_string(info.seed);
}

void log_to_stderr(const char* line, void*) { std::cerr << line << "\n"; }

// ---- list ----

int cmd_list(bool full) {
  if (full) {
    char* s = nullptr;
    check(certsynth_registry_listing(&s));
    std::cout << take_string(s);
    return kExitOk;
  }
  std::cout << std::left << std::setw(4) << "id" << std::setw(24) << "name" << std::setw(11) << "property"
            << std::setw(5) << "N_s" << std::setw(5) << "N_u"
            << "\n";
  for (int i = 0; i < certsynth_benchmark_count(); ++i) {
    certsynth_benchmark_info b{};
    check(certsynth_benchmark_at(i, &b));
    std::cout << std::setw(4) << b.id << std::setw(24) << b.name << std::setw(11) << b.property << std::setw(5)
              << b.n_states << std::setw(5) << b.n_inputs << (b.extended ? "extended" : "") << "\n";
  }
  return kExitOk;
}

// ---- synth ----

struct SimFlags {
  int n = 0;
  double horizon = 50.0;
  double dt = 1e-3;
};

void write_run_record(const fs::path& path, const certsynth_problem_info& info, const certsynth_result_summary& s,
                      const std::string& reason, const certsynth_sim_summary* sim) {
  std::ofstream os(path);
  os << "benchmark: " << info.benchmark_id << "\nname: " << info.name << "\nproperty: " << info.property
     << "\nseed: " << info.seed << "\noutcome: " << (s.success ? "Success" : "Failure") << "\nloops: " << s.loops
     << "\ncounterexamples: " << s.cex_count << "\nt_learn_s: " << fixed2(s.t_learn_s)
     << "\nt_verify_s: " << fixed2(s.t_verify_s) << "\nt_total_s: " << fixed2(s.t_total_s) << "\n";
  if (!reason.empty()) os << "reason: \"" << reason << "\"\n";
  if (sim) {
    os << "simulation:\n  trajectories: " << sim->n_trajectories << "\n  avoid_violations: " << sim->n_avoid_violations
       << "\n  arrived: " << sim->n_arrive_successes << "\n  remain_violations: " << sim->n_remain_violations
       << "\n  clean: " << (sim->clean ? "true" : "false") << "\n";
  }
}

int cmd_synth(const std::string& benchmark, const std::string& config, const Overrides& ov, const std::string& out,
              bool verbose, const SimFlags& simf) {
  ProblemPtr p = load_problem(benchmark, config);
  ov.apply(p.get());
  const certsynth_problem_info info = info_of(p.get());
  certsynth_result* raw = nullptr;
  check(certsynth_synthesize(p.get(), verbose ? log_to_stderr : nullptr, nullptr, &raw));
  ResultPtr r(raw);
  certsynth_result_summary s{};
  check(certsynth_result_get_summary(r.get(), &s));
  const fs::path dir = output_dir(out);
  const std::string stem = file_stem(info);

  std::cout << info.name << " seed " << info.seed << ": " << (s.success ? "Success" : "Failure") << " after "
            << s.loops << " loop(s), learn " << fixed2(s.t_learn_s) << " s, verify " << fixed2(s.t_verify_s)
            << " s, total " << fixed2(s.t_total_s) << " s\n";
  if (!s.success) std::cout << "reason: " << certsynth_result_reason(r.get()) << "\n";

  std::optional<certsynth_sim_summary> sim;
  if (s.success) {
    char* path = nullptr;
    check(certsynth_result_write(r.get(), (dir / stem).string().c_str(), &path));
    std::cout << "certificate: " << take_string(path) << "\n";
    if (simf.n > 0) {
      certsynth_certificate* c = nullptr;
      check(certsynth_result_certificate(r.get(), &c));
      CertPtr cert(c);
      certsynth_sim_options o{};
      certsynth_sim_options_default(&o);
      o.n_init = simf.n;
      o.horizon = simf.horizon;
      o.dt = simf.dt;
      o.seed = info.seed;
      sim.emplace();
      check(certsynth_simulate(cert.get(), &o, &*sim));
      std::cout << "simulation: " << sim->n_trajectories << " trajectories, " << sim->n_avoid_violations
                << " avoid violations, " << sim->n_arrive_successes << " arrived, " << sim->n_remain_violations
                << " remain violations\n";
    }
  }
  write_run_record(dir / (stem + ".run.yaml"), info, s, certsynth_result_reason(r.get()), sim ? &*sim : nullptr);
  return s.success ? kExitOk : kExitFailure;
}

// ---- suite ----

// "0-9", "1,4,7" or a mix; empty means no seeds.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      const auto dash = item.find('-');
      if (dash == std::string::npos) {
        out.push_back(std::stoull(item));
      } else {
        const auto lo = std::stoull(item.substr(0, dash));
        const auto hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) throw UsageError("empty seed range '" + item + "'");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw UsageError("bad seed list entry '" + item + "'");
    }
  }
  return out;
}

std::vector<std::string> default_benchmarks() {
  std::vector<std::string> ids;
  for (int i = 0; i < certsynth_benchmark_count(); ++i) {
    certsynth_benchmark_info b{};
    check(certsynth_benchmark_at(i, &b));
    if (!b.extended) ids.push_back(std::to_string(b.id));
  }
  return ids;
}

struct Cell {
  std::size_t bench = 0;
  std::uint64_t seed = 0;
  certsynth_result_summary summary{};
  std::string reason;
};

int cmd_suite(std::vector<std::string> benchmarks, const std::string& seeds_text, const Overrides& ov,
              const std::string& out, const std::string& csv_name, int jobs) {
  if (benchmarks.empty()) benchmarks = default_benchmarks();
  const std::vector<std::uint64_t> seeds = parse_seeds(seeds_text);
  // Resolve every benchmark before running anything, so a typo fails fast.
  std::vector<ProblemPtr> problems;
  std::vector<certsynth_problem_info> infos;
  for (const auto& b : benchmarks) {
    problems.push_back(load_problem(b, ""));
    ov.apply(problems.back().get());
    infos.push_back(info_of(problems.back().get()));
  }
  const fs::path dir = output_dir(out);
  std::vector<Cell> cells;
  for (std::size_t b = 0; b < problems.size(); ++b) {
    for (auto s : seeds) cells.push_back({b, s, {}, {}});
  }

  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      Cell& cell = cells[k];
      certsynth_problem* raw = nullptr;
      certsynth_result* res = nullptr;
      // Each cell gets its own copy of the problem so seeds stay isolated.
      const std::string key = benchmarks[cell.bench];
      if (certsynth_problem_from_benchmark(key.c_str(), &raw) != CERTSYNTH_OK) continue;
      ProblemPtr p(raw);
      ov.apply(p.get());
      certsynth_problem_set_seed(p.get(), cell.seed);
      if (certsynth_synthesize(p.get(), nullptr, nullptr, &res) != CERTSYNTH_OK) {
        cell.reason = certsynth_last_error();
        continue;
      }
      ResultPtr r(res);
      certsynth_result_get_summary(r.get(), &cell.summary);
      cell.reason = certsynth_result_reason(r.get());
      if (cell.summary.success) {
        const std::string stem = file_stem(info_of(p.get()));
        certsynth_result_write(r.get(), (dir / stem).string().c_str(), nullptr);
      }
      std::lock_guard<std::mutex> lock(io);
      std::cerr << infos[cell.bench].name << " seed " << cell.seed << ": "
                << (cell.summary.success ? "Success" : "Failure") << " (" << cell.summary.loops << " loops)\n";
    }
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const fs::path csv_path = dir / csv_name;
  std::ofstream csv(csv_path);
  if (!csv) throw UsageError("cannot write '" + csv_path.string() + "'");
  csv << "benchmark,property,N_s,N_u,seed,outcome,loops,t_learn_s,t_verify_s,t_total_s\n";
  for (const Cell& c : cells) {
    const auto& i = infos[c.bench];
    csv << i.benchmark_id << "," << i.property << "," << i.n_states << "," << i.n_inputs << "," << c.seed << ","
        << (c.summary.success ? "Success" : "Failure") << "," << c.summary.loops << "," << fixed2(c.summary.t_learn_s)
        << "," << fixed2(c.summary.t_verify_s) << "," << fixed2(c.summary.t_total_s) << "\n";
  }

  // Per-benchmark success rate and wall time over successes.
  bool all_ok = true;
  std::cout << std::left << std::setw(4) << "id" << std::setw(28) << "benchmark" << std::setw(8) << "S(%)"
            << "t_min  t_mean  t_max\n";
  for (std::size_t b = 0; b < problems.size() && !seeds.empty(); ++b) {
    int ok = 0;
    double lo = 0, hi = 0, sum = 0;
    for (const Cell& c : cells) {
      if (c.bench != b) continue;
      all_ok = all_ok && c.summary.success;
      if (!c.summary.success) continue;
      const double t = c.summary.t_total_s;
      lo = ok ? std::min(lo, t) : t;
      hi = ok ? std::max(hi, t) : t;
      sum += t;
      ++ok;
    }
    std::cout << std::setw(4) << infos[b].benchmark_id << std::setw(28) << infos[b].name << std::setw(8)
              << fixed2(100.0 * ok / static_cast<double>(seeds.size()));
    if (ok) std::cout << fixed2(lo) << "  " << fixed2(sum / ok) << "  " << fixed2(hi);
    std::cout << "\n";
  }
  std::cout << "results: " << csv_path.string() << "\n";
  return all_ok ? kExitOk : kExitFailure;
}

// ---- check ----

CertPtr load_certificate(const std::string& file, const std::string& benchmark, const std::string& config,
                         const std::string& v, const std::string& b, const std::vector<std::string>& controller,
                         const Overrides& ov) {
  certsynth_certificate* c = nullptr;
  if (!file.empty()) {
    if (!benchmark.empty() || !config.empty() || !v.empty()) {
      throw UsageError("a certificate file already names its problem and functions");
    }
    check(certsynth_certificate_load(file.c_str(), &c));
    return CertPtr(c);
  }
  if (v.empty()) throw UsageError("give a certificate file or --V with --benchmark/--config");
  ProblemPtr p = load_problem(benchmark, config);
  ov.apply(p.get());
  std::vector<const char*> ctrl;
  for (const auto& e : controller) ctrl.push_back(e.c_str());
  check(certsynth_certificate_from_text(p.get(), v.c_str(), b.empty() ? nullptr : b.c_str(), ctrl.data(),
                                        static_cast<int>(ctrl.size()), &c));
  return CertPtr(c);
}

int cmd_check(certsynth_certificate* cert, const Overrides& ov, const std::string& smt_dir) {
  certsynth_check_options o{};
  certsynth_check_options_default(&o);
  if (ov.delta) o.delta = *ov.delta;
  if (ov.timeout) o.timeout_s = *ov.timeout;
  if (ov.seed) o.seed = *ov.seed;
  if (!smt_dir.empty()) o.smt_dump_dir = smt_dir.c_str();
  certsynth_report* raw = nullptr;
  check(certsynth_check(cert, &o, &raw));
  ReportPtr report(raw);
  for (int i = 0; i < certsynth_report_count(report.get()); ++i) {
    certsynth_verdict_info v{};
    check(certsynth_report_verdict(report.get(), i, &v));
    std::cout << std::left << std::setw(26) << v.condition << v.verdict;
    if (v.point) {
      std::cout << " at (";
      for (int k = 0; k < v.point_dim; ++k) std::cout << (k ? ", " : "") << std::setprecision(9) << v.point[k];
      std::cout << "), violation " << v.violation;
    }
    if (*v.detail) std::cout << " [" << v.detail << "]";
    std::cout << "\n";
  }
  const bool ok = certsynth_report_valid(report.get());
  std::cout << (ok ? "Valid" : "Not valid") << "\n";
  return ok ? kExitOk : kExitFailure;
}

// ---- simulate ----

int cmd_simulate(certsynth_certificate* cert, const SimFlags& f, std::uint64_t seed, int n_dump, int resolution,
                 const std::string& out) {
  const fs::path dir = output_dir(out);
  certsynth_sim_options o{};
  certsynth_sim_options_default(&o);
  o.n_init = f.n;
  o.dt = f.dt;
  o.horizon = f.horizon;
  o.seed = seed;
  certsynth_sim_summary s{};
  check(certsynth_simulate(cert, &o, &s));
  std::cout << s.n_trajectories << " trajectories";
  if (s.checks_avoid) std::cout << ", " << s.n_avoid_violations << " avoid violations";
  if (s.checks_arrive) std::cout << ", " << s.n_arrive_successes << " arrived";
  if (s.checks_remain) std::cout << ", " << s.n_remain_violations << " remain violations";
  if (s.n_blow_up) std::cout << ", " << s.n_blow_up << " blew up";
  std::cout << "\n";

  // Keep dumps around a thousand rows each.
  const int stride = std::max(1, static_cast<int>(f.horizon / f.dt / 1000.0));
  for (int k = 0; k < n_dump; ++k) {
    const fs::path path = dir / ("trajectory_" + std::to_string(k) + ".csv");
    check(certsynth_write_trajectory_csv(cert, nullptr, 0, f.dt, f.horizon, stride, seed + static_cast<unsigned>(k),
                                         path.string().c_str()));
  }
  for (const char* which : {"V", "B"}) {
    char* text = nullptr;
    if (certsynth_certificate_function(cert, which, &text) != CERTSYNTH_OK) continue;
    certsynth_string_free(text);
    const fs::path path = dir / (std::string("contour_") + which + ".csv");
    check(certsynth_write_contour_csv(cert, which, 0, 1, resolution, path.string().c_str()));
  }
  std::cout << "CSV files in " << dir.string() << "\n";
  return s.clean ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural certificate synthesis for continuous-time dynamical systems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", certsynth_version());

  auto* list = app.add_subcommand("list", "List the benchmark registry");
  bool full = false;
  list->add_flag("--full", full, "Print dynamics, regions and network shapes");

  std::string benchmark, config, out;
  bool verbose = false;
  Overrides ov;
  SimFlags simf;
  simf.n = 100;

  auto* synth = app.add_subcommand("synth", "Synthesize a certificate for a benchmark or configuration file");
  synth->add_option("-b,--benchmark", benchmark, "Benchmark id or Name-Property");
  synth->add_option("-c,--config", config, "Problem configuration file")->check(CLI::ExistingFile);
  synth->add_option("-o,--out", out, "Output directory (default $CERTSYNTH_OUT_DIR or ./certsynth_out)");
  synth->add_flag("-v,--verbose", verbose, "Log every loop to stderr");
  int synth_sim = 0;
  synth->add_option("--simulate", synth_sim, "Simulate this many trajectories on success")->check(CLI::NonNegativeNumber);
  ov.add_to(synth);

  std::vector<std::string> suite_ids;
  std::string seeds = "0-9", csv_name = "suite.csv";
  int jobs = 1;
  auto* suite = app.add_subcommand("suite", "Run benchmarks over several seeds and write a results CSV");
  suite->add_option("-b,--benchmarks", suite_ids, "Benchmark ids (default: all non-extended)")->delimiter(',');
  // A bare --seeds (or --seeds=) gives an empty seed list.
  suite->add_option("-s,--seeds", seeds, "Seeds as a list and/or ranges, e.g. 0-9 or 1,5,7")->expected(0, 1);
  suite->add_option("-o,--out", out, "Output directory");
  suite->add_option("--csv", csv_name, "CSV file name inside the output directory");
  suite->add_option("-j,--jobs", jobs, "Cells run in parallel")->check(CLI::PositiveNumber);
  ov.add_to(suite);

  std::string cert_file, v_text, b_text, smt_dir;
  std::vector<std::string> ctrl_text;
  auto* chk = app.add_subcommand("check", "Verify a symbolic certificate without training");
  chk->add_option("certificate", cert_file, "Certificate file written by synth")->check(CLI::ExistingFile);
  chk->add_option("-b,--benchmark", benchmark, "Benchmark whose problem the certificate is for");
  chk->add_option("-c,--config", config, "Configuration file whose problem the certificate is for")
      ->check(CLI::ExistingFile);
  chk->add_option("--V", v_text, "Certificate V as an expression in x0, x1, ...");
  chk->add_option("--B", b_text, "Second function B for SWA and RAR");
  chk->add_option("--controller", ctrl_text, "Controller expressions, one per input");
  chk->add_option("--smt-dir", smt_dir, "Write each query as SMT-LIB 2 into this directory");
  ov.add_to(chk);

  std::uint64_t sim_seed = 0;
  int n_dump = 5, resolution = 101;
  auto* sim = app.add_subcommand("simulate", "Simulate a certificate's closed loop and write CSV plot data");
  sim->add_option("certificate", cert_file, "Certificate file written by synth")->check(CLI::ExistingFile);
  sim->add_option("-b,--benchmark", benchmark, "Benchmark, together with --V");
  sim->add_option("-c,--config", config, "Configuration file, together with --V")->check(CLI::ExistingFile);
  sim->add_option("--V", v_text, "Certificate V");
  sim->add_option("--B", b_text, "Second function B");
  sim->add_option("--controller", ctrl_text, "Controller expressions, one per input");
  sim->add_option("-n,--trajectories", simf.n, "Trajectories for the empirical check")->check(CLI::PositiveNumber);
  sim->add_option("-T,--horizon", simf.horizon, "Simulated time")->check(CLI::PositiveNumber);
  sim->add_option("--dt", simf.dt, "RK4 step")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "Seed for initial states");
  sim->add_option("--dump", n_dump, "Trajectories written as CSV")->check(CLI::NonNegativeNumber);
  sim->add_option("--resolution", resolution, "Contour grid points per axis")->check(CLI::Range(2, 10000));
  sim->add_option("-o,--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (list->parsed()) return cmd_list(full);
    if (synth->parsed()) return cmd_synth(benchmark, config, ov, out, verbose, SimFlags{synth_sim});
    if (suite->parsed()) {
      if (suite->count("--seeds") && suite->get_option("--seeds")->results().empty()) seeds.clear();
      return cmd_suite(suite_ids, seeds, ov, out, csv_name, jobs);
    }
    if (chk->parsed()) {
      CertPtr c = load_certificate(cert_file, benchmark, config, v_text, b_text, ctrl_text, ov);
      return cmd_check(c.get(), ov, smt_dir);
    }
    if (sim->parsed()) {
      CertPtr c = load_certificate(cert_file, benchmark, config, v_text, b_text, ctrl_text, Overrides{});
      return cmd_simulate(c.get(), simf, sim_seed, n_dump, resolution, out);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
