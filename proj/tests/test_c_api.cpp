#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "certsynth/certsynth.h"

namespace {

const char* kLinearSink = R"(name: sink
property: Stability
dynamics: ["-x0", "-x1"]
regions:
  domain: Torus([0, 0], 1, 0.01)
networks:
  v: {neurons: [4], activations: [poly2]}
)";

certsynth_problem* sink() {
  certsynth_problem* p = nullptr;
  EXPECT_EQ(certsynth_problem_from_config_text(kLinearSink, &p), CERTSYNTH_OK) << certsynth_last_error();
  return p;
}

certsynth_report* check_v(certsynth_problem* p, const char* v) {
  certsynth_certificate* c = nullptr;
  EXPECT_EQ(certsynth_certificate_from_text(p, v, nullptr, nullptr, 0, &c), CERTSYNTH_OK);
  certsynth_report* r = nullptr;
  EXPECT_EQ(certsynth_check(c, nullptr, &r), CERTSYNTH_OK) << certsynth_last_error();
  certsynth_certificate_free(c);
  return r;
}

}  // namespace

TEST(CApi, RegistryListsAllBenchmarks) {
  ASSERT_EQ(certsynth_benchmark_count(), 26);
  certsynth_benchmark_info b{};
  ASSERT_EQ(certsynth_benchmark_at(19, &b), CERTSYNTH_OK);
  EXPECT_EQ(b.id, 20);
  EXPECT_STREQ(b.property, "RSWA");
  EXPECT_EQ(certsynth_benchmark_at(26, &b), CERTSYNTH_ERR_ARGUMENT);
  char* listing = nullptr;
  ASSERT_EQ(certsynth_registry_listing(&listing), CERTSYNTH_OK);
  EXPECT_NE(std::string(listing).find("SecondOrderLQR"), std::string::npos);
  certsynth_string_free(listing);
}

TEST(CApi, UnknownBenchmarkIsConfigErrorListingRegistry) {
  certsynth_problem* p = nullptr;
  EXPECT_EQ(certsynth_problem_from_benchmark("Nope", &p), CERTSYNTH_ERR_CONFIG);
  EXPECT_EQ(p, nullptr);
  EXPECT_NE(std::string(certsynth_last_error()).find("NonPoly0"), std::string::npos);
}

TEST(CApi, NullArgumentsAreRejected) {
  EXPECT_EQ(certsynth_problem_from_benchmark(nullptr, nullptr), CERTSYNTH_ERR_ARGUMENT);
  EXPECT_EQ(certsynth_problem_set_seed(nullptr, 1), CERTSYNTH_ERR_ARGUMENT);
  EXPECT_EQ(certsynth_check(nullptr, nullptr, nullptr), CERTSYNTH_ERR_ARGUMENT);
  EXPECT_EQ(certsynth_report_count(nullptr), 0);
}

TEST(CApi, OverridesShowInInfo) {
  certsynth_problem* p = nullptr;
  ASSERT_EQ(certsynth_problem_from_benchmark("secondorderlqr-rwa", &p), CERTSYNTH_OK);
  certsynth_problem_info info{};
  ASSERT_EQ(certsynth_problem_get_info(p, &info), CERTSYNTH_OK);
  EXPECT_EQ(info.benchmark_id, 15);
  EXPECT_EQ(info.n_inputs, 0);
  EXPECT_EQ(info.n_states, 2);
  EXPECT_EQ(info.max_loops, 25);
  EXPECT_EQ(certsynth_problem_set_delta(p, -1.0), CERTSYNTH_ERR_ARGUMENT);
  EXPECT_EQ(certsynth_problem_set_max_loops(p, 0), CERTSYNTH_ERR_ARGUMENT);
  ASSERT_EQ(certsynth_problem_set_seed(p, 42), CERTSYNTH_OK);
  ASSERT_EQ(certsynth_problem_set_max_loops(p, 7), CERTSYNTH_OK);
  ASSERT_EQ(certsynth_problem_set_delta(p, 1e-3), CERTSYNTH_OK);
  ASSERT_EQ(certsynth_problem_set_gamma(p, 0.2), CERTSYNTH_OK);
  certsynth_problem_get_info(p, &info);
  EXPECT_EQ(info.seed, 42u);
  EXPECT_EQ(info.max_loops, 7);
  EXPECT_EQ(info.delta, 1e-3);
  EXPECT_EQ(info.gamma, 0.2);
  certsynth_problem_free(p);
}

TEST(CApi, QuadraticLyapunovIsValid) {
  certsynth_problem* p = sink();
  certsynth_report* r = check_v(p, "x0^2 + x1^2");
  EXPECT_TRUE(certsynth_report_valid(r));
  EXPECT_EQ(certsynth_report_count(r), 2);
  certsynth_report_free(r);
  certsynth_problem_free(p);
}

TEST(CApi, LinearFunctionFailsPositivityWithWitness) {
  certsynth_problem* p = sink();
  certsynth_report* r = check_v(p, "x0");
  EXPECT_FALSE(certsynth_report_valid(r));
  certsynth_verdict_info v{};
  ASSERT_EQ(certsynth_report_verdict(r, 0, &v), CERTSYNTH_OK);
  EXPECT_STREQ(v.condition, "lyapunov.positive");
  EXPECT_STREQ(v.verdict, "Counterexample");
  ASSERT_EQ(v.point_dim, 2);
  // V(x) = x0 <= 0 at the witness, outside the excluded ball.
  EXPECT_LE(v.point[0], 0.0);
  EXPECT_GE(std::hypot(v.point[0], v.point[1]), 0.01);
  certsynth_report_free(r);
  certsynth_problem_free(p);
}

TEST(CApi, ControllerCountIsChecked) {
  certsynth_problem* p = nullptr;
  ASSERT_EQ(certsynth_problem_from_benchmark("3", &p), CERTSYNTH_OK);
  certsynth_certificate* c = nullptr;
  EXPECT_EQ(certsynth_certificate_from_text(p, "x0^2 + x1^2", nullptr, nullptr, 0, &c), CERTSYNTH_ERR_CONFIG);
  const char* ctrl[] = {"-x0", "-x1"};
  EXPECT_EQ(certsynth_certificate_from_text(p, "x0^2 + x1^2", nullptr, ctrl, 2, &c), CERTSYNTH_OK);
  char* u1 = nullptr;
  ASSERT_EQ(certsynth_certificate_function(c, "u1", &u1), CERTSYNTH_OK);
  EXPECT_STREQ(u1, "-x1");
  certsynth_string_free(u1);
  certsynth_certificate_free(c);
  certsynth_problem_free(p);
}

TEST(CApi, SynthesizeWriteLoadAndRecheck) {
  certsynth_problem* p = nullptr;
  ASSERT_EQ(certsynth_problem_from_benchmark("1", &p), CERTSYNTH_OK);
  certsynth_problem_set_seed(p, 3);
  std::vector<std::string> lines;
  certsynth_result* r = nullptr;
  auto sink_log = [](const char* line, void* user) { static_cast<std::vector<std::string>*>(user)->push_back(line); };
  ASSERT_EQ(certsynth_synthesize(p, sink_log, &lines, &r), CERTSYNTH_OK);
  certsynth_result_summary s{};
  certsynth_result_get_summary(r, &s);
  ASSERT_TRUE(s.success) << certsynth_result_reason(r);
  EXPECT_FALSE(lines.empty());
  EXPECT_GE(s.t_total_s, s.t_learn_s);

  const auto dir = std::filesystem::temp_directory_path() / "certsynth_c_api";
  std::filesystem::create_directories(dir);
  char* path = nullptr;
  ASSERT_EQ(certsynth_result_write(r, (dir / "one").string().c_str(), &path), CERTSYNTH_OK);
  EXPECT_TRUE(std::filesystem::exists(dir / "one.net.yaml"));

  certsynth_certificate* c = nullptr;
  ASSERT_EQ(certsynth_certificate_load(path, &c), CERTSYNTH_OK) << certsynth_last_error();
  certsynth_report* rep = nullptr;
  ASSERT_EQ(certsynth_check(c, nullptr, &rep), CERTSYNTH_OK);
  EXPECT_TRUE(certsynth_report_valid(rep));

  certsynth_sim_options o{};
  certsynth_sim_options_default(&o);
  o.n_init = 10;
  o.horizon = 20;
  o.dt = 0.01;
  certsynth_sim_summary sim{};
  ASSERT_EQ(certsynth_simulate(c, &o, &sim), CERTSYNTH_OK);
  EXPECT_EQ(sim.n_trajectories, 10);
  EXPECT_EQ(sim.n_arrive_successes, 10);
  EXPECT_TRUE(sim.clean);

  const std::string contour = (dir / "contour.csv").string();
  ASSERT_EQ(certsynth_write_contour_csv(c, "V", 0, 1, 11, contour.c_str()), CERTSYNTH_OK);
  std::ifstream in(contour);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "x0,x1,value");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 121);
  EXPECT_EQ(certsynth_write_contour_csv(c, "B", 0, 1, 11, contour.c_str()), CERTSYNTH_ERR_ARGUMENT);

  const double x0[] = {0.5, 0.5};
  const std::string traj = (dir / "traj.csv").string();
  ASSERT_EQ(certsynth_write_trajectory_csv(c, x0, 2, 0.01, 1.0, 10, 0, traj.c_str()), CERTSYNTH_OK);
  EXPECT_EQ(certsynth_write_trajectory_csv(c, x0, 3, 0.01, 1.0, 10, 0, traj.c_str()), CERTSYNTH_ERR_ARGUMENT);

  certsynth_report_free(rep);
  certsynth_certificate_free(c);
  certsynth_string_free(path);
  certsynth_result_free(r);
  certsynth_problem_free(p);
  std::filesystem::remove_all(dir);
}

TEST(CApi, MissingFileIsIoError) {
  certsynth_certificate* c = nullptr;
  EXPECT_EQ(certsynth_certificate_load("/nonexistent/x.cert.yaml", &c), CERTSYNTH_ERR_IO);
  certsynth_problem* p = nullptr;
  EXPECT_EQ(certsynth_problem_from_config_file("/nonexistent/x.yaml", &p), CERTSYNTH_ERR_IO);
}
