#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "certsynth/certificate_io.hpp"
#include "certsynth/compiled_expr.hpp"

using namespace certsynth;

namespace {

const char* kBarr3 = R"(name: barr3
property: Safety
dynamics:
  - "x1"
  - "x0^3/3 - x0 - x1"
regions:
  domain: Rectangle([-3, -2], [2.5, 1])
  init: Rectangle([0.4, 0.1], [0.8, 0.5])
  unsafe: Sphere([-1, -1], 0.4)
networks:
  v: {neurons: [5], activations: [tanh]}
train:
  max_epochs: 300
cegis:
  seed: 4
)";

int error_line(const std::string& text) {
  try {
    parse_problem_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string error_text(const std::string& text) {
  try {
    parse_problem_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesSafetyProblem) {
  ProblemConfig c = parse_problem_config(kBarr3);
  EXPECT_EQ(c.name, "barr3");
  EXPECT_EQ(c.problem.kind, PropertyKind::kSafety);
  EXPECT_EQ(c.problem.dim(), 2);
  EXPECT_FALSE(c.problem.has_controller());
  EXPECT_EQ(c.cegis.train.max_epochs, 300);
  EXPECT_EQ(c.cegis.seed, 4u);
  const std::vector<double> x{1.5, 0.5};
  EXPECT_NEAR(eval(c.problem.dynamics.components[1], x), 1.5 * 1.5 * 1.5 / 3 - 1.5 - 0.5, 1e-12);
  EXPECT_EQ(c.shapes.v.hidden, std::vector<int>{5});
}

TEST(Config, MissingGoalForRwaNamesTheRegion) {
  const std::string text = R"(property: RWA
dynamics: ["x1", "-x0 - x1"]
regions:
  domain: Rectangle([-2, -2], [2, 2])
  init: Rectangle([-0.5, -0.5], [0.5, 0.5])
  safe: Rectangle([-1, -1], [1, 1])
networks:
  v: {neurons: [4], activations: [poly2]}
)";
  EXPECT_NE(error_text(text).find("goal"), std::string::npos) << error_text(text);
}

TEST(Config, InvertedRectangleIsRejectedWithLine) {
  const std::string text = R"(property: Stability
dynamics: ["-x0", "-x1"]
regions:
  domain: Rectangle([1, -1], [-1, 1])
networks:
  v: {neurons: [4], activations: [poly2]}
)";
  EXPECT_EQ(error_line(text), 4);
}

TEST(Config, SyntaxErrorReportsLine) {
  const std::string text = "property: Stability\ndynamics: [\"-x0\"\nregions: {}\n";
  EXPECT_GT(error_line(text), 0);
}

TEST(Config, UnknownKeyAndActivation) {
  std::string text = std::string(kBarr3) + "bogus: 1\n";
  EXPECT_EQ(error_line(text), 16);
  text = kBarr3;
  text.replace(text.find("[tanh]"), 6, "[relu]");
  EXPECT_EQ(error_line(text), 11);
}

TEST(Config, ControllerDefaultsToLinearWidthEight) {
  const std::string text = R"(property: Stability
dynamics: ["x1", "u0"]
regions:
  domain: Torus([0, 0], 1, 0.1)
networks:
  v: {neurons: [4], activations: [poly2]}
)";
  ProblemConfig c = parse_problem_config(text);
  ASSERT_TRUE(c.shapes.controller.has_value());
  EXPECT_EQ(c.shapes.controller->hidden, std::vector<int>{8});
  EXPECT_EQ(c.shapes.controller->output_dim, 1);
}

TEST(CertificateIo, RoundTripPreservesEverything) {
  CertificateRecord r;
  r.name = "roundtrip";
  r.benchmark_id = 5;
  r.seed = 9;
  r.problem = config_for(find_benchmark("5")).problem;
  r.certificate.v = parse("0.123*x0^2 + 1/3*x1^2 - 0.5", 2);
  r.certificate.levels.beta_hat = 0.1 + 0.2;
  const CertificateRecord back = certificate_from_yaml(certificate_to_yaml(r));
  EXPECT_EQ(back.name, "roundtrip");
  EXPECT_EQ(back.benchmark_id, 5);
  EXPECT_EQ(back.seed, 9u);
  EXPECT_EQ(back.problem.kind, PropertyKind::kRoa);
  EXPECT_EQ(back.certificate.levels.beta_hat, 0.1 + 0.2);
  EXPECT_TRUE(std::isnan(back.certificate.levels.beta));
  Rng rng(1);
  std::uniform_real_distribution<double> uni(-2, 2);
  for (int k = 0; k < 100; ++k) {
    const std::vector<double> x{uni(rng), uni(rng)};
    EXPECT_EQ(eval(back.certificate.v, x), eval(r.certificate.v, x));
    for (const auto& [role, region] : r.problem.regions) {
      EXPECT_EQ(back.problem.region(role).contains(x), region.contains(x));
    }
    for (int i = 0; i < 2; ++i) {
      EXPECT_EQ(eval(back.problem.dynamics.components[i], x), eval(r.problem.dynamics.components[i], x));
    }
  }
}

TEST(CertificateIo, NetworkSidecarRoundTrip) {
  const BenchmarkEntry& e = find_benchmark("26");
  Rng rng(3);
  Candidates c = init_candidates(e.problem(), e.shapes(), rng);
  Candidates back = networks_from_yaml(networks_to_yaml(c));
  ASSERT_TRUE(back.b && back.controller);
  const std::vector<double> x{0.3, -0.7};
  EXPECT_NEAR(back.v.forward(x)(0), c.v.forward(x)(0), 1e-12);
  EXPECT_NEAR(back.b->forward(x)(0), c.b->forward(x)(0), 1e-12);
  EXPECT_NEAR(back.controller->forward(x)(1), c.controller->forward(x)(1), 1e-12);
}

TEST(CertificateIo, WritesFilesToDisk) {
  const auto dir = std::filesystem::temp_directory_path() / "certsynth_io_test";
  std::filesystem::create_directories(dir);
  CertificateRecord r;
  r.problem = config_for(find_benchmark("1")).problem;
  r.certificate.v = parse("x0^2 + x1^2", 2);
  const BenchmarkEntry& e = find_benchmark("1");
  Rng rng(2);
  Candidates c = init_candidates(e.problem(), e.shapes(), rng);
  const std::string path = write_certificate((dir / "one").string(), r, &c);
  EXPECT_TRUE(std::filesystem::exists(dir / "one.net.yaml"));
  EXPECT_EQ(read_certificate(path).certificate.v.to_string(), r.certificate.v.to_string());
  std::filesystem::remove_all(dir);
}
