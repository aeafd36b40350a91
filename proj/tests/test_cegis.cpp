#include <gtest/gtest.h>

#include "certsynth/benchmarks.hpp"
#include "certsynth/cegis.hpp"

using namespace certsynth;

TEST(Cegis, DefaultLoopBudgets) {
  EXPECT_EQ(default_max_loops(PropertyKind::kStability), 25);
  EXPECT_EQ(default_max_loops(PropertyKind::kRswa), 25);
  EXPECT_EQ(default_max_loops(PropertyKind::kSwa), 100);
  EXPECT_EQ(default_max_loops(PropertyKind::kRar), 100);
}

TEST(Cegis, TranslateRoundsCoefficients) {
  NetworkSpec spec = certificate_spec(PropertyKind::kStability, Target::kV, {2}, {Activation::parse("poly2")});
  Eigen::MatrixXd w1(2, 2), w2(1, 2);
  w1 << 1.00049, 0.0, 0.0, 0.5;
  w2 << 1.0, 1.0;
  Candidates c{Network::from_weights(2, spec, {w1, w2}, {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1)}), {}, {}};
  SymbolicCertificate s = translate(c, 1e-3);
  const std::vector<double> x{1.0, 2.0};
  EXPECT_NEAR(eval(s.v, x), 1.0 + 1.0, 1e-12);
}

TEST(Cegis, NonPolyStabilitySucceeds) {
  const BenchmarkEntry& e = find_benchmark("1");
  CegisConfig cfg;
  cfg.seed = 0;
  SynthesisResult r = synthesize(e.problem(), e.shapes(), cfg);
  EXPECT_TRUE(r.success) << r.reason;
  EXPECT_LE(r.loops, 25);
  EXPECT_GE(r.times.total_s, r.times.learn_s);
}

TEST(Cegis, UnstableSystemRunsOutOfLoops) {
  // No Lyapunov function exists for an expanding field.
  PropertyProblem p;
  p.kind = PropertyKind::kStability;
  p.dynamics = VectorField::parse({"x0", "x1"});
  p.regions[RegionRole::kDomain] = Region::torus({0, 0}, 1.0, 0.01);
  CandidateShapes s;
  s.v = certificate_spec(p.kind, Target::kV, {4}, {Activation::parse("poly2")});
  CegisConfig cfg;
  cfg.max_loops = 1;
  cfg.train.max_epochs = 20;
  SynthesisResult r = synthesize(p, s, cfg);
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.loops, 1);
  EXPECT_EQ(r.reason, "out of loops");
  EXPECT_GT(r.cex_count, 0);
}

TEST(Cegis, InvalidProblemIsReported) {
  PropertyProblem p;
  p.kind = PropertyKind::kSafety;
  p.dynamics = VectorField::parse({"-x0", "-x1"});
  p.regions[RegionRole::kDomain] = Region::rectangle({-1, -1}, {1, 1});
  CandidateShapes s;
  s.v = certificate_spec(p.kind, Target::kV, {4}, {Activation::parse("tanh")});
  SynthesisResult r = synthesize(p, s, {});
  EXPECT_FALSE(r.success);
  EXPECT_NE(r.reason.find("invalid problem"), std::string::npos);
}
