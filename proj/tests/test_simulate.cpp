#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "certsynth/simulate.hpp"

using namespace certsynth;

namespace {

double exp_endpoint_error(double dt) {
  Trajectory t = integrate(VectorField::parse({"-x0"}), {1.0}, dt, 5.0);
  return std::abs(t.states.back()[0] - std::exp(-5.0));
}

}  // namespace

TEST(Simulate, ExponentialDecayMatchesAnalyticSolution) {
  Trajectory t = integrate(VectorField::parse({"-x0"}), {1.0}, 1e-3, 5.0);
  EXPECT_NEAR(t.times.back(), 5.0, 1e-9);
  EXPECT_NEAR(t.states.back()[0], std::exp(-5.0), 1e-6);
  EXPECT_FALSE(t.blow_up);
  EXPECT_EQ(t.states.size(), 5001u);
}

TEST(Simulate, HarmonicOscillatorConservesEnergy) {
  Trajectory t = integrate(VectorField::parse({"x1", "-x0"}), {1.0, 0.0}, 1e-3, 10.0);
  const auto& x = t.states.back();
  const double e = x[0] * x[0] + x[1] * x[1];
  EXPECT_LE(std::abs(e - 1.0), 1e-6);
}

TEST(Simulate, FourthOrderConvergence) {
  // Coarse steps keep the error well above rounding.
  const double ratio = exp_endpoint_error(0.1) / exp_endpoint_error(0.05);
  EXPECT_NEAR(ratio, 16.0, 0.2 * 16.0);
}

TEST(Simulate, BlowUpTruncates) {
  Trajectory t = integrate(VectorField::parse({"x0^2"}), {1.0}, 1e-3, 5.0);
  EXPECT_TRUE(t.blow_up);
  EXPECT_LT(t.times.back(), 1.1);
  for (const auto& s : t.states) EXPECT_TRUE(std::isfinite(s[0]));
}

TEST(Simulate, RejectsBadArguments) {
  const VectorField f = VectorField::parse({"-x0"});
  EXPECT_THROW(integrate(f, {1.0}, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(integrate(f, {1.0}, 0.1, 0.01), std::invalid_argument);
  EXPECT_THROW(integrate(VectorField::parse({"u0"}, 1), {1.0}, 0.1, 1.0), std::invalid_argument);
}

TEST(Simulate, LinearContractionArrives) {
  PropertyProblem p;
  p.kind = PropertyKind::kStability;
  p.dynamics = VectorField::parse({"-x0", "-x1"});
  p.regions[RegionRole::kDomain] = Region::torus({0, 0}, 1.0, 0.01);
  SimulationConfig cfg;
  cfg.horizon = 20.0;
  Rng rng(1);
  EmpiricalVerdict v = check_property(p, p.dynamics, cfg, rng);
  EXPECT_EQ(v.n_trajectories, 100);
  EXPECT_EQ(v.n_arrive_successes, 100);
  EXPECT_TRUE(v.clean());
}

TEST(Simulate, LyapunovDecreasesAlongTrajectories) {
  PropertyProblem p;
  p.kind = PropertyKind::kStability;
  p.dynamics = VectorField::parse({"-x0", "-x1"});
  p.regions[RegionRole::kDomain] = Region::torus({0, 0}, 1.0, 0.01);
  SymbolicCertificate cert;
  cert.v = parse("x0^2 + x1^2", 2);
  SimulationConfig cfg;
  cfg.n_init = 10;
  cfg.horizon = 10.0;
  Rng rng(2);
  EmpiricalVerdict v = check_property(p, p.dynamics, cfg, rng, &cert);
  EXPECT_EQ(v.lyapunov_increases, 0);
  EXPECT_TRUE(v.clean());
}

TEST(Simulate, SteeringIntoUnsafeSetIsDetected) {
  PropertyProblem p;
  p.kind = PropertyKind::kSafety;
  p.dynamics = VectorField::parse({"1", "0"});
  p.regions[RegionRole::kDomain] = Region::rectangle({-2, -2}, {2, 2});
  p.regions[RegionRole::kInit] = Region::sphere({-1, 0}, 0.1);
  p.regions[RegionRole::kUnsafe] = Region::rectangle({0.5, -1}, {1, 1});
  SimulationConfig cfg;
  cfg.n_init = 10;
  cfg.horizon = 3.0;
  Rng rng(3);
  EmpiricalVerdict v = check_property(p, p.dynamics, cfg, rng);
  EXPECT_GE(v.n_avoid_violations, 1);
  EXPECT_TRUE(v.avoid_witness.has_value());
  EXPECT_FALSE(v.clean());
}

TEST(Simulate, BarrierStaysNonPositive) {
  PropertyProblem p;
  p.kind = PropertyKind::kSafety;
  p.dynamics = VectorField::parse({"-x0", "-x1"});
  p.regions[RegionRole::kDomain] = Region::rectangle({-2, -2}, {2, 2});
  p.regions[RegionRole::kInit] = Region::sphere({0.5, 0}, 0.2);
  p.regions[RegionRole::kUnsafe] = Region::sphere({1.5, 1.5}, 0.2);
  SymbolicCertificate cert;
  cert.v = parse("x0^2 + x1^2 - 1", 2);
  SimulationConfig cfg;
  cfg.n_init = 20;
  cfg.horizon = 5.0;
  Rng rng(4);
  EmpiricalVerdict v = check_property(p, p.dynamics, cfg, rng, &cert);
  EXPECT_LE(v.max_barrier, 1e-3);
  EXPECT_EQ(v.n_avoid_violations, 0);
}

TEST(Simulate, ReachAvoidRemainDetectsLeavingFinalSet) {
  // Rotation around the origin: reaches the goal band but leaves X_F.
  PropertyProblem p;
  p.kind = PropertyKind::kRar;
  p.dynamics = VectorField::parse({"-x1", "x0"});
  p.regions[RegionRole::kDomain] = Region::rectangle({-3, -3}, {3, 3});
  p.regions[RegionRole::kInit] = Region::sphere({1, 0}, 0.05);
  p.regions[RegionRole::kSafe] = Region::rectangle({-2, -2}, {2, 2});
  p.regions[RegionRole::kGoal] = Region::rectangle({0.9, -0.1}, {1.1, 0.1});
  p.regions[RegionRole::kFinal] = Region::rectangle({0.8, -0.3}, {1.2, 0.3});
  SimulationConfig cfg;
  cfg.n_init = 5;
  cfg.horizon = 4.0;
  Rng rng(5);
  EmpiricalVerdict v = check_property(p, p.dynamics, cfg, rng);
  EXPECT_EQ(v.n_arrive_successes, 5);
  EXPECT_EQ(v.n_remain_violations, 5);
  EXPECT_EQ(v.n_avoid_violations, 0);
}

TEST(Simulate, CsvWriters) {
  Trajectory t = integrate(VectorField::parse({"-x0", "-x1"}), {1.0, 2.0}, 0.5, 1.0);
  std::ostringstream os;
  write_trajectory_csv(os, t);
  EXPECT_EQ(os.str().substr(0, 8), "t,x0,x1\n");
  std::ostringstream c;
  write_contour_csv(c, parse("x0 + 10*x1", 2), 2, 0, 1, {0, 0}, {1, 1}, 2);
  EXPECT_EQ(c.str(), "x0,x1,value\n0,0,0\n0,1,10\n1,0,1\n1,1,11\n");
}
