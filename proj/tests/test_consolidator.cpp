#include <gtest/gtest.h>

#include <cmath>

#include "certsynth/consolidator.hpp"
#include "certsynth/verifier.hpp"

using namespace certsynth;

namespace {

PropertyProblem square_stability() {
  PropertyProblem p;
  p.kind = PropertyKind::kStability;
  p.dynamics = VectorField::parse({"-x0", "-x1"});
  p.regions[RegionRole::kDomain] = Region::rectangle({-1, -1}, {1, 1});
  return p;
}

const Condition& find(const std::vector<Condition>& cs, const std::string& id) {
  for (const auto& c : cs) {
    if (c.id == id) return c;
  }
  throw std::runtime_error("no condition " + id);
}

}  // namespace

TEST(Consolidator, CloudStaysInsideTheSquare) {
  PropertyProblem p = square_stability();
  SymbolicCertificate cert;
  cert.v = parse("x0^2 + x1^2", 2);
  const auto conds = build_conditions(p);
  Rng rng(1);
  ConsolidatorConfig cfg;
  CexBundle b = consolidate({0.98, 0.98}, find(conds, "lyapunov.positive"), p, cert, closed_loop_of(p, cert), cfg, rng);
  EXPECT_GE(b.cloud.cols(), 50);
  EXPECT_EQ(b.cloud(0, 0), 0.98);
  for (Eigen::Index k = 0; k < b.cloud.cols(); ++k) {
    EXPECT_LE(std::abs(b.cloud(0, k)), 1.0 + 1e-12);
    EXPECT_LE(std::abs(b.cloud(1, k)), 1.0 + 1e-12);
  }
}

TEST(Consolidator, AscentIsMonotoneAndApproachesTheWorstPoint) {
  // V = -(x0-0.7)^2 - (x1-0.7)^2 + 0.01 violates V > 0 most at (0.7, 0.7).
  PropertyProblem p = square_stability();
  SymbolicCertificate cert;
  cert.v = parse("(x0 - 0.7)^2 + (x1 - 0.7)^2 - 0.01", 2);
  const auto conds = build_conditions(p);
  Rng rng(2);
  ConsolidatorConfig cfg;
  cfg.n_ascent = 200;
  const std::vector<double> start{0.3, 0.4};
  CexBundle b = consolidate(start, find(conds, "lyapunov.positive"), p, cert, closed_loop_of(p, cert), cfg, rng);
  ASSERT_GE(b.ascent_violation.size(), 2u);
  for (std::size_t i = 1; i < b.ascent_violation.size(); ++i) {
    EXPECT_GT(b.ascent_violation[i], b.ascent_violation[i - 1]);
  }
  const Eigen::Index last = b.cloud.cols() - 1;
  const double d0 = std::hypot(start[0] - 0.7, start[1] - 0.7);
  const double d1 = std::hypot(b.cloud(0, last) - 0.7, b.cloud(1, last) - 0.7);
  EXPECT_LT(d1, 0.5 * d0);
}

TEST(Consolidator, BoundaryConditionKeepsPointsNearTheBoundary) {
  PropertyProblem p;
  p.kind = PropertyKind::kRwa;
  p.dynamics = VectorField::parse({"-x0", "-x1"});
  p.regions[RegionRole::kDomain] = Region::rectangle({-1.5, -1.5}, {1.5, 1.5});
  p.regions[RegionRole::kInit] = Region::rectangle({-0.5, -0.5}, {0.5, 0.5});
  p.regions[RegionRole::kSafe] = Region::rectangle({-1, -1}, {1, 1});
  p.regions[RegionRole::kGoal] = Region::rectangle({-0.05, -0.05}, {0.05, 0.05});
  SymbolicCertificate cert;
  cert.v = parse("x0^2 + x1^2 - 2", 2);
  const auto conds = build_conditions(p);
  Rng rng(3);
  ConsolidatorConfig cfg;
  CexBundle b = consolidate({1.0, 0.2}, find(conds, "rwa.safe_boundary"), p, cert, closed_loop_of(p, cert), cfg, rng);
  EXPECT_GT(b.cloud.cols(), 1);
  for (Eigen::Index k = 0; k < b.cloud.cols(); ++k) {
    const double dist = 1.0 - std::max(std::abs(b.cloud(0, k)), std::abs(b.cloud(1, k)));
    EXPECT_LE(std::abs(dist), cfg.eq_tolerance + 1e-12);
  }
}

TEST(Consolidator, RejectsDimensionMismatch) {
  PropertyProblem p = square_stability();
  SymbolicCertificate cert;
  cert.v = parse("x0^2 + x1^2", 2);
  const auto conds = build_conditions(p);
  Rng rng(4);
  EXPECT_THROW(consolidate({0.1}, conds[0], p, cert, closed_loop_of(p, cert), {}, rng), std::invalid_argument);
}
