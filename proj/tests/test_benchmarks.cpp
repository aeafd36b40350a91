#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "certsynth/benchmarks.hpp"
#include "certsynth/compiled_expr.hpp"

using namespace certsynth;

namespace {

using Field = std::function<std::vector<double>(const std::vector<double>&, const std::vector<double>&)>;

struct Expected {
  int id;
  int ns;
  int nu;
  PropertyKind kind;
  std::vector<int> v_hidden;
  std::vector<std::string> v_acts;
  std::vector<int> b_hidden;  // empty when there is no second function
  Field f;
};

// Hand-coded dynamics, checked pointwise against the parsed registry strings.
std::vector<double> second_order_lqr(const std::vector<double>& x, const std::vector<double>&) {
  return {-std::pow(x[0], 3) + x[1], -x[0] - 1.73 * x[1]};
}
std::vector<double> second_order(const std::vector<double>& x, const std::vector<double>& u) {
  return {-std::pow(x[0], 3) + x[1], u[0]};
}
std::vector<double> third_order_lqr(const std::vector<double>& x, const std::vector<double>&) {
  return {-33.71 * x[0] - 8.49 * x[1], -x[0] * x[2] + 28 * x[0] - x[1], x[0] * x[1] - 8.0 / 3.0 * x[2]};
}
std::vector<double> third_order(const std::vector<double>& x, const std::vector<double>& u) {
  return {u[0] - 10 * x[0] + 10 * x[1], -x[0] * x[2] + 28 * x[0] - x[1], x[0] * x[1] - 8.0 / 3.0 * x[2]};
}
std::vector<double> pendulum(const std::vector<double>& x, const std::vector<double>& u) {
  return {u[0] + x[1], u[1] - 8.0 / 3.0 * x[1] + 19.62 * std::sin(x[0])};
}

const std::vector<Expected>& expected() {
  using K = PropertyKind;
  static const std::vector<Expected> e{
      {1, 2, 0, K::kStability, {6}, {"poly2"}, {},
       [](auto& x, auto&) { return std::vector<double>{x[0] * x[1] - x[0], -x[1]}; }},
      {2, 3, 0, K::kStability, {8}, {"poly2"}, {},
       [](auto& x, auto&) {
         return std::vector<double>{-std::pow(x[0], 3) - x[0] * x[2] * x[2], -x[0] * x[0] * x[1] - x[1],
                                    3 * x[0] * x[0] * x[2] - 4 * x[2]};
       }},
      {3, 2, 2, K::kStability, {4}, {"poly2"}, {},
       [](auto& x, auto& u) { return std::vector<double>{u[0] + x[0] + x[1], u[1] - x[0] - x[1]}; }},
      {4, 2, 2, K::kStability, {5}, {"poly2"}, {}, pendulum},
      {5, 2, 0, K::kRoa, {5}, {"tanh2"}, {},
       [](auto& x, auto&) { return std::vector<double>{2 * x[0] * x[0] * x[1] - x[0], -x[1]}; }},
      {6, 3, 3, K::kRoa, {8}, {"poly2"}, {},
       [](auto& x, auto& u) {
         return std::vector<double>{u[0] - 10 * x[0] + 10 * x[1], u[1] - x[0] * x[2] + 28 * x[0] - x[1],
                                    u[2] + x[0] * x[1] - 8.0 / 3.0 * x[2]};
       }},
      {7, 2, 0, K::kSafety, {15}, {"tanh"}, {},
       [](auto& x, auto&) {
         return std::vector<double>{x[1] - 1 + std::exp(-x[0]), -std::pow(std::sin(x[0]), 2)};
       }},
      {8, 3, 0, K::kSafety, {25}, {"poly4"}, {},
       [](auto& x, auto&) {
         const double s = std::sin(x[2]), c = std::cos(x[2]);
         return std::vector<double>{s, c, (3 * x[0] * s + 3 * x[1] * c) / (x[0] * x[0] + x[1] * x[1] + 0.5) - s};
       }},
      {9, 8, 0, K::kSafety, {10}, {"linear"}, {},
       [](auto& x, auto&) {
         std::vector<double> d(8);
         for (int i = 0; i < 7; ++i) d[i] = x[i + 1];
         const double c[8] = {576, 2400, 4180, 3980, 2273, 800, 170, 20};
         for (int i = 0; i < 8; ++i) d[7] -= c[i] * x[i];
         return d;
       }},
      {10, 3, 1, K::kSafety, {15}, {"tanh"}, {},
       [](auto& x, auto& u) { return std::vector<double>{std::sin(x[2]), std::cos(x[2]), u[0] - std::sin(x[2])}; }},
      {11, 3, 0, K::kSwa, {6}, {"poly2"}, {5},
       [](auto& x, auto&) {
         return std::vector<double>{-0.1 * x[0] * std::pow(x[1], 3) - 3 * x[0], -x[1] + x[2], -x[2]};
       }},
      {12, 2, 0, K::kSwa, {5}, {"poly2"}, {5, 5},
       [](auto& x, auto&) { return std::vector<double>{x[1], std::pow(x[0], 3) / 3 - x[0] - x[1]}; }},
      {13, 2, 1, K::kSwa, {8}, {"poly2"}, {5}, second_order},
      {14, 3, 1, K::kSwa, {10}, {"poly2"}, {8}, third_order},
      {15, 2, 0, K::kRwa, {4}, {"poly2"}, {}, second_order_lqr},
      {16, 3, 0, K::kRwa, {16}, {"poly2"}, {}, third_order_lqr},
      {17, 2, 1, K::kRwa, {4, 4}, {"sigmoid", "poly2"}, {}, second_order},
      {18, 3, 1, K::kRwa, {5}, {"poly2"}, {}, third_order},
      {19, 2, 2, K::kRwa, {5}, {"sigmoid"}, {}, pendulum},
      {20, 2, 0, K::kRswa, {4}, {"poly2"}, {}, second_order_lqr},
      {21, 3, 0, K::kRswa, {16}, {"poly2"}, {}, third_order_lqr},
      {22, 2, 0, K::kRswa, {5, 5}, {"sigmoid", "poly2"}, {},
       [](auto& x, auto&) {
         return std::vector<double>{-7.21 * x[0] - 0.34 * x[1], -1.34 * x[0] - 2.997 * x[1] + 19.62 * std::sin(x[0])};
       }},
      {23, 2, 1, K::kRswa, {8}, {"poly2"}, {}, second_order},
      {24, 2, 2, K::kRswa, {5, 5}, {"sigmoid", "poly2"}, {}, pendulum},
      {25, 2, 0, K::kRar, {6}, {"softplus"}, {6}, second_order_lqr},
      {26, 2, 2, K::kRar, {6, 6}, {"sigmoid", "poly2"}, {6, 6}, pendulum},
  };
  return e;
}

}  // namespace

TEST(Benchmarks, RegistryMatchesHandCodedTable) {
  const auto& reg = registry();
  ASSERT_EQ(reg.size(), expected().size());
  Rng rng(42);
  std::uniform_real_distribution<double> uni(-1.5, 1.5);
  for (std::size_t k = 0; k < reg.size(); ++k) {
    const auto& got = reg[k];
    const auto& want = expected()[k];
    SCOPED_TRACE("benchmark " + std::to_string(want.id));
    EXPECT_EQ(got.id, want.id);
    EXPECT_EQ(got.dim(), want.ns);
    EXPECT_EQ(got.n_inputs, want.nu);
    EXPECT_EQ(got.kind, want.kind);
    EXPECT_EQ(got.v.hidden, want.v_hidden);
    ASSERT_EQ(got.v.activations.size(), want.v_acts.size());
    for (std::size_t i = 0; i < want.v_acts.size(); ++i) EXPECT_EQ(got.v.activations[i].name(), want.v_acts[i]);
    EXPECT_EQ(got.alt.has_value(), !want.b_hidden.empty());
    if (got.alt) EXPECT_EQ(got.alt->hidden, want.b_hidden);
    EXPECT_EQ(got.controller.has_value(), want.nu > 0);

    PropertyProblem p = got.problem();
    const CompiledExpr prog(p.dynamics.components);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x(want.ns), u(want.nu);
      for (double& v : x) v = uni(rng);
      for (double& v : u) v = uni(rng);
      const auto a = prog.eval_all(x, u);
      const auto b = want.f(x, u);
      for (int i = 0; i < want.ns; ++i) EXPECT_NEAR(a[i], b[i], 1e-9 * (1 + std::abs(b[i])));
    }
  }
}

TEST(Benchmarks, ExtendedEntriesAreFlagged) {
  for (const auto& e : registry()) EXPECT_EQ(e.extended, e.id == 8 || e.id == 9) << e.id;
}

TEST(Benchmarks, EveryProblemValidates) {
  for (const auto& e : registry()) {
    SCOPED_TRACE(e.id);
    PropertyProblem p = e.problem();
    EXPECT_NO_THROW(p.validate(2000, 1));
    CandidateShapes s = e.shapes();
    if (e.controller) {
      ASSERT_TRUE(s.controller.has_value());
      EXPECT_EQ(s.controller->output_dim, e.n_inputs);
    }
  }
}

TEST(Benchmarks, LookupByIdAndName) {
  EXPECT_EQ(find_benchmark("15").name, "SecondOrderLQR");
  EXPECT_EQ(find_benchmark("secondorderlqr-rwa").id, 15);
  EXPECT_EQ(find_benchmark("InvertedPendulum-RAR").id, 26);
  EXPECT_THROW(find_benchmark("99"), ProblemError);
  EXPECT_THROW(find_benchmark("Nope-RWA"), ProblemError);
}

TEST(Benchmarks, ListingMatchesGoldenFile) {
  std::ifstream in(std::string(CERTSYNTH_TEST_DATA) + "/registry.golden");
  ASSERT_TRUE(in) << "missing golden file";
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(registry_listing(), ss.str());
}
