#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "certsynth/autodiff.hpp"
#include "certsynth/compiled_expr.hpp"
#include "certsynth/network.hpp"

using namespace certsynth;

namespace {

Network quadratic_net() {
  NetworkSpec spec;
  spec.hidden = {2};
  spec.activations = {Activation::poly(2)};
  spec.use_bias = false;
  Eigen::MatrixXd w1 = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd w2(1, 2);
  w2 << 1, 1;
  return Network::from_weights(2, spec, {w1, w2}, {});
}

Network random_net(std::vector<int> hidden, std::vector<Activation> acts, int in, int out, std::uint64_t seed,
                   bool bias = true) {
  NetworkSpec spec;
  spec.hidden = std::move(hidden);
  spec.activations = std::move(acts);
  spec.output_dim = out;
  spec.use_bias = bias;
  std::mt19937_64 rng(seed);
  Network n(in, spec, rng);
  // Non-zero biases so that the bias paths are exercised.
  std::normal_distribution<double> g(0.0, 0.5);
  for (auto& p : n.params()) {
    if (p.cols() == 1 && bias) p = p.unaryExpr([&](double) { return g(rng); });
  }
  return n;
}

std::vector<double> random_point(std::mt19937_64& rng, int dim, double scale = 2.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> x(dim);
  for (auto& v : x) v = u(rng);
  return x;
}

}  // namespace

TEST(Network, QuadraticForward) {
  Network n = quadratic_net();
  std::vector<double> x{3, 4};
  EXPECT_DOUBLE_EQ(n.forward(x)(0), 25.0);
  Eigen::MatrixXd g = n.grad_input(x);
  EXPECT_DOUBLE_EQ(g(0, 0), 6.0);
  EXPECT_DOUBLE_EQ(g(0, 1), 8.0);
  EXPECT_EQ(n.to_symbolic()[0].to_string(), parse("x0^2 + x1^2", 2).to_string());
}

TEST(Network, DimensionMismatchThrows) {
  Network n = quadratic_net();
  std::vector<double> x{1, 2, 3};
  EXPECT_THROW(n.forward(x), std::invalid_argument);
}

TEST(Network, ActivationParse) {
  EXPECT_EQ(Activation::parse("poly2"), Activation::poly(2));
  EXPECT_EQ(Activation::parse("tanh2"), Activation::tanh_squared());
  EXPECT_EQ(Activation::parse("linear").apply(3.5), 3.5);
  EXPECT_THROW(Activation::parse("relu"), std::invalid_argument);
  EXPECT_THROW(Activation::poly(3), std::invalid_argument);
}

TEST(Network, SymbolicAgreesWithForwardTanh) {
  Network n = random_net({5, 4}, {Activation::tanh(), Activation::tanh()}, 3, 1, 11);
  CompiledExpr prog(n.to_symbolic()[0]);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    auto x = random_point(rng, 3);
    EXPECT_NEAR(prog.eval(x), n.forward(x)(0), 1e-9);
  }
}

TEST(Network, SymbolicAgreesWithForwardSigmoid) {
  Network n = random_net({5, 5}, {Activation::sigmoid(), Activation::poly(2)}, 2, 2, 12);
  auto sym = n.to_symbolic();
  CompiledExpr prog(sym);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 1000; ++k) {
    auto x = random_point(rng, 2);
    auto y = prog.eval_all(x);
    Eigen::VectorXd f = n.forward(x);
    EXPECT_NEAR(y[0], f(0), 1e-9);
    EXPECT_NEAR(y[1], f(1), 1e-9);
  }
}

TEST(Network, AllActivationsRoundTrip) {
  for (Activation a : {Activation::poly(4), Activation::tanh_squared(), Activation::softplus()}) {
    Network n = random_net({4}, {a}, 2, 1, 5);
    CompiledExpr prog(n.to_symbolic()[0]);
    std::mt19937_64 rng(9);
    for (int k = 0; k < 50; ++k) {
      auto x = random_point(rng, 2, 1.0);
      EXPECT_NEAR(prog.eval(x), n.forward(x)(0), 1e-9) << a.name();
    }
  }
}

TEST(Network, GradInputMatchesSymbolicDiff) {
  Network n = random_net({6, 3}, {Activation::tanh(), Activation::sigmoid()}, 3, 1, 21);
  Expr v = n.to_symbolic()[0];
  std::vector<Expr> grads;
  for (int i = 0; i < 3; ++i) grads.push_back(diff(v, i));
  CompiledExpr prog(grads);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    auto x = random_point(rng, 3);
    auto g = prog.eval_all(x);
    Eigen::MatrixXd jac = n.grad_input(x);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(jac(0, i), g[i], 1e-8);
  }
}

TEST(Network, OddActivationGradientAtOrigin) {
  Network n = random_net({4}, {Activation::tanh()}, 2, 1, 8, false);
  std::vector<double> zero{0, 0};
  Eigen::MatrixXd expected = n.weights()[1] * n.weights()[0];
  Eigen::MatrixXd got = n.grad_input(zero);
  EXPECT_LT((expected - got).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Network, ControllerSymbolic) {
  NetworkSpec spec;
  spec.use_bias = false;
  spec.shift_output = true;
  Eigen::MatrixXd w(1, 2);
  w << -1, -1.73;
  Network k = Network::from_weights(2, spec, {w}, {});
  Expr e = k.to_symbolic()[0];
  CompiledExpr prog(e);
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    auto x = random_point(rng, 2);
    EXPECT_NEAR(prog.eval(x), -x[0] - 1.73 * x[1], 1e-15);
  }
}

TEST(Network, ShiftedControllerVanishesAtOrigin) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    NetworkSpec spec;
    spec.hidden = {5};
    spec.activations = {Activation::sigmoid()};
    spec.output_dim = 2;
    spec.use_bias = true;
    spec.shift_output = true;
    Network k = random_net({5}, {Activation::sigmoid()}, 3, 2, seed);
    NetworkSpec shifted = k.spec();
    shifted.shift_output = true;
    Network ks = Network::from_weights(3, shifted, k.weights(), k.biases());
    std::vector<double> zero{0, 0, 0};
    Eigen::VectorXd y = ks.forward(zero);
    EXPECT_EQ(y(0), 0.0);
    EXPECT_EQ(y(1), 0.0);
  }
}

TEST(Network, PositiveOutputWeightsStayPositive) {
  NetworkSpec spec;
  spec.hidden = {6};
  spec.activations = {Activation::poly(2)};
  spec.use_bias = false;
  spec.positive_output_weights = true;
  std::mt19937_64 rng(1);
  Network n(2, spec, rng);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int step = 0; step < 50; ++step) {
    for (auto& p : n.params()) p = p.unaryExpr([&](double v) { return v + g(rng); });
    EXPECT_GT(n.weights().back().minCoeff(), 0.0);
  }
  // Positive-weighted squares without biases: V > 0 away from the origin
  // unless the hidden features all vanish there.
  for (int k = 0; k < 200; ++k) {
    auto x = random_point(rng, 2);
    EXPECT_GT(n.forward(x)(0), 0.0);
  }
  std::vector<double> zero{0, 0};
  EXPECT_EQ(n.forward(zero)(0), 0.0);
}

TEST(Network, FromWeightsRoundTripsPositiveWeights) {
  NetworkSpec spec;
  spec.hidden = {2};
  spec.activations = {Activation::poly(2)};
  spec.use_bias = false;
  spec.positive_output_weights = true;
  Eigen::MatrixXd w1 = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd w2(1, 2);
  w2 << 0.5, 2.0;
  Network n = Network::from_weights(2, spec, {w1, w2}, {});
  EXPECT_NEAR(n.weights()[1](0, 0), 0.5, 1e-12);
  EXPECT_NEAR(n.weights()[1](0, 1), 2.0, 1e-12);
  w2(0, 0) = -1.0;
  EXPECT_THROW(Network::from_weights(2, spec, {w1, w2}, {}), std::invalid_argument);
}

TEST(Network, TapeGradientSingleNeuron) {
  NetworkSpec spec;
  spec.use_bias = false;
  Eigen::MatrixXd w(1, 1);
  w << 3;
  Network n = Network::from_weights(1, spec, {w}, {});
  ad::Tape tape;
  auto p = n.bind(tape);
  ad::Var x = tape.constant(ad::Mat::Constant(1, 1, 2.0));
  ad::Var y = n.forward(tape, p, x);
  ad::Var loss = tape.scale(tape.mul(y, y), 0.5);
  tape.backward(loss);
  EXPECT_DOUBLE_EQ(tape.grad(p[0])(0, 0), 12.0);
}

namespace {

// Loss mixing the value and the directional derivative so that both tape
// paths are differentiated.
double tape_loss(const Network& n, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t, std::vector<Eigen::MatrixXd>* grads) {
  ad::Tape tape;
  auto p = n.bind(tape);
  auto [y, dy] = n.forward_tangent(tape, p, tape.constant(x), tape.constant(t));
  ad::Var l = tape.add(tape.mean(tape.unary(y, ad::Unary::kTanh)), tape.mean(tape.mul(dy, dy)));
  if (grads) {
    tape.backward(l);
    grads->clear();
    for (auto v : p) grads->push_back(tape.grad(v));
  }
  return tape.value(l)(0, 0);
}

}  // namespace

TEST(Network, TapeGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 5; ++trial) {
    NetworkSpec spec;
    spec.hidden = {4, 3};
    spec.activations = {Activation::tanh(), Activation::tanh()};
    spec.positive_output_weights = trial % 2 == 1;
    spec.shift_output = trial % 2 == 1;
    Network n(2, spec, rng);
    Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(2, 7, [&] { return g(rng); });
    Eigen::MatrixXd t = Eigen::MatrixXd::NullaryExpr(2, 7, [&] { return g(rng); });
    std::vector<Eigen::MatrixXd> grads;
    tape_loss(n, x, t, &grads);
    for (std::size_t k = 0; k < n.params().size(); ++k) {
      for (Eigen::Index i = 0; i < n.params()[k].size(); ++i) {
        if (checked >= 50 * (trial + 1)) break;
        const double h = 1e-5;
        const double orig = n.params()[k](i);
        n.params()[k](i) = orig + h;
        const double up = tape_loss(n, x, t, nullptr);
        n.params()[k](i) = orig - h;
        const double down = tape_loss(n, x, t, nullptr);
        n.params()[k](i) = orig;
        const double fd = (up - down) / (2 * h);
        const double an = grads[k](i);
        EXPECT_LE(std::abs(fd - an), 1e-4 * std::max(1.0, std::abs(fd))) << "param " << k << "," << i;
        ++checked;
      }
    }
  }
  EXPECT_GE(checked, 50);
}

TEST(Network, TapeForwardMatchesBatch) {
  Network n = random_net({5}, {Activation::softplus()}, 2, 1, 31);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(2, 10, [&] { return g(rng); });
  ad::Tape tape;
  auto p = n.bind(tape);
  ad::Var y = n.forward(tape, p, tape.constant(x));
  EXPECT_LT((tape.value(y) - n.forward_batch(x)).cwiseAbs().maxCoeff(), 1e-12);
  // forward_tangent's derivative equals the Jacobian applied to the tangent.
  Eigen::MatrixXd t = Eigen::MatrixXd::NullaryExpr(2, 10, [&] { return g(rng); });
  auto [y2, dy] = n.forward_tangent(tape, p, tape.constant(x), tape.constant(t));
  for (int c = 0; c < 10; ++c) {
    std::vector<double> xc{x(0, c), x(1, c)};
    const double expect = (n.grad_input(xc) * t.col(c))(0);
    EXPECT_NEAR(tape.value(dy)(0, c), expect, 1e-12);
  }
}

TEST(Network, CloseLoopSubstitutesController) {
  VectorField f = VectorField::parse({"x1", "u0"}, 1);
  VectorField c = close_loop(f, {parse("-x0 - x1", 2)});
  EXPECT_EQ(c.dim_input, 0);
  std::vector<double> x{0.3, -0.7};
  auto y = c.eval(x);
  EXPECT_DOUBLE_EQ(y[0], -0.7);
  EXPECT_DOUBLE_EQ(y[1], -0.3 + 0.7);
}

TEST(Network, CloseLoopTwoInputs) {
  VectorField f = VectorField::parse({"u0 + x0 + x1", "u1 - x0 - x1"}, 2);
  NetworkSpec spec;
  spec.hidden = {15};
  spec.activations = {Activation::poly(1)};
  spec.output_dim = 2;
  spec.use_bias = false;
  spec.shift_output = true;
  std::mt19937_64 rng(4);
  Network k(2, spec, rng);
  VectorField c = close_loop(f, k);
  EXPECT_EQ(c.dim_input, 0);
  for (const auto& comp : c.components) EXPECT_LT(comp.max_input_index(), 0);
  std::vector<double> zero{0, 0};
  auto y = c.eval(zero);
  EXPECT_DOUBLE_EQ(y[0], 0.0);
  EXPECT_DOUBLE_EQ(y[1], 0.0);
  EXPECT_THROW(close_loop(f, {parse("x0", 2)}), std::invalid_argument);
}
