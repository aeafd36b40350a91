#pragma once

#include <random>

#include "certsynth/expr.hpp"

namespace testing_support {

// Random well-conditioned expressions: divisors are kept away from zero so
// that finite differences stay meaningful.
inline certsynth::Expr random_expr(std::mt19937_64& rng, int dim, int depth) {
  using certsynth::Expr;
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 12);
  std::uniform_int_distribution<int> var(0, dim - 1);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  const int k = pick(rng);
  auto sub = [&] { return random_expr(rng, dim, depth - 1); };
  switch (k) {
    case 0: return Expr::constant(std::round(coef(rng) * 1000.0) / 1000.0 + 0.125);
    case 1: return Expr::var(var(rng));
    case 2: return sub() + sub();
    case 3: return sub() - sub();
    case 4: return sub() * sub();
    case 5: return sub() / (Expr(1.5) + certsynth::pow(sub(), 2));
    case 6: return certsynth::pow(sub(), std::uniform_int_distribution<int>(0, 3)(rng));
    case 7: return certsynth::sin(sub());
    case 8: return certsynth::cos(sub());
    case 9: return certsynth::exp(Expr(0.5) * certsynth::tanh(sub()));
    case 10: return certsynth::tanh(sub());
    case 11: return certsynth::sigmoid(sub());
    default: return -certsynth::softplus(sub());
  }
}

}  // namespace testing_support
