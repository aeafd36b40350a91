#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "certsynth/expr.hpp"
#include "certsynth/interval.hpp"

namespace certsynth {

struct Instr {
  Op op = Op::kConst;
  int a = -1;
  int b = -1;
  int index = 0;  // variable index, or the exponent of kPow
  double value = 0.0;
};

/// Per-type arithmetic used by CompiledExpr::run. Specialized for double,
/// Interval and the Jet types below; the learner specializes it for tape
/// variables.
template <class T>
struct EvalOps;

/// Flattened DAG of one or more expressions. Shared subtrees are evaluated
/// once, which matters for Lie derivatives whose factors repeat.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  explicit CompiledExpr(std::span<const Expr> outputs);
  explicit CompiledExpr(const Expr& output) : CompiledExpr(std::span<const Expr>(&output, 1)) {}

  const std::vector<Instr>& code() const { return code_; }
  const std::vector<int>& outputs() const { return outputs_; }
  std::size_t size() const { return code_.size(); }

  /// Evaluates every instruction into `regs`. `leaves` supplies
  /// constant(double), var(int) and input(int).
  template <class T, class Leaves>
  void run(const Leaves& leaves, std::vector<T>& regs) const {
    using O = EvalOps<T>;
    regs.resize(code_.size());
    for (std::size_t i = 0; i < code_.size(); ++i) {
      const Instr& in = code_[i];
      switch (in.op) {
        case Op::kConst: regs[i] = leaves.constant(in.value); break;
        case Op::kVar: regs[i] = leaves.var(in.index); break;
        case Op::kInput: regs[i] = leaves.input(in.index); break;
        case Op::kNeg: regs[i] = O::neg(regs[in.a]); break;
        case Op::kAdd: regs[i] = O::add(regs[in.a], regs[in.b]); break;
        case Op::kSub: regs[i] = O::sub(regs[in.a], regs[in.b]); break;
        case Op::kMul: regs[i] = O::mul(regs[in.a], regs[in.b]); break;
        case Op::kDiv: regs[i] = O::div(regs[in.a], regs[in.b]); break;
        case Op::kPow: regs[i] = O::pow(regs[in.a], in.index); break;
        case Op::kSin: regs[i] = O::sin(regs[in.a]); break;
        case Op::kCos: regs[i] = O::cos(regs[in.a]); break;
        case Op::kExp: regs[i] = O::exp(regs[in.a]); break;
        case Op::kTanh: regs[i] = O::tanh(regs[in.a]); break;
        case Op::kSigmoid: regs[i] = O::sigmoid(regs[in.a]); break;
        case Op::kSoftplus: regs[i] = O::softplus(regs[in.a]); break;
      }
    }
  }

  /// Convenience: plain double evaluation of output k.
  double eval(std::span<const double> x, std::span<const double> u = {}, std::size_t k = 0) const;
  std::vector<double> eval_all(std::span<const double> x, std::span<const double> u = {}) const;

 private:
  std::vector<Instr> code_;
  std::vector<int> outputs_;
};

template <>
struct EvalOps<double> {
  static double neg(double a) { return -a; }
  static double add(double a, double b) { return a + b; }
  static double sub(double a, double b) { return a - b; }
  static double mul(double a, double b) { return a * b; }
  static double div(double a, double b) {
    if (b == 0.0) throw EvalError("division by zero");
    return a / b;
  }
  static double pow(double a, int k) { return pow_int(a, k); }
  static double sin(double a) { return std::sin(a); }
  static double cos(double a) { return std::cos(a); }
  static double exp(double a) { return std::exp(a); }
  static double tanh(double a) { return std::tanh(a); }
  static double sigmoid(double a) { return certsynth::sigmoid(a); }
  static double softplus(double a) { return certsynth::softplus(a); }
};

template <>
struct EvalOps<Interval> {
  static Interval neg(const Interval& a) { return -a; }
  static Interval add(const Interval& a, const Interval& b) { return a + b; }
  static Interval sub(const Interval& a, const Interval& b) { return a - b; }
  static Interval mul(const Interval& a, const Interval& b) {
    if (&a == &b) return pow_int(a, 2);
    return a * b;
  }
  static Interval div(const Interval& a, const Interval& b) { return a / b; }
  static Interval pow(const Interval& a, int k) { return pow_int(a, k); }
  static Interval sin(const Interval& a) { return certsynth::sin(a); }
  static Interval cos(const Interval& a) { return certsynth::cos(a); }
  static Interval exp(const Interval& a) { return certsynth::exp(a); }
  static Interval tanh(const Interval& a) { return certsynth::tanh(a); }
  static Interval sigmoid(const Interval& a) { return certsynth::sigmoid(a); }
  static Interval softplus(const Interval& a) { return certsynth::softplus(a); }
};

inline constexpr int kMaxJetDim = 8;

/// Value together with its gradient with respect to the state variables
/// (forward mode). S is double or Interval.
template <class S>
struct Jet {
  S v{};
  std::array<S, kMaxJetDim> d{};
  int n = 0;
};

template <class S>
struct EvalOps<Jet<S>> {
  using J = Jet<S>;
  using B = EvalOps<S>;

  static J scaled(const J& a, const S& value, const S& factor) {
    J r;
    r.v = value;
    r.n = a.n;
    for (int i = 0; i < a.n; ++i) r.d[i] = B::mul(factor, a.d[i]);
    return r;
  }
  static J neg(const J& a) {
    J r;
    r.v = B::neg(a.v);
    r.n = a.n;
    for (int i = 0; i < a.n; ++i) r.d[i] = B::neg(a.d[i]);
    return r;
  }
  static J add(const J& a, const J& b) {
    J r;
    r.v = B::add(a.v, b.v);
    r.n = std::max(a.n, b.n);
    for (int i = 0; i < r.n; ++i) r.d[i] = B::add(a.d[i], b.d[i]);
    return r;
  }
  static J sub(const J& a, const J& b) {
    J r;
    r.v = B::sub(a.v, b.v);
    r.n = std::max(a.n, b.n);
    for (int i = 0; i < r.n; ++i) r.d[i] = B::sub(a.d[i], b.d[i]);
    return r;
  }
  static J mul(const J& a, const J& b) {
    J r;
    r.v = B::mul(a.v, b.v);
    r.n = std::max(a.n, b.n);
    for (int i = 0; i < r.n; ++i) r.d[i] = B::add(B::mul(a.d[i], b.v), B::mul(a.v, b.d[i]));
    return r;
  }
  static J div(const J& a, const J& b) {
    J r;
    r.v = B::div(a.v, b.v);
    r.n = std::max(a.n, b.n);
    for (int i = 0; i < r.n; ++i) {
      r.d[i] = B::div(B::sub(a.d[i], B::mul(r.v, b.d[i])), b.v);
    }
    return r;
  }
  static J pow(const J& a, int k) {
    if (k == 0) {
      J r;
      r.v = S(1.0);
      r.n = a.n;
      for (int i = 0; i < a.n; ++i) r.d[i] = S(0.0);
      return r;
    }
    const S factor = B::mul(S(static_cast<double>(k)), B::pow(a.v, k - 1));
    return scaled(a, B::pow(a.v, k), factor);
  }
  static J sin(const J& a) { return scaled(a, B::sin(a.v), B::cos(a.v)); }
  static J cos(const J& a) { return scaled(a, B::cos(a.v), B::neg(B::sin(a.v))); }
  static J exp(const J& a) {
    const S e = B::exp(a.v);
    return scaled(a, e, e);
  }
  static J tanh(const J& a) {
    const S t = B::tanh(a.v);
    return scaled(a, t, B::sub(S(1.0), B::pow(t, 2)));
  }
  static J sigmoid(const J& a) {
    const S s = B::sigmoid(a.v);
    return scaled(a, s, B::mul(s, B::sub(S(1.0), s)));
  }
  static J softplus(const J& a) { return scaled(a, B::softplus(a.v), B::sigmoid(a.v)); }
};

}  // namespace certsynth
