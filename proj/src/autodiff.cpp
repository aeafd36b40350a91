#include "certsynth/autodiff.hpp"

#include <cmath>
#include <stdexcept>

#include "certsynth/interval.hpp"

namespace certsynth::ad {

namespace {

Mat expand(const Mat& m, Eigen::Index rows, Eigen::Index cols) {
  if (m.rows() == rows && m.cols() == cols) return m;
  if (m.rows() == 1 && m.cols() == 1) return Mat::Constant(rows, cols, m(0, 0));
  if (m.cols() == 1 && m.rows() == rows) return m.replicate(1, cols);
  if (m.rows() == 1 && m.cols() == cols) return m.replicate(rows, 1);
  throw std::invalid_argument("tape: incompatible shapes");
}

Mat reduce_to(const Mat& g, Eigen::Index rows, Eigen::Index cols) {
  if (g.rows() == rows && g.cols() == cols) return g;
  if (rows == 1 && cols == 1) return Mat::Constant(1, 1, g.sum());
  if (cols == 1) return g.rowwise().sum();
  return g.colwise().sum();
}

std::pair<Eigen::Index, Eigen::Index> common_shape(const Mat& a, const Mat& b) {
  return {std::max(a.rows(), b.rows()), std::max(a.cols(), b.cols())};
}

double sig(double x) { return certsynth::sigmoid(x); }

}  // namespace

Var Tape::push(Mat value, std::function<void(Tape&, int)> back) {
  Node n;
  n.grad = Mat::Zero(value.rows(), value.cols());
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(int id, const Mat& delta) { nodes_[id].grad += delta; }

Var Tape::constant(Mat value) { return push(std::move(value), nullptr); }
Var Tape::param(Mat value) { return push(std::move(value), nullptr); }

Var Tape::matmul(Var a, Var b) {
  Mat v = value(a) * value(b);
  return push(std::move(v), [a, b](Tape& t, int self) {
    const Mat& gs = t.g(self);
    t.accumulate(a.id, gs * t.value(b).transpose());
    t.accumulate(b.id, t.value(a).transpose() * gs);
  });
}

Var Tape::add(Var a, Var b) {
  auto [r, c] = common_shape(value(a), value(b));
  Mat v = expand(value(a), r, c) + expand(value(b), r, c);
  return push(std::move(v), [a, b](Tape& t, int self) {
    const Mat& gs = t.g(self);
    t.accumulate(a.id, reduce_to(gs, t.value(a).rows(), t.value(a).cols()));
    t.accumulate(b.id, reduce_to(gs, t.value(b).rows(), t.value(b).cols()));
  });
}

Var Tape::sub(Var a, Var b) {
  auto [r, c] = common_shape(value(a), value(b));
  Mat v = expand(value(a), r, c) - expand(value(b), r, c);
  return push(std::move(v), [a, b](Tape& t, int self) {
    const Mat& gs = t.g(self);
    t.accumulate(a.id, reduce_to(gs, t.value(a).rows(), t.value(a).cols()));
    t.accumulate(b.id, reduce_to(-gs, t.value(b).rows(), t.value(b).cols()));
  });
}

Var Tape::mul(Var a, Var b) {
  auto [r, c] = common_shape(value(a), value(b));
  Mat v = expand(value(a), r, c).cwiseProduct(expand(value(b), r, c));
  return push(std::move(v), [a, b, r = r, c = c](Tape& t, int self) {
    const Mat& gs = t.g(self);
    const Mat& va = t.value(a);
    const Mat& vb = t.value(b);
    t.accumulate(a.id, reduce_to(gs.cwiseProduct(expand(vb, r, c)), va.rows(), va.cols()));
    t.accumulate(b.id, reduce_to(gs.cwiseProduct(expand(va, r, c)), vb.rows(), vb.cols()));
  });
}

Var Tape::div(Var a, Var b) {
  auto [r, c] = common_shape(value(a), value(b));
  const Mat eb = expand(value(b), r, c);
  if ((eb.array() == 0.0).any()) throw EvalError("division by zero");
  Mat v = expand(value(a), r, c).cwiseQuotient(eb);
  return push(std::move(v), [a, b, r = r, c = c](Tape& t, int self) {
    const Mat& gs = t.g(self);
    const Mat& va = t.value(a);
    const Mat& vb = t.value(b);
    const Mat eb = expand(vb, r, c);
    const Mat q = t.value(Var{self});
    t.accumulate(a.id, reduce_to(gs.cwiseQuotient(eb), va.rows(), va.cols()));
    t.accumulate(b.id, reduce_to(-gs.cwiseProduct(q).cwiseQuotient(eb), vb.rows(), vb.cols()));
  });
}

Var Tape::neg(Var a) { return scale(a, -1.0); }

Var Tape::scale(Var a, double s) {
  Mat v = value(a) * s;
  return push(std::move(v), [a, s](Tape& t, int self) { t.accumulate(a.id, t.g(self) * s); });
}

Var Tape::powi(Var a, int k) {
  if (k < 0) throw std::invalid_argument("negative exponent");
  const Mat& va = value(a);
  Mat v = va.unaryExpr([k](double x) { return pow_int(x, k); });
  return push(std::move(v), [a, k](Tape& t, int self) {
    if (k == 0) return;
    const Mat d = t.value(a).unaryExpr([k](double x) { return k * pow_int(x, k - 1); });
    t.accumulate(a.id, t.g(self).cwiseProduct(d));
  });
}

Var Tape::unary(Var a, Unary kind) {
  const Mat& va = value(a);
  Mat v(va.rows(), va.cols());
  Mat d(va.rows(), va.cols());
  for (Eigen::Index j = 0; j < va.cols(); ++j) {
    for (Eigen::Index i = 0; i < va.rows(); ++i) {
      const double x = va(i, j);
      double f = 0.0, df = 0.0;
      switch (kind) {
        case Unary::kSin: f = std::sin(x); df = std::cos(x); break;
        case Unary::kCos: f = std::cos(x); df = -std::sin(x); break;
        case Unary::kExp: f = std::exp(x); df = f; break;
        case Unary::kSqrt:
          if (!(x > 0)) throw EvalError("sqrt of a non-positive value on the tape");
          f = std::sqrt(x);
          df = 0.5 / f;
          break;
        case Unary::kTanh: {
          const double th = std::tanh(x);
          f = th;
          df = 1 - th * th;
          break;
        }
        case Unary::kTanhD1: {
          const double th = std::tanh(x);
          f = 1 - th * th;
          df = -2 * th * f;
          break;
        }
        case Unary::kTanhSq: {
          const double th = std::tanh(x);
          f = th * th;
          df = 2 * th * (1 - th * th);
          break;
        }
        case Unary::kTanhSqD1: {
          const double th = std::tanh(x);
          f = 2 * th * (1 - th * th);
          df = 2 * (1 - th * th) * (1 - 3 * th * th);
          break;
        }
        case Unary::kSigmoid: {
          const double s = sig(x);
          f = s;
          df = s * (1 - s);
          break;
        }
        case Unary::kSigmoidD1: {
          const double s = sig(x);
          f = s * (1 - s);
          df = f * (1 - 2 * s);
          break;
        }
        case Unary::kSoftplus: f = certsynth::softplus(x); df = sig(x); break;
      }
      v(i, j) = f;
      d(i, j) = df;
    }
  }
  return push(std::move(v), [a, d = std::move(d)](Tape& t, int self) { t.accumulate(a.id, t.g(self).cwiseProduct(d)); });
}

Var Tape::leaky_relu(Var a, double slope) {
  const Mat& va = value(a);
  Mat v = va.unaryExpr([slope](double x) { return x > 0 ? x : slope * x; });
  return push(std::move(v), [a, slope](Tape& t, int self) {
    const Mat d = t.value(a).unaryExpr([slope](double x) { return x > 0 ? 1.0 : slope; });
    t.accumulate(a.id, t.g(self).cwiseProduct(d));
  });
}

Var Tape::row(Var a, int i) {
  Mat v = value(a).row(i);
  return push(std::move(v), [a, i](Tape& t, int self) {
    Mat d = Mat::Zero(t.value(a).rows(), t.value(a).cols());
    d.row(i) = t.g(self);
    t.accumulate(a.id, d);
  });
}

Var Tape::stack_rows(const std::vector<Var>& rows) {
  if (rows.empty()) throw std::invalid_argument("stack of nothing");
  Eigen::Index cols = 1;
  for (Var r : rows) cols = std::max(cols, value(r).cols());
  Mat v(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t k = 0; k < rows.size(); ++k) v.row(k) = expand(value(rows[k]), 1, cols);
  return push(std::move(v), [rows](Tape& t, int self) {
    const Mat& gs = t.g(self);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const Mat& vr = t.value(rows[k]);
      t.accumulate(rows[k].id, reduce_to(gs.row(k), vr.rows(), vr.cols()));
    }
  });
}

Var Tape::select_cols(Var a, const std::vector<int>& cols) {
  const Mat& va = value(a);
  Mat v(va.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) v.col(k) = va.col(cols[k]);
  return push(std::move(v), [a, cols](Tape& t, int self) {
    Mat d = Mat::Zero(t.value(a).rows(), t.value(a).cols());
    const Mat& gs = t.g(self);
    for (std::size_t k = 0; k < cols.size(); ++k) d.col(cols[k]) += gs.col(k);
    t.accumulate(a.id, d);
  });
}

Var Tape::sum_rows(Var a) {
  Mat v = value(a).colwise().sum();
  return push(std::move(v), [a](Tape& t, int self) {
    t.accumulate(a.id, t.g(self).replicate(t.value(a).rows(), 1));
  });
}

Var Tape::mean(Var a) {
  const Mat& va = value(a);
  const double n = static_cast<double>(va.size());
  Mat v = Mat::Constant(1, 1, n > 0 ? va.sum() / n : 0.0);
  return push(std::move(v), [a, n](Tape& t, int self) {
    if (n == 0) return;
    const double gs = t.g(self)(0, 0);
    t.accumulate(a.id, Mat::Constant(t.value(a).rows(), t.value(a).cols(), gs / n));
  });
}

void Tape::backward(Var out) {
  if (value(out).size() != 1) throw std::invalid_argument("backward needs a scalar output");
  for (auto& n : nodes_) n.grad.setZero();
  nodes_[out.id].grad(0, 0) = 1.0;
  for (int id = out.id; id >= 0; --id) {
    if (nodes_[id].back) nodes_[id].back(*this, id);
  }
}

std::vector<Var> eval_program(Tape& tape, const CompiledExpr& program, Var x, Var u) {
  const auto& code = program.code();
  std::vector<Var> regs(code.size());
  for (std::size_t i = 0; i < code.size(); ++i) {
    const Instr& in = code[i];
    switch (in.op) {
      case Op::kConst: regs[i] = tape.scalar(in.value); break;
      case Op::kVar: regs[i] = tape.row(x, in.index); break;
      case Op::kInput:
        if (!u.valid()) throw std::invalid_argument("expression uses control inputs but none were supplied");
        regs[i] = tape.row(u, in.index);
        break;
      case Op::kNeg: regs[i] = tape.neg(regs[in.a]); break;
      case Op::kAdd: regs[i] = tape.add(regs[in.a], regs[in.b]); break;
      case Op::kSub: regs[i] = tape.sub(regs[in.a], regs[in.b]); break;
      case Op::kMul:
        regs[i] = in.a == in.b ? tape.powi(regs[in.a], 2) : tape.mul(regs[in.a], regs[in.b]);
        break;
      case Op::kDiv: regs[i] = tape.div(regs[in.a], regs[in.b]); break;
      case Op::kPow: regs[i] = tape.powi(regs[in.a], in.index); break;
      case Op::kSin: regs[i] = tape.unary(regs[in.a], Unary::kSin); break;
      case Op::kCos: regs[i] = tape.unary(regs[in.a], Unary::kCos); break;
      case Op::kExp: regs[i] = tape.unary(regs[in.a], Unary::kExp); break;
      case Op::kTanh: regs[i] = tape.unary(regs[in.a], Unary::kTanh); break;
      case Op::kSigmoid: regs[i] = tape.unary(regs[in.a], Unary::kSigmoid); break;
      case Op::kSoftplus: regs[i] = tape.unary(regs[in.a], Unary::kSoftplus); break;
    }
  }
  std::vector<Var> out;
  for (int o : program.outputs()) out.push_back(regs[o]);
  return out;
}

}  // namespace certsynth::ad
