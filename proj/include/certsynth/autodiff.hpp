#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "certsynth/compiled_expr.hpp"

namespace certsynth::ad {

using Mat = Eigen::MatrixXd;

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

enum class Unary {
  kSin,
  kCos,
  kExp,
  kTanh,
  kTanhD1,      // 1 - tanh^2
  kTanhSq,      // tanh^2
  kTanhSqD1,    // d/da tanh(a)^2
  kSigmoid,
  kSigmoidD1,   // s (1 - s)
  kSoftplus,
  kSqrt,
};

/// Batched reverse-mode tape. Values are matrices with one sample per
/// column. Binary elementwise ops broadcast a 1x1 operand, or an h x 1
/// column against an h x N operand.
class Tape {
 public:
  Var constant(Mat value);
  Var param(Mat value);
  Var scalar(double v) { return constant(Mat::Constant(1, 1, v)); }

  const Mat& value(Var v) const { return nodes_[v.id].value; }
  const Mat& grad(Var v) const { return nodes_[v.id].grad; }
  std::size_t size() const { return nodes_.size(); }

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var neg(Var a);
  Var scale(Var a, double s);
  Var powi(Var a, int k);
  Var unary(Var a, Unary kind);
  /// max(a, 0) + slope * min(a, 0)
  Var leaky_relu(Var a, double slope);
  Var row(Var a, int i);
  Var stack_rows(const std::vector<Var>& rows);
  Var select_cols(Var a, const std::vector<int>& cols);
  /// Column sums: (1 x N).
  Var sum_rows(Var a);
  /// Mean of all entries (1 x 1). An empty operand gives 0.
  Var mean(Var a);

  /// Reverse sweep from a 1x1 node.
  void backward(Var out);

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::function<void(Tape&, int)> back;
  };
  Var push(Mat value, std::function<void(Tape&, int)> back);
  Mat& g(int id) { return nodes_[id].grad; }
  void accumulate(int id, const Mat& delta);

  std::vector<Node> nodes_;
};

/// Evaluates a compiled expression program on the tape. X is the state
/// matrix (n x N); U holds control inputs (m x N) or is invalid. Returns one
/// 1 x N row per program output.
std::vector<Var> eval_program(Tape& tape, const CompiledExpr& program, Var x, Var u);

}  // namespace certsynth::ad
