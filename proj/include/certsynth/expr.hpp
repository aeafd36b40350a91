#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "certsynth/interval.hpp"

namespace certsynth {

enum class Op : std::uint8_t {
  kConst,
  kVar,    // state variable x_i
  kInput,  // control input u_j
  kNeg,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,  // non-negative integer exponent
  kSin,
  kCos,
  kExp,
  kTanh,
  kSigmoid,
  kSoftplus,
};

struct ExprNode;

/// Immutable symbolic expression. Copies share structure; nodes are never
/// mutated after construction, so an Expr may be read from many threads.
///
/// The only simplification ever applied is constant folding at construction
/// (0*e -> 0, e+0 -> e, 1*e -> e, and operations on two constants).
class Expr {
 public:
  Expr();  // the constant 0
  Expr(double value);  // NOLINT(runtime/explicit)

  static Expr constant(double value);
  static Expr var(int index);
  static Expr input(int index);

  Op op() const;
  double value() const;   // kConst only
  int index() const;      // kVar / kInput only
  int exponent() const;   // kPow only
  Expr lhs() const;
  Expr rhs() const;

  bool is_constant() const { return op() == Op::kConst; }
  bool is_constant(double v) const { return is_constant() && value() == v; }

  /// Largest state-variable index used, or -1.
  int max_var_index() const;
  /// Largest input index used, or -1.
  int max_input_index() const;
  /// Number of distinct nodes (shared subtrees counted once).
  std::size_t dag_size() const;

  bool structurally_equal(const Expr& other) const;

  /// Emits the text grammar accepted by parse().
  std::string to_string() const;

  const ExprNode* node() const { return node_.get(); }

 private:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  friend struct ExprAccess;

  std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
  Op op = Op::kConst;
  double value = 0.0;
  int index = 0;
  std::shared_ptr<const ExprNode> a;
  std::shared_ptr<const ExprNode> b;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& a, int exponent);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);
Expr tanh(const Expr& a);
Expr sigmoid(const Expr& a);
Expr softplus(const Expr& a);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the expression grammar: x0..x{n-1}, u0..u{m-1}, + - * / ^,
/// sin cos exp tanh sigmoid softplus, parentheses, decimal literals and the
/// constant `pi`. `^` binds tightest, then unary minus, then * /, then + -.
/// The right operand of `^` must be a non-negative integer literal.
Expr parse(std::string_view text, int dim_state, int dim_input = 0);

/// Exact recursive evaluation. Inputs default to empty (no u symbols).
/// Division by zero throws EvalError.
double eval(const Expr& e, std::span<const double> point, std::span<const double> inputs = {});

/// Symbolic partial derivative with respect to x_var.
Expr diff(const Expr& e, int var);

/// Sound interval enclosure of e over the box. Throws EnclosureError when a
/// divisor's enclosure contains zero.
Interval interval_eval(const Expr& e, std::span<const Interval> box);

/// Replaces every constant by the nearest multiple of `precision` and
/// re-folds the tree.
Expr round_coefficients(const Expr& e, double precision = 1e-3);

/// Replaces every u_j by replacements[j].
Expr substitute_inputs(const Expr& e, std::span<const Expr> replacements);

/// Right-hand side of x' = f(x, u).
struct VectorField {
  int dim_state = 0;
  int dim_input = 0;
  std::vector<Expr> components;

  /// Validates the invariants; throws std::invalid_argument.
  void validate() const;
  static VectorField parse(const std::vector<std::string>& components, int dim_input = 0);
  std::vector<double> eval(std::span<const double> x) const;
};

/// Sum_i dc/dx_i * f_i. Requires f.dim_input == 0.
Expr lie_derivative(const Expr& c, const VectorField& f);

}  // namespace certsynth
