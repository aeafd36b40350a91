#include "certsynth/expr.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

#include "certsynth/compiled_expr.hpp"

namespace certsynth {

struct ExprAccess {
  static Expr make(Op op, double value, int index, const Expr& a, const Expr& b) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->value = value;
    n->index = index;
    n->a = a.node_;
    if (op != Op::kPow) n->b = b.node_;
    return Expr(std::move(n));
  }
  static Expr wrap(const std::shared_ptr<const ExprNode>& n) { return Expr(n); }
  static Expr unary(Op op, const Expr& a) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->a = a.node_;
    return Expr(std::move(n));
  }
  static Expr binary(Op op, const Expr& a, const Expr& b) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->a = a.node_;
    n->b = b.node_;
    return Expr(std::move(n));
  }
  static Expr leaf(Op op, double value, int index) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->value = value;
    n->index = index;
    return Expr(std::move(n));
  }
};

namespace {

const Expr& zero_expr() {
  static const Expr z = ExprAccess::leaf(Op::kConst, 0.0, 0);
  return z;
}

}  // namespace

Expr::Expr() : Expr(zero_expr()) {}
Expr::Expr(double value) : Expr(value == 0.0 ? zero_expr() : ExprAccess::leaf(Op::kConst, value, 0)) {}

Expr Expr::constant(double value) { return Expr(value); }

Expr Expr::var(int index) {
  if (index < 0) throw std::invalid_argument("negative variable index");
  return ExprAccess::leaf(Op::kVar, 0.0, index);
}

Expr Expr::input(int index) {
  if (index < 0) throw std::invalid_argument("negative input index");
  return ExprAccess::leaf(Op::kInput, 0.0, index);
}

Op Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
int Expr::index() const { return node_->index; }
int Expr::exponent() const { return node_->index; }
Expr Expr::lhs() const { return ExprAccess::wrap(node_->a); }
Expr Expr::rhs() const { return ExprAccess::wrap(node_->b); }

namespace {

template <class Fn>
void visit_dag(const ExprNode* root, Fn&& fn) {
  std::unordered_set<const ExprNode*> seen;
  std::vector<const ExprNode*> stack{root};
  while (!stack.empty()) {
    const ExprNode* n = stack.back();
    stack.pop_back();
    if (!n || !seen.insert(n).second) continue;
    fn(*n);
    stack.push_back(n->a.get());
    stack.push_back(n->b.get());
  }
}

}  // namespace

int Expr::max_var_index() const {
  int m = -1;
  visit_dag(node(), [&](const ExprNode& n) {
    if (n.op == Op::kVar) m = std::max(m, n.index);
  });
  return m;
}

int Expr::max_input_index() const {
  int m = -1;
  visit_dag(node(), [&](const ExprNode& n) {
    if (n.op == Op::kInput) m = std::max(m, n.index);
  });
  return m;
}

std::size_t Expr::dag_size() const {
  std::size_t count = 0;
  visit_dag(node(), [&](const ExprNode&) { ++count; });
  return count;
}

namespace {

bool node_equal(const ExprNode* a, const ExprNode* b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op != b->op || a->index != b->index) return false;
  if (a->op == Op::kConst) return a->value == b->value;
  return node_equal(a->a.get(), b->a.get()) && node_equal(a->b.get(), b->b.get());
}

}  // namespace

bool Expr::structurally_equal(const Expr& other) const { return node_equal(node(), other.node()); }

// ---------------------------------------------------------------------------
// Construction with constant folding.

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() + b.value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return ExprAccess::binary(Op::kAdd, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() - b.value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return ExprAccess::binary(Op::kSub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() * b.value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr();
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  return ExprAccess::binary(Op::kMul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_constant(0.0)) throw EvalError("division by constant zero");
  if (a.is_constant() && b.is_constant()) return Expr(a.value() / b.value());
  if (a.is_constant(0.0)) return Expr();
  if (b.is_constant(1.0)) return a;
  return ExprAccess::binary(Op::kDiv, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr(-a.value());
  if (a.op() == Op::kNeg) return a.lhs();
  return ExprAccess::unary(Op::kNeg, a);
}

Expr pow(const Expr& a, int exponent) {
  if (exponent < 0) throw std::invalid_argument("negative exponent");
  if (exponent == 0) return Expr(1.0);
  if (exponent == 1) return a;
  if (a.is_constant()) return Expr(pow_int(a.value(), exponent));
  return ExprAccess::make(Op::kPow, 0.0, exponent, a, Expr());
}

namespace {

Expr unary_fn(Op op, const Expr& a, double (*fold)(double)) {
  if (a.is_constant()) return Expr(fold(a.value()));
  return ExprAccess::unary(op, a);
}

double sin_d(double v) { return std::sin(v); }
double cos_d(double v) { return std::cos(v); }
double exp_d(double v) { return std::exp(v); }
double tanh_d(double v) { return std::tanh(v); }
double sigmoid_d(double v) { return sigmoid(v); }
double softplus_d(double v) { return softplus(v); }

}  // namespace

Expr sin(const Expr& a) { return unary_fn(Op::kSin, a, sin_d); }
Expr cos(const Expr& a) { return unary_fn(Op::kCos, a, cos_d); }
Expr exp(const Expr& a) { return unary_fn(Op::kExp, a, exp_d); }
Expr tanh(const Expr& a) { return unary_fn(Op::kTanh, a, tanh_d); }
Expr sigmoid(const Expr& a) { return unary_fn(Op::kSigmoid, a, sigmoid_d); }
Expr softplus(const Expr& a) { return unary_fn(Op::kSoftplus, a, softplus_d); }

// ---------------------------------------------------------------------------
// Printing.

namespace {

// Larger binds tighter.
int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::kAdd:
    case Op::kSub: return 1;
    case Op::kMul:
    case Op::kDiv: return 2;
    case Op::kNeg: return 3;
    case Op::kPow: return 4;
    case Op::kConst: return e.value() < 0.0 ? 3 : 5;
    default: return 5;
  }
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const char* function_name(Op op) {
  switch (op) {
    case Op::kSin: return "sin";
    case Op::kCos: return "cos";
    case Op::kExp: return "exp";
    case Op::kTanh: return "tanh";
    case Op::kSigmoid: return "sigmoid";
    case Op::kSoftplus: return "softplus";
    default: return "";
  }
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print(e, out);
  if (wrap) out += ')';
}

void print(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Op::kConst: out += format_double(e.value()); return;
    case Op::kVar: out += "x" + std::to_string(e.index()); return;
    case Op::kInput: out += "u" + std::to_string(e.index()); return;
    case Op::kNeg:
      out += '-';
      print_wrapped(e.lhs(), precedence(e.lhs()) < 3, out);
      return;
    case Op::kAdd:
    case Op::kSub: {
      print_wrapped(e.lhs(), precedence(e.lhs()) < 1, out);
      out += e.op() == Op::kAdd ? " + " : " - ";
      // Right operand of '-' needs parens at equal precedence.
      print_wrapped(e.rhs(), precedence(e.rhs()) < (e.op() == Op::kSub ? 2 : 1), out);
      return;
    }
    case Op::kMul:
    case Op::kDiv: {
      print_wrapped(e.lhs(), precedence(e.lhs()) < 2, out);
      out += e.op() == Op::kMul ? "*" : "/";
      print_wrapped(e.rhs(), precedence(e.rhs()) < 3, out);
      return;
    }
    case Op::kPow:
      print_wrapped(e.lhs(), precedence(e.lhs()) < 5, out);
      out += "^" + std::to_string(e.exponent());
      return;
    default:
      out += function_name(e.op());
      out += '(';
      print(e.lhs(), out);
      out += ')';
      return;
  }
}

}  // namespace

std::string Expr::to_string() const {
  std::string out;
  print(*this, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing (recursive descent).

namespace {

class Parser {
 public:
  Parser(std::string_view text, int dim_state, int dim_input)
      : text_(text), dim_state_(dim_state), dim_input_(dim_input) {}

  Expr parse_all() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) {
      throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (eat('+')) {
        lhs = lhs + parse_product();
      } else if (eat('-')) {
        lhs = lhs - parse_product();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (eat('*')) {
        lhs = lhs * parse_unary();
      } else if (eat('/')) {
        const std::size_t at = pos_;
        Expr rhs = parse_unary();
        if (rhs.is_constant(0.0)) throw ParseError("division by constant zero", at);
        lhs = lhs / rhs;
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (eat('-')) return -parse_unary();
    if (eat('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (eat('^')) {
      skip_ws();
      const std::size_t start = pos_;
      int k = 0;
      auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), k);
      if (res.ec != std::errc() || k < 0) {
        throw ParseError("expected non-negative integer exponent", start);
      }
      pos_ = static_cast<std::size_t>(res.ptr - text_.data());
      if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
        throw ParseError("exponent must be an integer", start);
      }
      return pow(base, k);
    }
    return base;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    double v = 0.0;
    auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (res.ec != std::errc()) throw ParseError("malformed number", start);
    pos_ = static_cast<std::size_t>(res.ptr - text_.data());
    return Expr(v);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "pi") return Expr(std::numbers::pi);
    using Fn = Expr (*)(const Expr&);
    static const std::pair<std::string_view, Fn> kFunctions[] = {
        {"sin", static_cast<Fn>(sin)},         {"cos", static_cast<Fn>(cos)},
        {"exp", static_cast<Fn>(exp)},         {"tanh", static_cast<Fn>(tanh)},
        {"sigmoid", static_cast<Fn>(sigmoid)}, {"softplus", static_cast<Fn>(softplus)},
    };
    for (const auto& [fname, fn] : kFunctions) {
      if (name == fname) {
        if (!eat('(')) throw ParseError("expected '(' after " + std::string(name), pos_);
        Expr arg = parse_sum();
        if (!eat(')')) throw ParseError("expected ')'", pos_);
        return fn(arg);
      }
    }
    if ((name[0] == 'x' || name[0] == 'u') && name.size() > 1) {
      int idx = -1;
      auto res = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (res.ec == std::errc() && res.ptr == name.data() + name.size()) {
        const bool is_state = name[0] == 'x';
        const int limit = is_state ? dim_state_ : dim_input_;
        if (idx >= limit) {
          throw ParseError("variable index out of range: " + std::string(name), start);
        }
        return is_state ? Expr::var(idx) : Expr::input(idx);
      }
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view text_;
  int dim_state_;
  int dim_input_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, int dim_state, int dim_input) {
  return Parser(text, dim_state, dim_input).parse_all();
}

// ---------------------------------------------------------------------------
// Evaluation.

namespace {

struct PointLeaves {
  std::span<const double> x;
  std::span<const double> u;
  double constant(double v) const { return v; }
  double var(int i) const {
    if (static_cast<std::size_t>(i) >= x.size()) throw EvalError("point too short for x" + std::to_string(i));
    return x[i];
  }
  double input(int i) const {
    if (static_cast<std::size_t>(i) >= u.size()) throw EvalError("missing value for u" + std::to_string(i));
    return u[i];
  }
};

struct BoxLeaves {
  std::span<const Interval> box;
  Interval constant(double v) const { return Interval(v); }
  Interval var(int i) const {
    if (static_cast<std::size_t>(i) >= box.size()) throw std::invalid_argument("box too short");
    return box[i];
  }
  Interval input(int) const { throw std::invalid_argument("interval evaluation with free inputs"); }
};

}  // namespace

double eval(const Expr& e, std::span<const double> point, std::span<const double> inputs) {
  return CompiledExpr(e).eval(point, inputs);
}

Interval interval_eval(const Expr& e, std::span<const Interval> box) {
  CompiledExpr c(e);
  std::vector<Interval> regs;
  c.run(BoxLeaves{box}, regs);
  return regs[c.outputs()[0]];
}

// ---------------------------------------------------------------------------
// Differentiation.

namespace {

class Differentiator {
 public:
  explicit Differentiator(int var) : var_(var) {}

  Expr d(const Expr& e) {
    auto it = memo_.find(e.node());
    if (it != memo_.end()) return it->second;
    Expr r = compute(e);
    memo_.emplace(e.node(), r);
    return r;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.op()) {
      case Op::kConst:
      case Op::kInput: return Expr();
      case Op::kVar: return e.index() == var_ ? Expr(1.0) : Expr();
      case Op::kNeg: return -d(e.lhs());
      case Op::kAdd: return d(e.lhs()) + d(e.rhs());
      case Op::kSub: return d(e.lhs()) - d(e.rhs());
      case Op::kMul: return d(e.lhs()) * e.rhs() + e.lhs() * d(e.rhs());
      case Op::kDiv: {
        const Expr da = d(e.lhs());
        const Expr db = d(e.rhs());
        if (db.is_constant(0.0)) return da / e.rhs();
        return (da * e.rhs() - e.lhs() * db) / pow(e.rhs(), 2);
      }
      case Op::kPow: {
        const int k = e.exponent();
        return Expr(static_cast<double>(k)) * pow(e.lhs(), k - 1) * d(e.lhs());
      }
      case Op::kSin: return cos(e.lhs()) * d(e.lhs());
      case Op::kCos: return -sin(e.lhs()) * d(e.lhs());
      case Op::kExp: return e * d(e.lhs());
      case Op::kTanh: return (Expr(1.0) - pow(e, 2)) * d(e.lhs());
      case Op::kSigmoid: return e * (Expr(1.0) - e) * d(e.lhs());
      case Op::kSoftplus: return sigmoid(e.lhs()) * d(e.lhs());
    }
    return Expr();
  }

  int var_;
  std::unordered_map<const ExprNode*, Expr> memo_;
};

// Rebuilds a DAG bottom-up, mapping leaves through `leaf` and re-folding.
class Rebuilder {
 public:
  explicit Rebuilder(std::function<Expr(const Expr&)> leaf) : leaf_(std::move(leaf)) {}

  Expr r(const Expr& e) {
    auto it = memo_.find(e.node());
    if (it != memo_.end()) return it->second;
    Expr out;
    switch (e.op()) {
      case Op::kConst:
      case Op::kVar:
      case Op::kInput: out = leaf_(e); break;
      case Op::kNeg: out = -r(e.lhs()); break;
      case Op::kAdd: out = r(e.lhs()) + r(e.rhs()); break;
      case Op::kSub: out = r(e.lhs()) - r(e.rhs()); break;
      case Op::kMul: out = r(e.lhs()) * r(e.rhs()); break;
      case Op::kDiv: out = r(e.lhs()) / r(e.rhs()); break;
      case Op::kPow: out = pow(r(e.lhs()), e.exponent()); break;
      case Op::kSin: out = sin(r(e.lhs())); break;
      case Op::kCos: out = cos(r(e.lhs())); break;
      case Op::kExp: out = exp(r(e.lhs())); break;
      case Op::kTanh: out = tanh(r(e.lhs())); break;
      case Op::kSigmoid: out = sigmoid(r(e.lhs())); break;
      case Op::kSoftplus: out = softplus(r(e.lhs())); break;
    }
    memo_.emplace(e.node(), out);
    return out;
  }

 private:
  std::function<Expr(const Expr&)> leaf_;
  std::unordered_map<const ExprNode*, Expr> memo_;
};

}  // namespace

Expr diff(const Expr& e, int var) {
  if (var < 0) throw std::invalid_argument("negative differentiation index");
  return Differentiator(var).d(e);
}

Expr round_coefficients(const Expr& e, double precision) {
  if (!(precision > 0.0)) throw std::invalid_argument("rounding precision must be positive");
  Rebuilder rb([precision](const Expr& leaf) {
    if (!leaf.is_constant()) return leaf;
    double q = std::nearbyint(leaf.value() / precision) * precision;
    if (q == 0.0) q = 0.0;  // drop negative zero
    return Expr(q);
  });
  return rb.r(e);
}

Expr substitute_inputs(const Expr& e, std::span<const Expr> replacements) {
  Rebuilder rb([replacements](const Expr& leaf) {
    if (leaf.op() != Op::kInput) return leaf;
    if (static_cast<std::size_t>(leaf.index()) >= replacements.size()) {
      throw std::invalid_argument("no replacement for u" + std::to_string(leaf.index()));
    }
    return replacements[leaf.index()];
  });
  return rb.r(e);
}

// ---------------------------------------------------------------------------
// Vector fields.

void VectorField::validate() const {
  if (dim_state <= 0) throw std::invalid_argument("vector field needs a positive state dimension");
  if (dim_input < 0) throw std::invalid_argument("negative input dimension");
  if (static_cast<int>(components.size()) != dim_state) {
    throw std::invalid_argument("vector field has " + std::to_string(components.size()) +
                                " components for dimension " + std::to_string(dim_state));
  }
  for (const Expr& c : components) {
    if (c.max_var_index() >= dim_state) throw std::invalid_argument("component uses x beyond dimension");
    if (c.max_input_index() >= dim_input) throw std::invalid_argument("component uses u beyond input dimension");
  }
}

VectorField VectorField::parse(const std::vector<std::string>& components, int dim_input) {
  VectorField f;
  f.dim_state = static_cast<int>(components.size());
  f.dim_input = dim_input;
  for (const std::string& text : components) {
    f.components.push_back(certsynth::parse(text, f.dim_state, dim_input));
  }
  f.validate();
  return f;
}

std::vector<double> VectorField::eval(std::span<const double> x) const {
  CompiledExpr c(components);
  return c.eval_all(x);
}

Expr lie_derivative(const Expr& c, const VectorField& f) {
  if (f.dim_input != 0) throw std::invalid_argument("lie derivative needs a closed-loop field");
  if (c.max_var_index() >= f.dim_state) {
    throw std::invalid_argument("certificate uses variables beyond the field dimension");
  }
  Expr sum;
  for (int i = 0; i < f.dim_state; ++i) sum = sum + diff(c, i) * f.components[i];
  return sum;
}

// ---------------------------------------------------------------------------
// Compilation.

CompiledExpr::CompiledExpr(std::span<const Expr> outputs) {
  std::unordered_map<const ExprNode*, int> slot;
  // Iterative post-order so deep trees do not blow the stack.
  for (const Expr& out : outputs) {
    std::vector<std::pair<const ExprNode*, bool>> stack{{out.node(), false}};
    while (!stack.empty()) {
      auto [n, expanded] = stack.back();
      stack.pop_back();
      if (slot.count(n)) continue;
      if (!expanded) {
        stack.push_back({n, true});
        if (n->b) stack.push_back({n->b.get(), false});
        if (n->a) stack.push_back({n->a.get(), false});
        continue;
      }
      Instr in;
      in.op = n->op;
      in.value = n->value;
      in.index = n->index;
      if (n->a) in.a = slot.at(n->a.get());
      if (n->b) in.b = slot.at(n->b.get());
      slot.emplace(n, static_cast<int>(code_.size()));
      code_.push_back(in);
    }
    outputs_.push_back(slot.at(out.node()));
  }
}

double CompiledExpr::eval(std::span<const double> x, std::span<const double> u, std::size_t k) const {
  std::vector<double> regs;
  run(PointLeaves{x, u}, regs);
  return regs[outputs_.at(k)];
}

std::vector<double> CompiledExpr::eval_all(std::span<const double> x, std::span<const double> u) const {
  std::vector<double> regs;
  run(PointLeaves{x, u}, regs);
  std::vector<double> out;
  out.reserve(outputs_.size());
  for (int o : outputs_) out.push_back(regs[o]);
  return out;
}

}  // namespace certsynth
